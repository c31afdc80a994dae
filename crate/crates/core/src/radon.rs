//! Cumulative Radon features.
//!
//! The point features of a series form an empirical distribution (a uniform
//! mixture of Dirac masses). Its Radon projection along a unit direction θ is
//! the set of inner products `⟨θ, f_t⟩`, and the series is summarised by a
//! histogram CDF of those values for each direction of a fixed set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::PointFeatureMatrix;
use crate::linalg::{center_rows, dot, gram_columns, Matrix, SymmetricEigen};

pub const DEFAULT_PROJECTIONS: usize = 100;
pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_PAD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionScheme {
    /// I.i.d. standard normal entries, rows normalized.
    #[default]
    Gaussian,
    /// The first `n_p` standard basis vectors.
    Marginals,
    /// Leading eigenvectors of the pooled training feature covariance.
    Pca,
}

impl std::str::FromStr for DirectionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "rand" | "random" => Ok(Self::Gaussian),
            "marginals" | "id" | "identity" => Ok(Self::Marginals),
            "pca" => Ok(Self::Pca),
            other => Err(Error::config(format!("unknown direction scheme `{other}`"))),
        }
    }
}

/// `N_P` unit directions in feature space, one per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub scheme: DirectionScheme,
    pub seed: u64,
    directions: Matrix,
}

impl DirectionSet {
    pub fn from_matrix(scheme: DirectionScheme, seed: u64, directions: Matrix) -> Result<Self> {
        for p in 0..directions.rows() {
            let norm = dot(directions.row(p), directions.row(p)).sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("direction {p} has norm {norm}")));
            }
        }
        Ok(Self { scheme, seed, directions })
    }

    pub fn len(&self) -> usize {
        self.directions.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.rows() == 0
    }

    /// Feature dimension `d_f`.
    pub fn dim(&self) -> usize {
        self.directions.cols()
    }

    pub fn direction(&self, p: usize) -> &[f64] {
        self.directions.row(p)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.directions
    }
}

/// Samples `n_p` projection directions in a `dim`-dimensional feature space.
///
/// `Pca` needs the training feature matrices; the other schemes ignore them.
pub fn sample_directions(
    dim: usize,
    n_p: usize,
    scheme: DirectionScheme,
    seed: u64,
    training: Option<&[PointFeatureMatrix]>,
) -> Result<DirectionSet> {
    if n_p == 0 {
        return Err(Error::config("the number of projections must be at least 1"));
    }
    if dim == 0 {
        return Err(Error::config("feature dimension must be at least 1"));
    }
    let directions = match scheme {
        DirectionScheme::Gaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = Matrix::zeros(n_p, dim);
            for p in 0..n_p {
                loop {
                    let row = m.row_mut(p);
                    for v in row.iter_mut() {
                        *v = StandardNormal.sample(&mut rng);
                    }
                    let norm = dot(row, row).sqrt();
                    if norm > 1e-12 {
                        row.iter_mut().for_each(|v| *v /= norm);
                        break;
                    }
                }
            }
            m
        }
        DirectionScheme::Marginals => {
            if n_p > dim {
                return Err(Error::config(format!("marginal directions need n_p ≤ d_f ({n_p} > {dim})")));
            }
            Matrix::from_fn(n_p, dim, |i, j| f64::from(u8::from(i == j)))
        }
        DirectionScheme::Pca => {
            let training = training
                .filter(|t| !t.is_empty())
                .ok_or_else(|| Error::config("pca directions require training features"))?;
            if n_p > dim {
                return Err(Error::config(format!("pca directions need n_p ≤ d_f ({n_p} > {dim})")));
            }
            pca_directions(dim, n_p, training)?
        }
    };
    Ok(DirectionSet { scheme, seed, directions })
}

fn pca_directions(dim: usize, n_p: usize, training: &[PointFeatureMatrix]) -> Result<Matrix> {
    let mut rows: Vec<&[f64]> = Vec::new();
    for m in training {
        if m.dim() != dim {
            return Err(Error::Dimension { expected: dim, found: m.dim() });
        }
        rows.extend(m.iter_rows());
    }
    let (_, centered) = center_rows(&rows, dim);
    let mut cov = gram_columns(&centered);
    cov.symmetrize();
    let eig = SymmetricEigen::new(&cov)?;
    let mut out = Matrix::zeros(n_p, dim);
    for p in 0..n_p {
        let v = eig.vectors.row(p);
        // sign convention: the largest-magnitude entry is positive
        let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        let norm = dot(v, v).sqrt();
        for (o, x) in out.row_mut(p).iter_mut().zip(v) {
            *o = sign * x / norm;
        }
    }
    Ok(out)
}

/// `N_P × T` matrix of projections `⟨θ_p, f_t⟩`.
pub fn project(features: &PointFeatureMatrix, dirs: &DirectionSet) -> Result<Matrix> {
    if features.dim() != dirs.dim() {
        return Err(Error::Dimension { expected: dirs.dim(), found: features.dim() });
    }
    let t = features.rows();
    let mut out = Matrix::zeros(dirs.len(), t);
    for p in 0..dirs.len() {
        let theta = dirs.direction(p);
        for (o, row) in out.row_mut(p).iter_mut().zip(features.iter_rows()) {
            *o = dot(theta, row);
        }
    }
    Ok(out)
}

/// Per-direction histogram bin edges, `N_P × (N_B + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramGrid {
    edges: Matrix,
}

impl HistogramGrid {
    pub fn from_edges(edges: Matrix) -> Result<Self> {
        if edges.cols() < 3 {
            return Err(Error::config("a histogram needs at least 2 bins"));
        }
        for p in 0..edges.rows() {
            if edges.row(p).windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid(format!("edges of direction {p} are not increasing")));
            }
        }
        Ok(Self { edges })
    }

    pub fn directions(&self) -> usize {
        self.edges.rows()
    }

    pub fn bins(&self) -> usize {
        self.edges.cols() - 1
    }

    pub fn edges(&self, p: usize) -> &[f64] {
        self.edges.row(p)
    }

    /// Width of the (uniform) bins of direction `p`.
    pub fn bin_width(&self, p: usize) -> f64 {
        let e = self.edges(p);
        (e[e.len() - 1] - e[0]) / self.bins() as f64
    }

    /// Bin of `x`: values are clamped into the grid, bins are `(e_i, e_{i+1}]`
    /// with the first bin closed on the left.
    fn bin_of(&self, p: usize, x: f64) -> usize {
        let e = self.edges(p);
        let n_b = self.bins();
        let (lo, hi) = (e[0], e[n_b]);
        if x <= e[1] {
            return 0;
        }
        if x >= hi {
            return n_b - 1;
        }
        let guess = ((x - lo) / (hi - lo) * n_b as f64).ceil() as isize - 1;
        let mut b = guess.clamp(0, n_b as isize - 1) as usize;
        while b > 0 && x <= e[b] {
            b -= 1;
        }
        while b + 1 < n_b && x > e[b + 1] {
            b += 1;
        }
        b
    }
}

/// Fits uniform bin edges per direction from `(min, max)` of its training
/// projections, widened by `pad` times the range on both sides. A zero range
/// becomes an interval of half-width `max(1e−9, 1e−9·|v|)` around the value.
pub fn fit_grid_from_ranges(ranges: &[(f64, f64)], n_b: usize, pad: f64) -> Result<HistogramGrid> {
    if n_b < 2 {
        return Err(Error::config("the number of bins must be at least 2"));
    }
    if !(pad >= 0.0 && pad.is_finite()) {
        return Err(Error::config("grid padding must be a non-negative fraction"));
    }
    let mut edges = Matrix::zeros(ranges.len(), n_b + 1);
    for (p, &(min, max)) in ranges.iter().enumerate() {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::invalid(format!("direction {p} has no finite training range")));
        }
        let range = max - min;
        let (lo, hi) = if range > 0.0 {
            (min - pad * range, max + pad * range)
        } else {
            let eps = 1e-9f64.max(1e-9 * min.abs());
            (min - eps, min + eps)
        };
        let row = edges.row_mut(p);
        for (i, e) in row.iter_mut().enumerate() {
            *e = lo + (hi - lo) * i as f64 / n_b as f64;
        }
        row[n_b] = hi;
    }
    HistogramGrid::from_edges(edges)
}

/// Fits a grid from the raw per-direction training projection values.
pub fn fit_grid(projections: &[Vec<f64>], n_b: usize, pad: f64) -> Result<HistogramGrid> {
    let ranges = projections
        .iter()
        .enumerate()
        .map(|(p, values)| {
            if values.is_empty() {
                return Err(Error::invalid(format!("direction {p} has no training values")));
            }
            Ok(values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))))
        })
        .collect::<Result<Vec<_>>>()?;
    fit_grid_from_ranges(&ranges, n_b, pad)
}

/// Per-direction `(min, max)` of the projections of several feature matrices.
pub fn projection_ranges(features: &[PointFeatureMatrix], dirs: &DirectionSet) -> Result<Vec<(f64, f64)>> {
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); dirs.len()];
    for f in features {
        let proj = project(f, dirs)?;
        for (p, r) in ranges.iter_mut().enumerate() {
            for &v in proj.row(p) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
    }
    Ok(ranges)
}

/// `N_P × N_B` histogram CDF samples; entry `(p, b)` is the fraction of
/// projected points at or below the right edge of bin `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrFeatures {
    n_p: usize,
    n_b: usize,
    values: Vec<f64>,
}

impl CrFeatures {
    pub fn from_vec(n_p: usize, n_b: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_p * n_b {
            return Err(Error::Dimension { expected: n_p * n_b, found: values.len() });
        }
        Ok(Self { n_p, n_b, values })
    }

    pub fn projections(&self) -> usize {
        self.n_p
    }

    pub fn bins(&self) -> usize {
        self.n_b
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.values[p * self.n_b..(p + 1) * self.n_b]
    }

    /// Flattened row-major feature vector of length `N_P · N_B`.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Histogram masses (first differences of the CDF row).
    pub fn pdf_row(&self, p: usize) -> Vec<f64> {
        let row = self.row(p);
        let mut prev = 0.0;
        row.iter()
            .map(|&c| {
                let m = c - prev;
                prev = c;
                m
            })
            .collect()
    }
}

/// Cumulative Radon features of one series.
pub fn cumulative_radon(
    features: &PointFeatureMatrix,
    dirs: &DirectionSet,
    grid: &HistogramGrid,
) -> Result<CrFeatures> {
    if features.rows() == 0 {
        return Err(Error::invalid("cannot build features of an empty series"));
    }
    if grid.directions() != dirs.len() {
        return Err(Error::Dimension { expected: dirs.len(), found: grid.directions() });
    }
    let proj = project(features, dirs)?;
    let n_b = grid.bins();
    let total = features.rows() as f64;
    let mut values = vec![0.0; dirs.len() * n_b];
    let mut counts = vec![0usize; n_b];
    for p in 0..dirs.len() {
        counts.iter_mut().for_each(|c| *c = 0);
        for &x in proj.row(p) {
            counts[grid.bin_of(p, x)] += 1;
        }
        let mut cum = 0usize;
        for (b, c) in counts.iter().enumerate() {
            cum += c;
            values[p * n_b + b] = cum as f64 / total;
        }
    }
    CrFeatures::from_vec(dirs.len(), n_b, values)
}
