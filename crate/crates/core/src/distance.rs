//! Distances between feature vectors of two series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radon::{CrFeatures, HistogramGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    L1,
    /// Euclidean norm.
    #[default]
    L2,
    /// Squared Euclidean norm.
    L2Squared,
    /// Sliced Wasserstein-1 from histogram CDFs.
    Swd1,
    /// Sliced Wasserstein-2 from histogram CDFs.
    Swd2,
}

impl DistanceKind {
    /// SWD kinds read per-direction CDF structure, which sphering destroys.
    pub fn needs_raw_features(self) -> bool {
        matches!(self, DistanceKind::Swd1 | DistanceKind::Swd2)
    }
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "l1" => Ok(Self::L1),
            "l2" => Ok(Self::L2),
            "l2_squared" | "l2sq" => Ok(Self::L2Squared),
            "swd1" | "swd_1" => Ok(Self::Swd1),
            "swd2" | "swd_2" => Ok(Self::Swd2),
            other => Err(Error::config(format!("unknown distance `{other}`"))),
        }
    }
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension { expected: a.len(), found: b.len() });
    }
    Ok(())
}

pub fn dist_l1(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

pub fn dist_l2_squared(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

pub fn dist_l2(a: &[f64], b: &[f64]) -> Result<f64> {
    dist_l2_squared(a, b).map(f64::sqrt)
}

fn check_grid(a: &[f64], b: &[f64], grid: &HistogramGrid) -> Result<()> {
    check_len(a, b)?;
    let expected = grid.directions() * grid.bins();
    if a.len() != expected {
        return Err(Error::Dimension { expected, found: a.len() });
    }
    Ok(())
}

/// `Σ_θ Σ_b |J_a − J_b| · Δ_θ` over flattened CDF rows.
pub fn swd1_flat(a: &[f64], b: &[f64], grid: &HistogramGrid) -> Result<f64> {
    check_grid(a, b, grid)?;
    let n_b = grid.bins();
    let mut total = 0.0;
    for p in 0..grid.directions() {
        let row: f64 =
            a[p * n_b..(p + 1) * n_b].iter().zip(&b[p * n_b..(p + 1) * n_b]).map(|(x, y)| (x - y).abs()).sum();
        total += row * grid.bin_width(p);
    }
    Ok(total)
}

/// Sliced Wasserstein-2 over flattened CDF rows.
///
/// Each CDF row is read as a piecewise-linear CDF through `(e_0, 0)` and
/// `(e_{b+1}, J[b])`, i.e. histogram mass spread uniformly within its bin.
/// The transport threshold `s(t) = J_a⁻¹(J_b(t))` then gives
/// `W2² = ∫₀¹ (J_a⁻¹(q) − J_b⁻¹(q))² dq`, integrated exactly over the merged
/// CDF levels of both rows. Flat CDF runs invert to their left edge.
/// Returns `√(Σ_θ W2²(θ))`.
pub fn swd2_flat(a: &[f64], b: &[f64], grid: &HistogramGrid) -> Result<f64> {
    check_grid(a, b, grid)?;
    let n_b = grid.bins();
    let mut total = 0.0;
    let mut levels_a = vec![0.0; n_b + 1];
    let mut levels_b = vec![0.0; n_b + 1];
    let mut merged = Vec::with_capacity(2 * n_b + 2);
    for p in 0..grid.directions() {
        let edges = grid.edges(p);
        levels_a[1..].copy_from_slice(&a[p * n_b..(p + 1) * n_b]);
        levels_b[1..].copy_from_slice(&b[p * n_b..(p + 1) * n_b]);
        merged.clear();
        merged.extend_from_slice(&levels_a);
        merged.extend_from_slice(&levels_b);
        merged.sort_by(f64::total_cmp);
        merged.dedup();
        total += quantile_gap_squared(&levels_a, &levels_b, &merged, edges);
    }
    Ok(total.sqrt())
}

fn quantile_gap_squared(la: &[f64], lb: &[f64], merged: &[f64], edges: &[f64]) -> f64 {
    let last = la.len() - 1;
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut acc = 0.0;
    for w in merged.windows(2) {
        let (q0, q1) = (w[0], w[1]);
        if !(q1 > q0) {
            continue;
        }
        let mid = 0.5 * (q0 + q1);
        while ia + 1 < last && la[ia + 1] <= mid {
            ia += 1;
        }
        while ib + 1 < last && lb[ib + 1] <= mid {
            ib += 1;
        }
        let qa = |q: f64| segment_inverse(la, edges, ia, q);
        let qb = |q: f64| segment_inverse(lb, edges, ib, q);
        let d0 = qa(q0) - qb(q0);
        let d1 = qa(q1) - qb(q1);
        acc += (q1 - q0) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
    }
    acc
}

/// Inverse of the linear CDF piece on bin `i` evaluated at level `q`.
#[inline]
fn segment_inverse(levels: &[f64], edges: &[f64], i: usize, q: f64) -> f64 {
    let (l0, l1) = (levels[i], levels[i + 1]);
    if l1 > l0 {
        edges[i] + (q - l0) / (l1 - l0) * (edges[i + 1] - edges[i])
    } else {
        edges[i]
    }
}

pub fn dist_swd1(a: &CrFeatures, b: &CrFeatures, grid: &HistogramGrid) -> Result<f64> {
    check_shape(a, b, grid)?;
    swd1_flat(a.as_slice(), b.as_slice(), grid)
}

pub fn dist_swd2(a: &CrFeatures, b: &CrFeatures, grid: &HistogramGrid) -> Result<f64> {
    check_shape(a, b, grid)?;
    swd2_flat(a.as_slice(), b.as_slice(), grid)
}

fn check_shape(a: &CrFeatures, b: &CrFeatures, grid: &HistogramGrid) -> Result<()> {
    for f in [a, b] {
        if f.projections() != grid.directions() || f.bins() != grid.bins() {
            return Err(Error::invalid(format!(
                "features of shape {}×{} do not match a {}×{} grid",
                f.projections(),
                f.bins(),
                grid.directions(),
                grid.bins()
            )));
        }
    }
    Ok(())
}

/// Dispatches on `kind`; SWD kinds need the grid the vectors were built with.
pub fn distance(kind: DistanceKind, a: &[f64], b: &[f64], grid: Option<&HistogramGrid>) -> Result<f64> {
    match kind {
        DistanceKind::L1 => dist_l1(a, b),
        DistanceKind::L2 => dist_l2(a, b),
        DistanceKind::L2Squared => dist_l2_squared(a, b),
        DistanceKind::Swd1 | DistanceKind::Swd2 => {
            let grid = grid.ok_or_else(|| Error::config("SWD distances need a histogram grid"))?;
            if kind == DistanceKind::Swd1 {
                swd1_flat(a, b, grid)
            } else {
                swd2_flat(a, b, grid)
            }
        }
    }
}
