//! Per-point window features.
//!
//! Each time step is described by the raw values of a window of `2w + 1`
//! samples around it, gathered at one or more dyadic strides, concatenated
//! over resolutions and then channels. The rows of the resulting matrix are
//! the samples of the series' empirical feature distribution.

use serde::{Deserialize, Serialize};

use crate::data::TimeSeries;
use crate::error::{Error, Result};

/// How many window resolutions to use. Serialized as `"auto"` or a count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ResolutionsRepr", into = "ResolutionsRepr")]
pub enum Resolutions {
    /// As many as fit in the series: the largest `n` with `2·w·2^(n−1) + 1 ≤ T`.
    Auto,
    Fixed(usize),
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ResolutionsRepr {
    Count(usize),
    Name(String),
}

impl TryFrom<ResolutionsRepr> for Resolutions {
    type Error = String;

    fn try_from(r: ResolutionsRepr) -> std::result::Result<Self, String> {
        match r {
            ResolutionsRepr::Count(n) => Ok(Resolutions::Fixed(n)),
            ResolutionsRepr::Name(s) if s.eq_ignore_ascii_case("auto") => Ok(Resolutions::Auto),
            ResolutionsRepr::Name(s) => s
                .parse()
                .map(Resolutions::Fixed)
                .map_err(|_| format!("resolutions must be \"auto\" or a count, got `{s}`")),
        }
    }
}

impl From<Resolutions> for ResolutionsRepr {
    fn from(r: Resolutions) -> Self {
        match r {
            Resolutions::Auto => ResolutionsRepr::Name("auto".into()),
            Resolutions::Fixed(n) => ResolutionsRepr::Count(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Replicate the edge value.
    #[default]
    Clamp,
    /// Mirror about the edge sample, without repeating it.
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub half_width: usize,
    pub resolutions: Resolutions,
    pub boundary: Boundary,
    /// Per-channel z-normalization of each series before windowing.
    #[serde(default)]
    pub znorm: bool,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { half_width: 4, resolutions: Resolutions::Auto, boundary: Boundary::Clamp, znorm: false }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolutions == Resolutions::Fixed(0) {
            return Err(Error::config("the number of resolutions must be at least 1"));
        }
        Ok(())
    }

    /// Number of resolutions used for a series of length `len`.
    pub fn resolutions_for(&self, len: usize) -> usize {
        match self.resolutions {
            Resolutions::Fixed(n) => n,
            Resolutions::Auto => auto_resolutions(self.half_width, len),
        }
    }

    /// Pins `Auto` to a concrete count, so every series shares one feature layout.
    pub fn resolve(&self, len: usize) -> WindowConfig {
        WindowConfig { resolutions: Resolutions::Fixed(self.resolutions_for(len)), ..*self }
    }

    /// `(2w + 1) · N_r · d`; `None` while resolutions are still `Auto`.
    pub fn feature_dim(&self, channels: usize) -> Option<usize> {
        match self.resolutions {
            Resolutions::Fixed(n) => Some((2 * self.half_width + 1) * n * channels),
            Resolutions::Auto => None,
        }
    }
}

fn auto_resolutions(half_width: usize, len: usize) -> usize {
    if half_width == 0 {
        return 1;
    }
    let mut n = 1;
    // span of resolution n+1 is 2·w·2^n + 1
    while n < 62 && 2 * half_width * (1usize << n) < len {
        n += 1;
    }
    n
}

/// `T × d_f` matrix of point features, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFeatureMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl PointFeatureMatrix {
    pub fn from_rows(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::Dimension { expected: rows * dim, found: data.len() });
        }
        Ok(Self { rows, dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }
}

fn boundary_index(idx: isize, len: usize, boundary: Boundary) -> usize {
    let n = len as isize;
    match boundary {
        Boundary::Clamp => idx.clamp(0, n - 1) as usize,
        Boundary::Reflect => {
            if n == 1 {
                return 0;
            }
            let period = 2 * (n - 1);
            let m = idx.rem_euclid(period);
            (if m < n { m } else { period - m }) as usize
        }
    }
}

fn znormalized(series: &TimeSeries) -> Vec<f64> {
    let (t, d) = (series.len(), series.channels());
    let mut out = series.values().to_vec();
    for c in 0..d {
        let mean = (0..t).map(|i| series.get(i, c)).sum::<f64>() / t as f64;
        let var = (0..t).map(|i| (series.get(i, c) - mean).powi(2)).sum::<f64>() / t as f64;
        let sd = var.sqrt();
        for i in 0..t {
            out[i * d + c] = if sd > 0.0 { (series.get(i, c) - mean) / sd } else { 0.0 };
        }
    }
    out
}

/// Extracts the point feature matrix of `series`.
///
/// At resolution `r` (stride `2^r`) the window of point `t` gathers indices
/// `t + k·2^r` for `k ∈ −w..=w`, mapped back into range per `cfg.boundary`.
pub fn extract_point_features(series: &TimeSeries, cfg: &WindowConfig) -> PointFeatureMatrix {
    let (len, channels) = (series.len(), series.channels());
    let n_res = cfg.resolutions_for(len);
    let w = cfg.half_width as isize;
    let width = 2 * cfg.half_width + 1;
    let dim = width * n_res * channels;

    let normalized;
    let values: &[f64] = if cfg.znorm {
        normalized = znormalized(series);
        &normalized
    } else {
        series.values()
    };

    let mut data = Vec::with_capacity(len * dim);
    for t in 0..len as isize {
        for r in 0..n_res {
            let stride = 1isize << r;
            for c in 0..channels {
                for k in -w..=w {
                    let idx = boundary_index(t + k * stride, len, cfg.boundary);
                    data.push(values[idx * channels + c]);
                }
            }
        }
    }
    PointFeatureMatrix { rows: len, dim, data }
}
