//! Point-anomaly scoring by next-value prediction.
//!
//! The trailing context `[t − L_c, t)` of each position is summarised by its
//! cumulative Radon features and a ridge regressor predicts `X_t` from them.
//! The anomaly score is the absolute prediction error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::TimeSeries;
use crate::detector::{FeaturePipeline, RadonConfig};
use crate::error::{Error, Result};
use crate::features::WindowConfig;
use crate::linalg::{center_rows, dot, gram_columns, gram_rows, SymmetricEigen};

pub const DEFAULT_CONTEXT_LEN: usize = 20;
/// Default ridge strength relative to the mean diagonal of the centered Gram matrix.
pub const DEFAULT_RIDGE_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRegressor {
    pub pipeline: FeaturePipeline,
    /// Feature weights followed by the intercept (length `D + 1`).
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub context_len: usize,
}

/// Per-position scores; positions before `scored_from` have no context and
/// are reported as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointScores {
    pub scores: Vec<f64>,
    pub scored_from: usize,
}

fn check_univariate(series: &TimeSeries, context_len: usize) -> Result<()> {
    if series.channels() != 1 {
        return Err(Error::invalid("the point regressor needs univariate series"));
    }
    if series.len() <= context_len {
        return Err(Error::invalid(format!(
            "series `{}` (length {}) must be longer than the context length {context_len}",
            series.id(),
            series.len()
        )));
    }
    Ok(())
}

/// Trailing contexts and next-value targets of one series.
fn contexts(series: &TimeSeries, context_len: usize) -> Result<(Vec<TimeSeries>, Vec<f64>)> {
    let mut windows = Vec::with_capacity(series.len() - context_len);
    let mut targets = Vec::with_capacity(series.len() - context_len);
    for t in context_len..series.len() {
        windows.push(series.slice(t - context_len, context_len)?);
        targets.push(series.get(t, 0));
    }
    Ok((windows, targets))
}

impl PointRegressor {
    /// Fits on normal univariate training series. `lambda = None` selects
    /// `DEFAULT_RIDGE_SCALE · trace(XᵀX) / D` on the centered design.
    pub fn fit(
        train: &[TimeSeries],
        window: &WindowConfig,
        radon: &RadonConfig,
        context_len: usize,
        lambda: Option<f64>,
    ) -> Result<Self> {
        if context_len == 0 {
            return Err(Error::config("context length must be at least 1"));
        }
        if train.is_empty() {
            return Err(Error::invalid("no training series"));
        }
        let mut windows = Vec::new();
        let mut targets = Vec::new();
        for s in train {
            check_univariate(s, context_len)?;
            let (w, y) = contexts(s, context_len)?;
            windows.extend(w);
            targets.extend(y);
        }
        let pipeline = FeaturePipeline::fit(&windows, window, radon)?;
        let features: Vec<Vec<f64>> = pipeline.transform_many(&windows)?.into_iter().map(|f| f.into_vec()).collect();
        let (coef, intercept, lambda) = ridge(&features, &targets, lambda)?;
        let mut weights = coef;
        weights.push(intercept);
        Ok(Self { pipeline, weights, lambda, context_len })
    }

    pub fn intercept(&self) -> f64 {
        self.weights[self.weights.len() - 1]
    }

    /// Predicted value following the context window.
    pub fn predict(&self, context: &TimeSeries) -> Result<f64> {
        let x = self.pipeline.transform(context)?.into_vec();
        let d = self.weights.len() - 1;
        Ok(dot(&self.weights[..d], &x) + self.weights[d])
    }

    pub fn score_points(&self, series: &TimeSeries) -> Result<PointScores> {
        check_univariate(series, self.context_len)?;
        let l = self.context_len;
        let tail = (l..series.len())
            .into_par_iter()
            .map(|t| {
                let pred = self.predict(&series.slice(t - l, l)?)?;
                Ok((pred - series.get(t, 0)).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut scores = vec![0.0; l];
        scores.extend(tail);
        Ok(PointScores { scores, scored_from: l })
    }
}

/// Ridge regression with an unpenalized intercept. Returns
/// `(weights, intercept, lambda used)`.
///
/// Solved through the eigendecomposition of whichever of `XᵀX` (D × D) or
/// `XXᵀ` (N × N) is smaller; the two give the same solution. Directions with
/// zero curvature and zero penalty are dropped (pseudo-inverse).
pub fn ridge<V: AsRef<[f64]>>(x: &[V], y: &[f64], lambda: Option<f64>) -> Result<(Vec<f64>, f64, f64)> {
    let n = x.len();
    if n == 0 || n != y.len() {
        return Err(Error::Dimension { expected: n, found: y.len() });
    }
    let dim = x[0].as_ref().len();
    let rows: Vec<&[f64]> = x.iter().map(AsRef::as_ref).collect();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::invalid("ragged design matrix"));
    }
    let (x_mean, xc) = center_rows(&rows, dim);
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let trace: f64 = xc.as_slice().iter().map(|v| v * v).sum();
    let lambda = match lambda {
        Some(l) if l >= 0.0 && l.is_finite() => l,
        Some(l) => return Err(Error::config(format!("invalid ridge lambda {l}"))),
        None => DEFAULT_RIDGE_SCALE * trace / dim.max(1) as f64,
    };

    let weights = if n <= dim {
        // w = Xᵀ (XXᵀ + λI)⁻¹ y
        let g = gram_rows(&xc);
        let eig = SymmetricEigen::new(&g)?;
        let alpha = spectral_solve(&eig, &yc, lambda);
        let mut w = vec![0.0; dim];
        for (i, a) in alpha.iter().enumerate() {
            for (wj, xj) in w.iter_mut().zip(xc.row(i)) {
                *wj += a * xj;
            }
        }
        w
    } else {
        // w = (XᵀX + λI)⁻¹ Xᵀ y
        let a = gram_columns(&xc);
        let eig = SymmetricEigen::new(&a)?;
        let xty = xc.transpose().matvec(&yc)?;
        spectral_solve(&eig, &xty, lambda)
    };
    let intercept = y_mean - dot(&weights, &x_mean);
    Ok((weights, intercept, lambda))
}

/// `(A + λI)⁺ b` from the eigendecomposition of `A`.
fn spectral_solve(eig: &SymmetricEigen, b: &[f64], lambda: f64) -> Vec<f64> {
    let top = eig.values.first().copied().unwrap_or(0.0).abs();
    let tol = top * eig.values.len() as f64 * f64::EPSILON;
    let mut out = vec![0.0; b.len()];
    for (k, &value) in eig.values.iter().enumerate() {
        let denom = value.max(0.0) + lambda;
        if denom <= tol || denom <= 0.0 {
            continue;
        }
        let u = eig.vectors.row(k);
        let c = dot(u, b) / denom;
        for (o, ui) in out.iter_mut().zip(u) {
            *o += c * ui;
        }
    }
    out
}
