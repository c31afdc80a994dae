//! ZCA sphering of feature vectors with training statistics.
//!
//! The whitener is `W = (Σ + εI)^(−1/2)`, kept in eigen form
//! `W = U·diag(1/√(λ+ε))·Uᵀ + (I − UUᵀ)/√ε`, where `U` spans the
//! covariance's range. When there are fewer training vectors than
//! dimensions, the eigenpairs come from the smaller Gram matrix of the
//! centered samples, which yields the same nonzero spectrum exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{center_rows, dot, gram_columns, gram_rows, Matrix, SymmetricEigen};

/// Floor applied by the relative policy so that an all-zero covariance
/// (e.g. identical training series) still yields a finite whitener.
pub const MIN_RELATIVE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum EpsilonPolicy {
    /// `ε = max(scale · trace(Σ) / D, MIN_RELATIVE_EPSILON)`.
    Relative(f64),
    /// A fixed `ε ≥ 0`. Zero requires a full-rank covariance.
    Absolute(f64),
}

impl Default for EpsilonPolicy {
    fn default() -> Self {
        EpsilonPolicy::Relative(1e-6)
    }
}

impl EpsilonPolicy {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            EpsilonPolicy::Relative(v) | EpsilonPolicy::Absolute(v) => v,
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::config("epsilon must be a finite non-negative number"));
        }
        Ok(())
    }

    fn resolve(&self, trace: f64, dim: usize) -> f64 {
        match *self {
            EpsilonPolicy::Relative(scale) => (scale * trace / dim as f64).max(MIN_RELATIVE_EPSILON),
            EpsilonPolicy::Absolute(eps) => eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpheringModel {
    mean: Vec<f64>,
    /// Nonnegative covariance eigenvalues, descending.
    eigenvalues: Vec<f64>,
    /// One unit eigenvector per row.
    eigenvectors: Matrix,
    epsilon: f64,
}

impl SpheringModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    fn full_rank(&self) -> bool {
        self.eigenvalues.len() == self.dim()
    }

    fn complement_scale(&self) -> f64 {
        if self.full_rank() {
            0.0
        } else {
            1.0 / self.epsilon.sqrt()
        }
    }

    /// The covariance `Σ = U·diag(λ)·Uᵀ`.
    pub fn covariance(&self) -> Matrix {
        SymmetricEigen { values: self.eigenvalues.clone(), vectors: self.eigenvectors.clone() }.reconstruct()
    }

    /// Materializes the `D × D` whitener.
    pub fn whitener(&self) -> Matrix {
        let d = self.dim();
        let beta = self.complement_scale();
        let mut w = Matrix::identity(d);
        for i in 0..d {
            w[(i, i)] = beta;
        }
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let u = self.eigenvectors.row(k);
            let coef = 1.0 / (lambda + self.epsilon).sqrt() - beta;
            for i in 0..d {
                let ci = coef * u[i];
                for j in 0..d {
                    w[(i, j)] += ci * u[j];
                }
            }
        }
        w
    }

    /// `W · (x − μ)`.
    pub fn sphere(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: x.len() });
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(self.apply(&centered))
    }

    /// `W · v` for an already-centered vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let beta = self.complement_scale();
        let mut out: Vec<f64> = v.iter().map(|x| beta * x).collect();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let u = self.eigenvectors.row(k);
            let coef = (1.0 / (lambda + self.epsilon).sqrt() - beta) * dot(u, v);
            for (o, ui) in out.iter_mut().zip(u) {
                *o += coef * ui;
            }
        }
        out
    }
}

/// Fits the sphering model on the training feature vectors.
pub fn fit_sphering<V: AsRef<[f64]>>(train: &[V], policy: EpsilonPolicy) -> Result<SpheringModel> {
    policy.validate()?;
    let n = train.len();
    if n < 2 {
        return Err(Error::invalid(format!("sphering needs at least 2 training vectors, got {n}")));
    }
    let dim = train[0].as_ref().len();
    if dim == 0 {
        return Err(Error::invalid("empty feature vectors"));
    }
    let rows: Vec<&[f64]> = train.iter().map(AsRef::as_ref).collect();
    for r in &rows {
        if r.len() != dim {
            return Err(Error::Dimension { expected: dim, found: r.len() });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite training features"));
        }
    }
    let (mean, centered) = center_rows(&rows, dim);
    let denom = (n - 1) as f64;

    let (eigenvalues, eigenvectors) = if n - 1 < dim {
        let mut g = gram_rows(&centered);
        scale_in_place(&mut g, 1.0 / denom);
        let eig = SymmetricEigen::new(&g)?;
        let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        let tol = top * n as f64 * f64::EPSILON;
        let mut values = Vec::new();
        let mut vectors = Vec::new();
        for (k, &lambda) in eig.values.iter().enumerate() {
            if lambda <= tol || lambda <= 0.0 {
                break;
            }
            // u = Xᵀ v / √((n−1)λ)
            let v = eig.vectors.row(k);
            let mut u = vec![0.0; dim];
            for (i, &vi) in v.iter().enumerate() {
                for (uj, xj) in u.iter_mut().zip(centered.row(i)) {
                    *uj += vi * xj;
                }
            }
            let norm = dot(&u, &u).sqrt();
            u.iter_mut().for_each(|x| *x /= norm);
            values.push(lambda);
            vectors.extend(u);
        }
        let rank = values.len();
        (values, Matrix::from_vec(rank, dim, vectors)?)
    } else {
        let mut cov = gram_columns(&centered);
        scale_in_place(&mut cov, 1.0 / denom);
        let eig = SymmetricEigen::new(&cov)?;
        let values = eig.values.iter().map(|&l| l.max(0.0)).collect();
        (values, eig.vectors)
    };

    let trace: f64 = eigenvalues.iter().sum();
    let epsilon = policy.resolve(trace, dim);
    let full_rank = eigenvalues.len() == dim;
    if epsilon == 0.0 && (!full_rank || eigenvalues.contains(&0.0)) {
        return Err(Error::invalid("training covariance is singular; sphering needs epsilon > 0"));
    }
    Ok(SpheringModel { mean, eigenvalues, eigenvectors, epsilon })
}

fn scale_in_place(m: &mut Matrix, s: f64) {
    for i in 0..m.rows() {
        m.row_mut(i).iter_mut().for_each(|v| *v *= s);
    }
}
