use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::rng::RngStream;

use super::standard_normal;

const JITTER_BASE: f64 = 1e-10;
const JITTER_RETRIES: usize = 3;

/// Cholesky factor of a symmetric matrix, adding `ε·(tr/dim)·I` with
/// ε = 1e-10, 1e-9, 1e-8 when the plain factorization fails.
fn factor_with_jitter(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Ok(ch);
    }
    let dim = m.nrows();
    let scale = (m.trace() / dim as f64).abs().max(f64::MIN_POSITIVE);
    let mut eps = JITTER_BASE;
    for _ in 0..JITTER_RETRIES {
        let mut jittered = m.clone();
        for d in 0..dim {
            jittered[(d, d)] += eps * scale;
        }
        if let Some(ch) = Cholesky::new(jittered) {
            return Ok(ch);
        }
        eps *= 10.0;
    }
    Err(Error::Factorization {
        dim,
        jitter: eps / 10.0 * scale,
    })
}

/// Draw from N(mean, covariance).
pub fn sample_mvn(
    mean: &DVector<f64>,
    covariance: &DMatrix<f64>,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let dim = mean.len();
    if covariance.nrows() != dim || covariance.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "mean has length {dim} but covariance is {}x{}",
            covariance.nrows(),
            covariance.ncols()
        )));
    }
    if dim == 0 {
        return Ok(DVector::zeros(0));
    }
    let ch = factor_with_jitter(covariance)?;
    let eps = DVector::from_fn(dim, |_, _| standard_normal(rng));
    Ok(mean + ch.l() * eps)
}

/// Draw from N(P⁻¹ b, P⁻¹) given precision P and linear term b.
pub fn sample_mvn_precision(
    precision: &DMatrix<f64>,
    linear: &DVector<f64>,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    GaussianConditional::new(precision.clone(), linear.clone()).sample(rng)
}

/// A Gaussian full conditional in canonical form: density ∝
/// exp(-½ xᵀ P x + bᵀ x).
#[derive(Clone, Debug)]
pub struct GaussianConditional {
    pub precision: DMatrix<f64>,
    pub linear: DVector<f64>,
}

impl GaussianConditional {
    pub fn new(precision: DMatrix<f64>, linear: DVector<f64>) -> Self {
        Self { precision, linear }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn mean(&self) -> Result<DVector<f64>> {
        if self.dim() == 0 {
            return Ok(DVector::zeros(0));
        }
        let ch = factor_with_jitter(&self.precision)?;
        Ok(ch.solve(&self.linear))
    }

    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        if self.dim() == 0 {
            return Ok(DMatrix::zeros(0, 0));
        }
        Ok(factor_with_jitter(&self.precision)?.inverse())
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<DVector<f64>> {
        let dim = self.dim();
        if self.precision.nrows() != dim || self.precision.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "linear term has length {dim} but precision is {}x{}",
                self.precision.nrows(),
                self.precision.ncols()
            )));
        }
        if dim == 0 {
            return Ok(DVector::zeros(0));
        }
        let ch = factor_with_jitter(&self.precision)?;
        let mean = ch.solve(&self.linear);
        // x = mean + L⁻ᵀ ε has covariance (L Lᵀ)⁻¹
        let eps = DVector::from_fn(dim, |_, _| standard_normal(rng));
        let offset = ch
            .l()
            .transpose()
            .solve_upper_triangular(&eps)
            .expect("cholesky factor has a positive diagonal");
        Ok(mean + offset)
    }
}
