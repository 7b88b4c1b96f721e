//! Synthetic datasets with known parameters.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Uniform};

use crate::coss::ShrinkageState;
use crate::distributions::{logistic, sample_inverse_gamma, standard_normal};
use crate::error::{Error, Result};
use crate::model::{
    natural_params_attributes, natural_params_network, Dataset, Family, ModelState, PriorConfig,
};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq)]
pub struct SimDesign {
    pub n: usize,
    pub q: usize,
    pub k0: usize,
    pub family: Family,
    pub alpha_range: (f64, f64),
    pub loading_range: (f64, f64),
    /// Residual standard deviation of Gaussian attributes.
    pub noise_sd: f64,
}

impl SimDesign {
    /// k₀ = 3, α ~ U[−0.5, 0.5], loadings U[0.25, 1.25], unit noise.
    pub fn study1(n: usize, q: usize, family: Family) -> Self {
        Self {
            n,
            q,
            k0: 3,
            family,
            alpha_range: (-0.5, 0.5),
            loading_range: (0.25, 1.25),
            noise_sd: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if self.k0 == 0 {
            return Err(Error::Config("k0 must be at least 1".into()));
        }
        let (lo, hi) = self.alpha_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!("bad alpha range [{lo}, {hi}]")));
        }
        let (lo, hi) = self.loading_range;
        if !(lo > 0.0 && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!("bad loading range [{lo}, {hi}]")));
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Config(format!("noise_sd must be positive, got {}", self.noise_sd)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub alpha0: DVector<f64>,
    pub gamma0: DVector<f64>,
    pub z0: DMatrix<f64>,
    pub b0: DMatrix<f64>,
    pub density: f64,
}

fn uniform(range: (f64, f64), rng: &mut RngStream) -> f64 {
    if range.0 == range.1 {
        return range.0;
    }
    Uniform::new(range.0, range.1)
        .expect("validated range")
        .sample(rng)
}

/// Draws parameters and data for one replication.
///
/// Row j of B₀ has its single nonzero entry in column j mod k₀.
pub fn generate_dataset(design: &SimDesign, rng: &mut RngStream) -> Result<(Dataset, GroundTruth)> {
    design.validate()?;
    let (n, q, k0) = (design.n, design.q, design.k0);
    let alpha0 = DVector::from_fn(n, |_, _| uniform(design.alpha_range, rng));
    let gamma0 = DVector::from_fn(q, |_, _| standard_normal(rng));
    let z0 = DMatrix::from_fn(n, k0, |_, _| standard_normal(rng));
    let mut b0 = DMatrix::zeros(q, k0);
    for j in 0..q {
        b0[(j, j % k0)] = uniform(design.loading_range, rng);
    }

    let theta_a = natural_params_network(&alpha0, &z0)?;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.uniform() < logistic(theta_a[(i, j)]) {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }

    let theta_y = natural_params_attributes(&gamma0, &z0, &b0)?;
    let y = DMatrix::from_fn(n, q, |i, j| match design.family {
        Family::Gaussian => theta_y[(i, j)] + design.noise_sd * standard_normal(rng),
        Family::Bernoulli => {
            if rng.uniform() < logistic(theta_y[(i, j)]) {
                1.0
            } else {
                0.0
            }
        }
    });
    let density = network_density(&a);
    let data = Dataset::complete(a, y, design.family)?;
    Ok((
        data,
        GroundTruth {
            alpha0,
            gamma0,
            z0,
            b0,
            density,
        },
    ))
}

/// Draws every parameter from its prior at truncation `k`. With `fixed`
/// the latent variances are θ ≡ 1 instead of a COSS draw.
pub fn draw_prior_state(
    n: usize,
    q: usize,
    k: usize,
    family: Family,
    prior: &PriorConfig,
    fixed: bool,
    rng: &mut RngStream,
) -> Result<ModelState> {
    let shrinkage = if fixed {
        ShrinkageState::fixed_unit(k)
    } else {
        ShrinkageState::from_prior(k, prior, rng)?
    };
    let alpha = DVector::from_fn(n, |_, _| prior.sigma_alpha * standard_normal(rng));
    let gamma = DVector::from_fn(q, |_, _| prior.sigma_gamma * standard_normal(rng));
    let z = DMatrix::from_fn(n, k, |_, h| shrinkage.theta[h].sqrt() * standard_normal(rng));
    let b = DMatrix::from_fn(q, k, |_, _| prior.sigma_b * standard_normal(rng));
    let sigma2 = match family {
        Family::Gaussian => {
            let mut v = DVector::zeros(q);
            for j in 0..q {
                v[j] = sample_inverse_gamma(prior.a_sigma, prior.b_sigma, rng)?;
            }
            v
        }
        Family::Bernoulli => DVector::zeros(0),
    };
    Ok(ModelState {
        alpha,
        gamma,
        z,
        b,
        sigma2,
        aug_a: DMatrix::from_element(n, n, 0.25),
        aug_y: match family {
            Family::Bernoulli => DMatrix::from_element(n, q, 0.25),
            Family::Gaussian => DMatrix::zeros(0, 0),
        },
        shrinkage,
        imputed: None,
    })
}

/// Draws a network and complete attributes from the likelihood at `state`.
pub fn draw_data(state: &ModelState, family: Family, rng: &mut RngStream) -> Result<Dataset> {
    let n = state.alpha.len();
    let q = state.gamma.len();
    let theta_a = natural_params_network(&state.alpha, &state.z)?;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.uniform() < logistic(theta_a[(i, j)]) {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    let theta_y = natural_params_attributes(&state.gamma, &state.z, &state.b)?;
    let y = DMatrix::from_fn(n, q, |i, j| match family {
        Family::Gaussian => theta_y[(i, j)] + state.sigma2[j].sqrt() * standard_normal(rng),
        Family::Bernoulli => {
            if rng.uniform() < logistic(theta_y[(i, j)]) {
                1.0
            } else {
                0.0
            }
        }
    });
    Dataset::complete(a, y, family)
}

/// 2·#edges / (n(n−1)).
pub fn network_density(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n < 2 {
        return 0.0;
    }
    let mut edges = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            if a[(i, j)] != 0.0 {
                edges += 1;
            }
        }
    }
    2.0 * edges as f64 / (n * (n - 1)) as f64
}
