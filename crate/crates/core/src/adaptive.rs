//! Adaptive truncation of the latent dimension.
//!
//! After iteration t̄ the sampler flips a coin with success probability
//! exp(η₀ + η₁ t). On success it counts the slab columns K* and either drops
//! the surplus spike columns or, when every column that can be active is
//! active, appends a fresh spike column.

use nalgebra::DMatrix;

use crate::coss::{cumulative_spike_probs, stick_breaking_weights};
use crate::distributions::{sample_beta, standard_normal};
use crate::error::{Error, Result};
use crate::model::{ModelState, PriorConfig};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptationSchedule {
    pub eta0: f64,
    pub eta1: f64,
    /// No adaptation at or before this iteration (t̄).
    pub start: usize,
}

impl Default for AdaptationSchedule {
    fn default() -> Self {
        Self {
            eta0: -1.0,
            eta1: -5e-4,
            start: 500,
        }
    }
}

impl AdaptationSchedule {
    pub fn validate(&self) -> Result<()> {
        if !self.eta0.is_finite() || !self.eta1.is_finite() {
            return Err(Error::Config("eta0 and eta1 must be finite".into()));
        }
        if self.eta1 > 0.0 {
            return Err(Error::Config(format!(
                "eta1 must be nonpositive for diminishing adaptation, got {}",
                self.eta1
            )));
        }
        Ok(())
    }

    pub fn probability(&self, t: usize) -> f64 {
        (self.eta0 + self.eta1 * t as f64).exp().min(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adaptation {
    /// The coin did not fire.
    Skipped,
    /// The coin fired but k was already right.
    Unchanged,
    Expanded { from: usize, to: usize },
    Contracted { from: usize, to: usize },
}

/// Adaptation step for iteration `t` (1-based).
pub fn maybe_adapt(
    state: &mut ModelState,
    t: usize,
    schedule: &AdaptationSchedule,
    prior: &PriorConfig,
    rng: &mut RngStream,
) -> Result<Adaptation> {
    if t <= schedule.start {
        return Ok(Adaptation::Skipped);
    }
    if rng.uniform() >= schedule.probability(t) {
        return Ok(Adaptation::Skipped);
    }
    adapt_truncation(state, prior, rng)
}

/// Expansion or contraction given the current indicators, without the coin.
///
/// The last column always satisfies ρ_k ≤ k, so at most k − 1 columns can be
/// active; the sampler expands once that many are.
pub fn adapt_truncation(state: &mut ModelState, prior: &PriorConfig, rng: &mut RngStream) -> Result<Adaptation> {
    let k = state.k();
    let kstar = state.shrinkage.active_dimension();
    if kstar + 1 >= k {
        expand(state, prior, rng)?;
        Ok(Adaptation::Expanded { from: k, to: k + 1 })
    } else {
        contract(state)?;
        Ok(Adaptation::Contracted {
            from: k,
            to: kstar + 1,
        })
    }
}

fn expand(state: &mut ModelState, prior: &PriorConfig, rng: &mut RngStream) -> Result<()> {
    let k = state.k();
    let n = state.z.nrows();
    let q = state.b.nrows();
    let sd_spike = prior.theta0.sqrt();
    let z_col: Vec<f64> = (0..n).map(|_| sd_spike * standard_normal(rng)).collect();
    let b_col: Vec<f64> = (0..q).map(|_| prior.sigma_b * standard_normal(rng)).collect();
    state.z = append_column(&state.z, &z_col);
    state.b = append_column(&state.b, &b_col);

    let sh = &mut state.shrinkage;
    let shape = if k == 1 { prior.kappa } else { prior.a_stick };
    sh.v[k - 1] = sample_beta(shape, 1.0, rng)?;
    sh.v.push(1.0);
    sh.theta.push(prior.theta0);
    sh.rho.push(k + 1);
    sh.omega = stick_breaking_weights(&sh.v)?;
    sh.pi = cumulative_spike_probs(&sh.omega);
    Ok(())
}

fn contract(state: &mut ModelState) -> Result<()> {
    let sh = &state.shrinkage;
    let k = sh.k();
    let active: Vec<usize> = (0..k).filter(|&h| sh.rho[h] > h + 1).collect();
    let spare = (0..k)
        .find(|&h| sh.rho[h] <= h + 1)
        .expect("the last column is never active");
    let mut keep = active;
    keep.push(spare);
    let k_new = keep.len();

    state.z = state.z.select_columns(&keep);
    state.b = state.b.select_columns(&keep);
    let sh = &mut state.shrinkage;
    let mut v: Vec<f64> = keep.iter().map(|&h| sh.v[h]).collect();
    v[k_new - 1] = 1.0;
    sh.theta = keep.iter().map(|&h| sh.theta[h]).collect();
    sh.rho = keep.iter().map(|&h| sh.rho[h].min(k_new)).collect();
    sh.omega = stick_breaking_weights(&v)?;
    sh.pi = cumulative_spike_probs(&sh.omega);
    sh.v = v;
    Ok(())
}

fn append_column(m: &DMatrix<f64>, col: &[f64]) -> DMatrix<f64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(r, c + 1, |i, h| if h < c { m[(i, h)] } else { col[i] })
}
