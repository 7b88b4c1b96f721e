//! Cumulative ordered spike-and-slab (COSS) prior on the column variances of
//! the latent positions.
//!
//! Column h has variance θ_h. A stick-breaking sequence v → ω gives spike
//! probabilities π_h = ω_1 + … + ω_h, and the auxiliary indicator ρ_h with
//! Pr(ρ_h = l) = ω_l puts column h in the spike (θ_h = θ₀) when ρ_h ≤ h and in
//! the inverse-gamma slab otherwise. Indices `h` and indicator values `ρ_h`
//! are 1-based throughout this module to match that convention.

use crate::distributions::{
    sample_beta, sample_inverse_gamma, slab_log_density_ss, spike_log_density_ss,
};
use crate::error::{Error, Result};
use crate::model::PriorConfig;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq)]
pub struct ShrinkageState {
    pub v: Vec<f64>,
    pub omega: Vec<f64>,
    pub pi: Vec<f64>,
    /// Indicator values in 1..=k.
    pub rho: Vec<usize>,
    pub theta: Vec<f64>,
}

impl ShrinkageState {
    /// Draws v, ρ and θ from the prior for truncation `k`.
    pub fn from_prior(k: usize, prior: &PriorConfig, rng: &mut RngStream) -> Result<Self> {
        let v = prior_sticks(k, prior, rng)?;
        let omega = stick_breaking_weights(&v)?;
        let pi = cumulative_spike_probs(&omega);
        let mut rho = Vec::with_capacity(k);
        let mut theta = Vec::with_capacity(k);
        for h in 1..=k {
            let r = sample_categorical(&omega, rng);
            theta.push(if r <= h {
                prior.theta0
            } else {
                sample_inverse_gamma(prior.a_theta, prior.b_theta, rng)?
            });
            rho.push(r);
        }
        Ok(Self {
            v,
            omega,
            pi,
            rho,
            theta,
        })
    }

    /// Every column but the last in the slab with unit variance; the last
    /// column is always a spike since π_k = 1.
    pub fn slab_start(k: usize, prior: &PriorConfig) -> Self {
        let mut v = vec![0.5; k];
        v[k - 1] = 1.0;
        let omega = stick_breaking_weights(&v).expect("valid sticks");
        let pi = cumulative_spike_probs(&omega);
        let rho = vec![k; k];
        let mut theta = vec![1.0; k];
        theta[k - 1] = prior.theta0;
        Self {
            v,
            omega,
            pi,
            rho,
            theta,
        }
    }

    /// Fixed-dimension configuration: unit variances that are never updated.
    pub fn fixed_unit(k: usize) -> Self {
        let mut v = vec![0.5; k];
        v[k - 1] = 1.0;
        let omega = stick_breaking_weights(&v).expect("valid sticks");
        let pi = cumulative_spike_probs(&omega);
        Self {
            v,
            omega,
            pi,
            rho: vec![k; k],
            theta: vec![1.0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }

    pub fn active_dimension(&self) -> usize {
        active_dimension(&self.rho)
    }

    /// Recomputes ω and π from v.
    pub fn refresh_weights(&mut self) -> Result<()> {
        self.omega = stick_breaking_weights(&self.v)?;
        self.pi = cumulative_spike_probs(&self.omega);
        Ok(())
    }

    /// One pass of the shrinkage updates given the current column sums of
    /// squares of Z: ρ for every column, then the sticks (and ω, π), then θ.
    pub fn update(
        &mut self,
        column_ss: &[f64],
        n: usize,
        prior: &PriorConfig,
        rng: &mut RngStream,
    ) -> Result<()> {
        let k = self.k();
        debug_assert_eq!(column_ss.len(), k);
        for h in 1..=k {
            let probs = rho_probabilities_ss(h, &self.omega, n, column_ss[h - 1], prior)?;
            self.rho[h - 1] = sample_categorical(&probs, rng);
        }
        self.v = sample_sticks(&self.rho, prior, rng)?;
        self.refresh_weights()?;
        for h in 1..=k {
            self.theta[h - 1] =
                sample_theta_ss(h, self.rho[h - 1], n, column_ss[h - 1], prior, rng)?;
        }
        Ok(())
    }
}

/// ω_l = v_l ∏_{m<l} (1 − v_m).
pub fn stick_breaking_weights(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Domain("stick-breaking needs at least one stick".into()));
    }
    if let Some(bad) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("stick proportion {bad} outside [0, 1]")));
    }
    if *v.last().unwrap() != 1.0 {
        return Err(Error::Domain("last stick proportion must be exactly 1".into()));
    }
    let mut remaining = 1.0;
    Ok(v.iter()
        .map(|&vl| {
            let w = vl * remaining;
            remaining *= 1.0 - vl;
            w
        })
        .collect())
}

/// Prefix sums of ω, with the final entry set to exactly 1.
pub fn cumulative_spike_probs(omega: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut pi: Vec<f64> = omega
        .iter()
        .map(|w| {
            acc += w;
            acc.min(1.0)
        })
        .collect();
    if let Some(last) = pi.last_mut() {
        *last = 1.0;
    }
    pi
}

/// K* = #{h : ρ_h > h}.
pub fn active_dimension(rho: &[usize]) -> usize {
    rho.iter()
        .enumerate()
        .filter(|(idx, &r)| r > idx + 1)
        .count()
}

/// Normalized full-conditional probabilities of ρ_h over 1..=k.
pub fn rho_probabilities(h: usize, omega: &[f64], z_col: &[f64], prior: &PriorConfig) -> Result<Vec<f64>> {
    let ss: f64 = z_col.iter().map(|x| x * x).sum();
    rho_probabilities_ss(h, omega, z_col.len(), ss, prior)
}

fn rho_probabilities_ss(
    h: usize,
    omega: &[f64],
    n: usize,
    ss: f64,
    prior: &PriorConfig,
) -> Result<Vec<f64>> {
    let spike = spike_log_density_ss(n, ss, prior.theta0);
    let slab = slab_log_density_ss(n, ss, prior.a_theta, prior.b_theta);
    let logw: Vec<f64> = omega
        .iter()
        .enumerate()
        .map(|(idx, &w)| {
            if w > 0.0 {
                w.ln() + if idx < h { spike } else { slab }
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Degenerate(format!(
            "all indicator weights vanish for column {h}"
        )));
    }
    let unnorm: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(unnorm.into_iter().map(|u| u / total).collect())
}

/// Draw ρ_h from its full conditional given column h of Z.
pub fn sample_rho(
    h: usize,
    omega: &[f64],
    z_col: &[f64],
    prior: &PriorConfig,
    rng: &mut RngStream,
) -> Result<usize> {
    let probs = rho_probabilities(h, omega, z_col, prior)?;
    Ok(sample_categorical(&probs, rng))
}

/// θ_h = θ₀ when ρ_h ≤ h; otherwise IG(a_θ + n/2, b_θ + ‖Z·h‖²/2).
pub fn sample_theta(
    h: usize,
    rho_h: usize,
    z_col: &[f64],
    prior: &PriorConfig,
    rng: &mut RngStream,
) -> Result<f64> {
    let ss: f64 = z_col.iter().map(|x| x * x).sum();
    sample_theta_ss(h, rho_h, z_col.len(), ss, prior, rng)
}

fn sample_theta_ss(
    h: usize,
    rho_h: usize,
    n: usize,
    ss: f64,
    prior: &PriorConfig,
    rng: &mut RngStream,
) -> Result<f64> {
    if rho_h <= h {
        Ok(prior.theta0)
    } else {
        sample_inverse_gamma(prior.a_theta + 0.5 * n as f64, prior.b_theta + 0.5 * ss, rng)
    }
}

/// Conditional draw of the stick proportions given the indicators. Returns
/// v with v_k = 1.
pub fn sample_sticks(rho: &[usize], prior: &PriorConfig, rng: &mut RngStream) -> Result<Vec<f64>> {
    let k = rho.len();
    let mut counts = vec![0usize; k + 2];
    for &r in rho {
        counts[r.min(k + 1)] += 1;
    }
    let mut above = k - counts[0].min(k);
    let mut v = Vec::with_capacity(k);
    for h in 1..k {
        above -= counts[h];
        let first = if h == 1 { prior.kappa } else { prior.a_stick };
        v.push(sample_beta(first + counts[h] as f64, 1.0 + above as f64, rng)?);
    }
    v.push(1.0);
    Ok(v)
}

fn prior_sticks(k: usize, prior: &PriorConfig, rng: &mut RngStream) -> Result<Vec<f64>> {
    let mut v = Vec::with_capacity(k);
    for h in 1..k {
        let a = if h == 1 { prior.kappa } else { prior.a_stick };
        v.push(sample_beta(a, 1.0, rng)?);
    }
    v.push(1.0);
    Ok(v)
}

/// Inverse-CDF draw of a 1-based category from normalized probabilities.
pub(crate) fn sample_categorical(probs: &[f64], rng: &mut RngStream) -> usize {
    let u = rng.uniform();
    let mut acc = 0.0;
    for (idx, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return idx + 1;
        }
    }
    // u landed in the rounding gap above the final partial sum
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .map(|idx| idx + 1)
        .unwrap_or(probs.len())
}

/// One forward draw of the prior: spike probabilities and column variances.
#[derive(Clone, Debug)]
pub struct PriorDraw {
    pub pi: Vec<f64>,
    pub theta: Vec<f64>,
}

impl PriorDraw {
    pub fn is_spike(&self, h: usize, theta0: f64) -> bool {
        self.theta[h - 1] == theta0
    }
}

/// Forward simulation v → ω → π → θ, `count` times, at truncation `k`.
pub fn prior_predictive_theta(
    prior: &PriorConfig,
    k: usize,
    count: usize,
    rng: &mut RngStream,
) -> Result<Vec<PriorDraw>> {
    if count == 0 || k == 0 {
        return Err(Error::Domain("need count >= 1 and k >= 1".into()));
    }
    (0..count)
        .map(|_| {
            let s = ShrinkageState::from_prior(k, prior, rng)?;
            Ok(PriorDraw {
                pi: s.pi,
                theta: s.theta,
            })
        })
        .collect()
}
