//! Pólya-Gamma PG(1, c) variates.
//!
//! The exact sampler draws J*(1, z) with z = |c|/2 by Devroye's alternating
//! series method and returns J*/4, which is PG(1, c) in distribution. The
//! proposal is a mixture of a truncated inverse Gaussian on (0, t] and a
//! shifted exponential on (t, ∞), split at t = 0.64.

use std::f64::consts::{FRAC_2_PI, PI};

use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erfc;

use crate::rng::RngStream;

const TRUNC: f64 = 0.64;
const PI2_OVER_8: f64 = PI * PI / 8.0;

/// One exact draw from PG(1, c).
pub fn sample_polya_gamma(c: f64, rng: &mut RngStream) -> f64 {
    debug_assert!(c.is_finite(), "PG tilt must be finite");
    let z = 0.5 * c.abs();
    let fz = PI2_OVER_8 + 0.5 * z * z;
    let p_exp = exponential_mass(z, fz);

    loop {
        let x = if rng.uniform() < p_exp {
            TRUNC + exp1(rng) / fz
        } else {
            truncated_inverse_gaussian(z, rng)
        };

        let mut s = series_coef(0, x);
        let y = rng.uniform() * s;
        let mut n = 0;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= series_coef(n, x);
                if y <= s {
                    return 0.25 * x;
                }
            } else {
                s += series_coef(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}

/// Approximate PG(1, c) draw from the first `terms` summands of the
/// infinite-convolution-of-gammas representation
/// `(1 / 2π²) Σ g_k / ((k - 1/2)² + c² / 4π²)` with `g_k ~ Exp(1)`.
///
/// Only used as a cross-check of [`sample_polya_gamma`]; the neglected tail
/// biases the draw downwards by roughly `1 / (2π² terms)`.
pub fn sample_polya_gamma_truncated(c: f64, terms: usize, rng: &mut RngStream) -> f64 {
    let shift = c * c / (4.0 * PI * PI);
    let mut acc = 0.0;
    for k in 1..=terms {
        let h = k as f64 - 0.5;
        acc += exp1(rng) / (h * h + shift);
    }
    acc / (2.0 * PI * PI)
}

fn exp1(rng: &mut RngStream) -> f64 {
    -rng.uniform().ln()
}

/// Coefficient a_n(x) of the alternating series for the J*(1, 0) density,
/// using the small-x form below the truncation point and the large-x form
/// above it.
fn series_coef(n: u32, x: f64) -> f64 {
    let h = n as f64 + 0.5;
    let k = h * PI;
    if x > TRUNC {
        k * (-0.5 * k * k * x).exp()
    } else if x > 0.0 {
        let expnt = -1.5 * (0.5 * PI * x).ln() + k.ln() - 2.0 * h * h / x;
        expnt.exp()
    } else {
        0.0
    }
}

/// Probability that the mixture proposal uses the exponential branch.
fn exponential_mass(z: f64, fz: f64) -> f64 {
    let t = TRUNC;
    let rt = (1.0 / t).sqrt();
    let b = rt * (t * z - 1.0);
    let a = -rt * (t * z + 1.0);
    let x0 = fz.ln() + fz * t;
    let xb = x0 - z + log_normal_cdf(b);
    let xa = x0 + z + log_normal_cdf(a);
    let q_over_p = 2.0 * FRAC_2_PI * (xb.exp() + xa.exp());
    1.0 / (1.0 + q_over_p)
}

/// Inverse Gaussian IG(mu = 1/z, lambda = 1) truncated to (0, TRUNC].
fn truncated_inverse_gaussian(z: f64, rng: &mut RngStream) -> f64 {
    let t = TRUNC;
    let mu = if z > 0.0 { 1.0 / z } else { f64::INFINITY };
    if mu > t {
        // Lévy proposal truncated to (0, t], then accept with exp(-z² x / 2).
        loop {
            let (mut e1, mut e2) = (exp1(rng), exp1(rng));
            while e1 * e1 > 2.0 * e2 / t {
                e1 = exp1(rng);
                e2 = exp1(rng);
            }
            let r = 1.0 + e1 * t;
            let x = t / (r * r);
            let alpha = (-0.5 * z * z * x).exp();
            if rng.uniform() <= alpha {
                return x;
            }
        }
    } else {
        loop {
            let nrm: f64 = StandardNormal.sample(rng);
            let y = nrm * nrm;
            let half_mu = 0.5 * mu;
            let mu_y = mu * y;
            let mut x = mu + half_mu * mu_y - half_mu * (4.0 * mu_y + mu_y * mu_y).sqrt();
            if rng.uniform() > mu / (mu + x) {
                x = mu * mu / x;
            }
            if x <= t {
                return x;
            }
        }
    }
}

/// log Φ(x), accurate far into the lower tail.
pub(crate) fn log_normal_cdf(x: f64) -> f64 {
    if x > -30.0 {
        (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
    } else {
        // Mills-ratio asymptotic series
        let x2 = x * x;
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * PI).ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}
