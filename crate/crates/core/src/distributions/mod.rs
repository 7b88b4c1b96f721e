//! Random variates and log densities used by the Gibbs samplers.

mod mvn;
mod polya_gamma;

pub use mvn::{sample_mvn, sample_mvn_precision, GaussianConditional};
pub use polya_gamma::{sample_polya_gamma, sample_polya_gamma_truncated};


use std::f64::consts::PI;

use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Draw from the inverse gamma law with density ∝ x^(-shape-1) exp(-rate/x).
pub fn sample_inverse_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) || !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Domain(format!(
            "inverse gamma needs shape > 0 and rate > 0, got shape={shape}, rate={rate}"
        )));
    }
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::Domain(e.to_string()))?;
    let x: f64 = g.sample(rng);
    // A gamma draw can underflow to zero for tiny shapes; keep the result finite.
    Ok(1.0 / x.max(f64::MIN_POSITIVE))
}

pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!(
            "beta needs a > 0 and b > 0, got a={a}, b={b}"
        )));
    }
    let beta = Beta::new(a, b).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(beta.sample(rng))
}

pub fn sample_normal(mean: f64, variance: f64, rng: &mut RngStream) -> f64 {
    let e: f64 = StandardNormal.sample(rng);
    mean + variance.sqrt() * e
}

pub fn standard_normal(rng: &mut RngStream) -> f64 {
    StandardNormal.sample(rng)
}

/// Σᵢ log N(xᵢ; 0, theta0).
pub fn log_density_spike_normal(x: &[f64], theta0: f64) -> f64 {
    let ss: f64 = x.iter().map(|v| v * v).sum();
    spike_log_density_ss(x.len(), ss, theta0)
}

/// Log density of the n-dimensional Student-t with 2·a_theta degrees of
/// freedom, location 0 and scale matrix (b_theta / a_theta)·I. This is the
/// marginal of N(0, θ I) under θ ~ IG(a_theta, b_theta).
pub fn log_density_slab_multivariate_t(x: &[f64], a_theta: f64, b_theta: f64) -> f64 {
    let ss: f64 = x.iter().map(|v| v * v).sum();
    slab_log_density_ss(x.len(), ss, a_theta, b_theta)
}

pub(crate) fn spike_log_density_ss(n: usize, ss: f64, theta0: f64) -> f64 {
    let n = n as f64;
    -0.5 * n * (2.0 * PI * theta0).ln() - 0.5 * ss / theta0
}

pub(crate) fn slab_log_density_ss(n: usize, ss: f64, a: f64, b: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let half_n = 0.5 * n as f64;
    ln_gamma(a + half_n) - ln_gamma(a) - half_n * (2.0 * PI * b).ln()
        - (a + half_n) * (0.5 * ss / b).ln_1p()
}

/// Numerically stable log(1 + exp(x)).
pub fn log1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_gamma_rejects_bad_parameters() {
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(
            sample_inverse_gamma(2.0, 0.0, &mut rng),
            Err(Error::Domain(_))
        ));
        assert!(sample_inverse_gamma(-1.0, 1.0, &mut rng).is_err());
        assert!(sample_inverse_gamma(f64::NAN, 1.0, &mut rng).is_err());
    }

    #[test]
    fn inverse_gamma_mean() {
        let mut rng = RngStream::new(1, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_inverse_gamma(3.0, 3.0, &mut rng).unwrap())
            .collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (v / n as f64).sqrt();
        assert!((m - 1.5).abs() < 3.0 * se, "mean {m} se {se}");
    }

    #[test]
    fn reciprocal_of_inverse_gamma_has_gamma_moments() {
        let mut rng = RngStream::new(2, 0);
        let (shape, rate) = (2.5, 4.0);
        let n = 100_000;
        let ys: Vec<f64> = (0..n)
            .map(|_| 1.0 / sample_inverse_gamma(shape, rate, &mut rng).unwrap())
            .collect();
        let m = ys.iter().sum::<f64>() / n as f64;
        let v = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let (gm, gv) = (shape / rate, shape / (rate * rate));
        assert!((m - gm).abs() < 3.0 * (gv / n as f64).sqrt());
        assert!((v - gv).abs() / gv < 0.03);
    }

    #[test]
    fn beta_domain_and_moments() {
        let mut rng = RngStream::new(4, 0);
        assert!(sample_beta(0.0, 1.0, &mut rng).is_err());
        assert!(sample_beta(1.0, -2.0, &mut rng).is_err());
        let n = 100_000;
        for &(a, b) in &[(1.0, 1.0), (8.0, 1.0)] {
            let xs: Vec<f64> = (0..n).map(|_| sample_beta(a, b, &mut rng).unwrap()).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let var = a * b / ((a + b).powi(2) * (a + b + 1.0));
            assert!((m - a / (a + b)).abs() < 3.0 * (var / n as f64).sqrt(), "a={a} b={b} m={m}");
        }
    }

    #[test]
    fn beta_kappa_one_cdf() {
        // Beta(κ, 1) has CDF u^κ
        let mut rng = RngStream::new(5, 0);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sample_beta(2.0, 1.0, &mut rng).unwrap() <= 0.5)
            .count();
        let p = hits as f64 / n as f64;
        let se = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((p - 0.25).abs() < 3.0 * se, "{p}");
    }

    #[test]
    fn spike_density_closed_forms() {
        let half_log_2pi = 0.5 * (2.0 * PI).ln();
        assert!((log_density_spike_normal(&[0.0], 1.0) + 0.918_938_533_204_672_7).abs() < 1e-12);
        assert!((log_density_spike_normal(&[0.0, 0.0], 1.0) + 2.0 * half_log_2pi).abs() < 1e-12);
        let expect = -0.5 * (2.0 * PI * 0.1).ln() - 1.0 / (2.0 * 0.1);
        assert!((log_density_spike_normal(&[1.0], 0.1) - expect).abs() < 1e-12);
    }

    #[test]
    fn slab_density_at_origin_is_univariate_t() {
        // t with 2 dof, scale 1: Γ(1.5) / (Γ(1) √(2π))
        let expect = (ln_gamma(1.5) - ln_gamma(1.0)) - 0.5 * (2.0 * PI).ln();
        assert!((log_density_slab_multivariate_t(&[0.0], 1.0, 1.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn slab_density_scale_family() {
        // scale s² = b/a: p_s(x) = s⁻ⁿ p_1(x/s)
        let x = [0.3, -1.2, 2.0];
        let (a, b) = (3.0f64, 12.0f64);
        let s = (b / a).sqrt();
        let scaled: Vec<f64> = x.iter().map(|v| v / s).collect();
        let lhs = log_density_slab_multivariate_t(&x, a, b);
        let rhs = -3.0 * s.ln() + log_density_slab_multivariate_t(&scaled, a, a);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn log1p_exp_is_stable() {
        assert!((log1p_exp(800.0) - 800.0).abs() < 1e-12);
        assert!(log1p_exp(-800.0) >= 0.0 && log1p_exp(-800.0) < 1e-300);
        assert!((log1p_exp(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log1p_exp(3.0) - (1.0 + 3f64.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn logistic_is_bounded() {
        for &x in &[-800.0, -30.0, 0.0, 30.0, 800.0] {
            let p = logistic(x);
            assert!((0.0..=1.0).contains(&p) && p.is_finite());
        }
        assert_eq!(logistic(0.0), 0.5);
    }
}
