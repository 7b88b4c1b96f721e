//! Goodness-of-fit and MCMC diagnostics used to validate the samplers.

use crate::error::{Error, Result};

/// Kolmogorov distribution tail Pr(K > λ).
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov-Smirnov test of `sample` against a continuous CDF,
/// with the small-sample correction of Stephens for the p-value.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::Domain("KS test needs a nonempty sample".into()));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d),
    })
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("KS test needs nonempty samples".into()));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d),
    })
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with divisor len − 1; 0 for fewer than two values.
pub fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Standard error of the mean of a correlated series by non-overlapping
/// batch means, with about √len batches.
pub fn batch_means_se(x: &[f64]) -> f64 {
    let n = x.len();
    let batches = ((n as f64).sqrt().floor() as usize).max(2).min(n);
    let size = n / batches;
    if size == 0 {
        return (sample_variance(x) / n as f64).sqrt();
    }
    let means: Vec<f64> = (0..batches)
        .map(|b| mean(&x[b * size..(b + 1) * size]))
        .collect();
    (sample_variance(&means) / batches as f64).sqrt()
}

/// Geweke's comparison of a functional's mean under independent forward
/// draws and under a successive-conditional chain: the difference of means
/// over its standard error, with a batch-means error for the chain.
pub fn geweke_z(forward: &[f64], chain: &[f64]) -> f64 {
    let se_f2 = sample_variance(forward) / forward.len() as f64;
    let se_c = batch_means_se(chain);
    (mean(forward) - mean(chain)) / (se_f2 + se_c * se_c).sqrt()
}
