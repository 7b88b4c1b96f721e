//! Point estimates, dimension summaries and recovery metrics.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mcmc::PosteriorChain;
use crate::simulate::GroundTruth;

/// Posterior means. Latent quantities enter only through their rotation
/// invariant Gram products ZZᵀ, BBᵀ and ZBᵀ, which stay comparable when the
/// truncation level changes along the chain.
///
/// By default the Gram products of each draw use only its active columns:
/// a spike column stands in for a zero column, and its loadings are barely
/// identified, so averaging them in adds prior noise to BBᵀ.
#[derive(Clone, Debug, PartialEq)]
pub struct PointEstimate {
    pub alpha: DVector<f64>,
    pub gamma: DVector<f64>,
    pub sigma2: DVector<f64>,
    pub zzt: DMatrix<f64>,
    pub bbt: DMatrix<f64>,
    pub zbt: DMatrix<f64>,
}

/// Which columns of each draw enter the Gram averages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramColumns {
    Active,
    All,
}

pub fn posterior_mean_state(chain: &PosteriorChain) -> Result<PointEstimate> {
    posterior_mean_state_with(chain, GramColumns::Active)
}

pub fn posterior_mean_state_with(chain: &PosteriorChain, columns: GramColumns) -> Result<PointEstimate> {
    let first = chain.draws.first().ok_or(Error::EmptyChain)?;
    let (n, q) = (first.alpha.len(), first.gamma.len());
    let mut est = PointEstimate {
        alpha: DVector::zeros(n),
        gamma: DVector::zeros(q),
        sigma2: DVector::zeros(first.sigma2.len()),
        zzt: DMatrix::zeros(n, n),
        bbt: DMatrix::zeros(q, q),
        zbt: DMatrix::zeros(n, q),
    };
    for d in &chain.draws {
        est.alpha += &d.alpha;
        est.gamma += &d.gamma;
        est.sigma2 += &d.sigma2;
        let all = columns == GramColumns::All || chain.all_columns_active;
        let cols = d.active_columns(all);
        let (z, b) = if cols.len() == d.k() {
            (d.z.clone(), d.b.clone())
        } else {
            (d.z.select_columns(&cols), d.b.select_columns(&cols))
        };
        let bt = b.transpose();
        est.zzt += &z * z.transpose();
        est.bbt += &b * &bt;
        est.zbt += &z * &bt;
    }
    let s = chain.draws.len() as f64;
    est.alpha /= s;
    est.gamma /= s;
    est.sigma2 /= s;
    est.zzt /= s;
    est.bbt /= s;
    est.zbt /= s;
    Ok(est)
}

fn check_shape(what: &str, est: (usize, usize), truth: (usize, usize)) -> Result<()> {
    if est != truth {
        return Err(Error::DimensionMismatch(format!(
            "{what}: estimate is {}x{}, truth is {}x{}",
            est.0, est.1, truth.0, truth.1
        )));
    }
    Ok(())
}

/// Recovery metrics of one fit against the generating parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Recovery {
    pub delta_alpha: f64,
    pub delta_gamma: f64,
    pub delta_b: f64,
    pub delta_z: f64,
}

impl Recovery {
    pub fn compute(est: &PointEstimate, truth: &GroundTruth) -> Result<Self> {
        let n = truth.z0.nrows();
        let q = truth.b0.nrows();
        check_shape("alpha", (est.alpha.len(), 1), (truth.alpha0.len(), 1))?;
        check_shape("gamma", (est.gamma.len(), 1), (truth.gamma0.len(), 1))?;
        check_shape("ZZ'", est.zzt.shape(), (n, n))?;
        check_shape("BB'", est.bbt.shape(), (q, q))?;
        let zzt0 = &truth.z0 * truth.z0.transpose();
        let bbt0 = &truth.b0 * truth.b0.transpose();
        Ok(Self {
            delta_alpha: (&est.alpha - &truth.alpha0).norm() / (n as f64).sqrt(),
            delta_gamma: if q == 0 {
                0.0
            } else {
                (&est.gamma - &truth.gamma0).norm() / (q as f64).sqrt()
            },
            delta_b: if q == 0 {
                0.0
            } else {
                (&est.bbt - bbt0).norm() / q as f64
            },
            delta_z: (&est.zzt - zzt0).norm() / n as f64,
        })
    }
}

/// ‖mean_s Z⁽ˢ⁾Z⁽ˢ⁾ᵀ − Z₀Z₀ᵀ‖_F / n.
pub fn metric_delta_z(chain: &PosteriorChain, truth: &GroundTruth) -> Result<f64> {
    Ok(Recovery::compute(&posterior_mean_state(chain)?, truth)?.delta_z)
}

/// ‖mean_s B⁽ˢ⁾B⁽ˢ⁾ᵀ − B₀B₀ᵀ‖_F / q.
pub fn metric_delta_b(chain: &PosteriorChain, truth: &GroundTruth) -> Result<f64> {
    Ok(Recovery::compute(&posterior_mean_state(chain)?, truth)?.delta_b)
}

/// ‖α̂ − α₀‖₂ / √n.
pub fn metric_delta_alpha(chain: &PosteriorChain, truth: &GroundTruth) -> Result<f64> {
    Ok(Recovery::compute(&posterior_mean_state(chain)?, truth)?.delta_alpha)
}

/// ‖γ̂ − γ₀‖₂ / √q.
pub fn metric_delta_gamma(chain: &PosteriorChain, truth: &GroundTruth) -> Result<f64> {
    Ok(Recovery::compute(&posterior_mean_state(chain)?, truth)?.delta_gamma)
}

/// Frequencies of each K* value.
pub fn dimension_posterior(kstar: &[usize]) -> BTreeMap<usize, usize> {
    let mut table = BTreeMap::new();
    for &k in kstar {
        *table.entry(k).or_insert(0) += 1;
    }
    table
}

/// Most frequent K*, ties going to the smaller value.
pub fn mode_dimension(kstar: &[usize]) -> Result<usize> {
    let table = dimension_posterior(kstar);
    let mut best: Option<(usize, usize)> = None;
    for (&k, &count) in &table {
        // ascending keys, so a strict comparison keeps the smaller one on ties
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((k, count));
        }
    }
    best.map(|(k, _)| k).ok_or(Error::EmptyChain)
}

pub fn posterior_mode_dimension(chain: &PosteriorChain) -> Result<usize> {
    mode_dimension(&chain.kstar)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionAccuracy {
    pub accuracy: f64,
    /// Mean |K̂ − k₀| over the replications with K̂ ≠ k₀.
    pub mab: f64,
    /// False when every replication was correct and `mab` is a placeholder 0.
    pub mab_defined: bool,
}

pub fn dimension_accuracy(khat: &[usize], k0: usize) -> Result<DimensionAccuracy> {
    if khat.is_empty() {
        return Err(Error::EmptyChain);
    }
    let misses: Vec<f64> = khat
        .iter()
        .filter(|&&k| k != k0)
        .map(|&k| (k as f64 - k0 as f64).abs())
        .collect();
    let hits = khat.len() - misses.len();
    Ok(DimensionAccuracy {
        accuracy: hits as f64 / khat.len() as f64,
        mab: if misses.is_empty() {
            0.0
        } else {
            misses.iter().sum::<f64>() / misses.len() as f64
        },
        mab_defined: !misses.is_empty(),
    })
}

/// Area under the ROC curve via the rank-sum statistic, ties counting one half.
pub fn auroc(scores: &[(f64, bool)]) -> Result<f64> {
    let pos = scores.iter().filter(|s| s.1).count();
    let neg = scores.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    if scores.iter().any(|s| s.0.is_nan()) {
        return Err(Error::Domain("AUROC score is NaN".into()));
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    // midranks over tied groups
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end].0 == sorted[start].0 {
            end += 1;
        }
        let midrank = 0.5 * ((start + 1) + end) as f64;
        let group_pos = sorted[start..end].iter().filter(|s| s.1).count();
        rank_sum_pos += midrank * group_pos as f64;
        start = end;
    }
    let (p, m) = (pos as f64, neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * m))
}
