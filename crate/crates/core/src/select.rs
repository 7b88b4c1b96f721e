//! Dimension selection baselines over fixed-dimension fits: information
//! criteria and node-level K-fold cross-validation.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::mcmc::{run_chain, FitMode, PosteriorChain, RunConfig};
use crate::model::{
    cell_log_likelihood, dyad_log_likelihood, log_likelihood_at, natural_params_attributes,
    natural_params_network, Dataset, Family, ParamsRef, PriorConfig,
};
use crate::distributions::{log1p_exp, logistic};
use crate::rng::RngStream;

/// Fit with independent N(0, 1) latent priors in exactly `k` dimensions.
pub fn fit_fixed_dimension(data: &Dataset, k: usize, config: &RunConfig) -> Result<PosteriorChain> {
    if k == 0 {
        return Err(Error::Config("fixed-dimension fit needs k >= 1".into()));
    }
    let mut cfg = config.clone();
    cfg.mode = FitMode::Fixed { k };
    cfg.family = data.family();
    run_chain(data, &cfg)
}

/// nk + qk + n + 2q (Gaussian) or nk + qk + n + q (Bernoulli).
pub fn parameter_count(family: Family, n: usize, q: usize, k: usize) -> usize {
    let per_attribute = match family {
        Family::Gaussian => 2,
        Family::Bernoulli => 1,
    };
    n * k + q * k + n + per_attribute * q
}

/// Coordinate-wise posterior mean after rotating every draw onto the last
/// kept draw.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedMean {
    pub alpha: DVector<f64>,
    pub gamma: DVector<f64>,
    pub z: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub sigma2: DVector<f64>,
}

impl AlignedMean {
    pub fn params(&self) -> ParamsRef<'_> {
        ParamsRef {
            alpha: &self.alpha,
            gamma: &self.gamma,
            z: &self.z,
            b: &self.b,
            sigma2: &self.sigma2,
        }
    }
}

/// Orthogonal R minimizing ‖Z R − target‖_F.
pub fn procrustes_rotation(z: &DMatrix<f64>, target: &DMatrix<f64>) -> DMatrix<f64> {
    let k = z.ncols();
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    let m = z.transpose() * target;
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V");
    u * v_t
}

pub fn aligned_posterior_mean(chain: &PosteriorChain) -> Result<AlignedMean> {
    let last = chain.draws.last().ok_or(Error::EmptyChain)?;
    if chain.constant_k().is_none() {
        return Err(Error::DimensionMismatch(
            "coordinate means need a chain with constant k".into(),
        ));
    }
    let s = chain.draws.len() as f64;
    let mut out = AlignedMean {
        alpha: DVector::zeros(last.alpha.len()),
        gamma: DVector::zeros(last.gamma.len()),
        z: DMatrix::zeros(last.z.nrows(), last.z.ncols()),
        b: DMatrix::zeros(last.b.nrows(), last.b.ncols()),
        sigma2: DVector::zeros(last.sigma2.len()),
    };
    for d in &chain.draws {
        let r = procrustes_rotation(&d.z, &last.z);
        out.alpha += &d.alpha;
        out.gamma += &d.gamma;
        out.sigma2 += &d.sigma2;
        out.z += &d.z * &r;
        out.b += &d.b * &r;
    }
    out.alpha /= s;
    out.gamma /= s;
    out.sigma2 /= s;
    out.z /= s;
    out.b /= s;
    Ok(out)
}

fn loglik_at_mean(chain: &PosteriorChain, data: &Dataset) -> Result<f64> {
    let mean = aligned_posterior_mean(chain)?;
    log_likelihood_at(data, &mean.params())
}

fn chain_k(chain: &PosteriorChain) -> Result<usize> {
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    chain
        .constant_k()
        .ok_or_else(|| Error::DimensionMismatch("criteria need a chain with constant k".into()))
}

/// −2 log p(A, Y | ξ̂) + 2d.
pub fn criterion_aic(chain: &PosteriorChain, data: &Dataset) -> Result<f64> {
    let k = chain_k(chain)?;
    let d = parameter_count(data.family(), data.n(), data.q(), k) as f64;
    Ok(-2.0 * loglik_at_mean(chain, data)? + 2.0 * d)
}

/// −2 log p(A, Y | ξ̂) + 2d log n.
pub fn criterion_bic(chain: &PosteriorChain, data: &Dataset) -> Result<f64> {
    let k = chain_k(chain)?;
    let d = parameter_count(data.family(), data.n(), data.q(), k) as f64;
    Ok(-2.0 * loglik_at_mean(chain, data)? + 2.0 * d * (data.n() as f64).ln())
}

/// −2 log p(A, Y | ξ̂) + 2 p_DIC with p_DIC = 2(log p(A, Y | ξ̂) − mean_s log p(A, Y | ξ⁽ˢ⁾)).
pub fn criterion_dic(chain: &PosteriorChain, data: &Dataset) -> Result<f64> {
    chain_k(chain)?;
    let at_mean = loglik_at_mean(chain, data)?;
    let mut mean_ll = 0.0;
    for d in &chain.draws {
        mean_ll += log_likelihood_at(data, &d.params())?;
    }
    mean_ll /= chain.draws.len() as f64;
    let p_dic = 2.0 * (at_mean - mean_ll);
    Ok(-2.0 * at_mean + 2.0 * p_dic)
}

/// Pointwise terms of WAIC, one unit per dyad i < i' and per observed cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaicParts {
    /// Σ log mean_s p(unit | ξ⁽ˢ⁾).
    pub lppd: f64,
    /// Σ sample variance over s of log p(unit | ξ⁽ˢ⁾), over dyads.
    pub penalty_network: f64,
    /// Same over attribute cells.
    pub penalty_attributes: f64,
}

impl WaicParts {
    pub fn waic(&self) -> f64 {
        -2.0 * (self.lppd - self.penalty_network - self.penalty_attributes)
    }
}

/// Per-unit streaming accumulator of log-mean-exp and Welford variance.
struct UnitStats {
    max: Vec<f64>,
    scaled: Vec<f64>,
    mean: Vec<f64>,
    m2: Vec<f64>,
    count: usize,
}

impl UnitStats {
    fn new(units: usize) -> Self {
        Self {
            max: vec![f64::NEG_INFINITY; units],
            scaled: vec![0.0; units],
            mean: vec![0.0; units],
            m2: vec![0.0; units],
            count: 0,
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for (u, &l) in values.iter().enumerate() {
            if l > self.max[u] {
                self.scaled[u] = self.scaled[u] * (self.max[u] - l).exp() + 1.0;
                self.max[u] = l;
            } else {
                self.scaled[u] += (l - self.max[u]).exp();
            }
            let delta = l - self.mean[u];
            self.mean[u] += delta / c;
            self.m2[u] += delta * (l - self.mean[u]);
        }
    }

    fn lppd(&self) -> f64 {
        let s = self.count as f64;
        (0..self.max.len())
            .map(|u| self.max[u] + (self.scaled[u] / s).ln())
            .sum()
    }

    fn variance_sum(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.m2.iter().sum::<f64>() / (self.count - 1) as f64
    }
}

pub fn waic_parts(chain: &PosteriorChain, data: &Dataset) -> Result<WaicParts> {
    if chain.is_empty() {
        return Err(Error::EmptyChain);
    }
    let (n, q) = (data.n(), data.q());
    let a = data.adjacency();
    let y = data.attributes();
    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..q).map(move |j| (i, j)))
        .filter(|&(i, j)| data.is_observed(i, j))
        .collect();
    let mut net = UnitStats::new(n * n.saturating_sub(1) / 2);
    let mut att = UnitStats::new(cells.len());
    let mut buf_net = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut buf_att = Vec::with_capacity(cells.len());
    for d in &chain.draws {
        let theta_a = natural_params_network(&d.alpha, &d.z)?;
        buf_net.clear();
        for i in 0..n {
            for j in 0..i {
                buf_net.push(dyad_log_likelihood(a[(i, j)], theta_a[(i, j)]));
            }
        }
        net.push(&buf_net);
        if !cells.is_empty() {
            let theta_y = natural_params_attributes(&d.gamma, &d.z, &d.b)?;
            buf_att.clear();
            for &(i, j) in &cells {
                let s2 = match data.family() {
                    Family::Gaussian => d.sigma2[j],
                    Family::Bernoulli => 1.0,
                };
                buf_att.push(cell_log_likelihood(data.family(), y[(i, j)], theta_y[(i, j)], s2));
            }
            att.push(&buf_att);
        }
    }
    Ok(WaicParts {
        lppd: net.lppd() + if cells.is_empty() { 0.0 } else { att.lppd() },
        penalty_network: net.variance_sum(),
        penalty_attributes: att.variance_sum(),
    })
}

pub fn criterion_waic(chain: &PosteriorChain, data: &Dataset) -> Result<f64> {
    Ok(waic_parts(chain, data)?.waic())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Criteria {
    pub k: usize,
    pub aic: f64,
    pub bic: f64,
    pub dic: f64,
    pub waic: f64,
}

pub fn information_criteria(chain: &PosteriorChain, data: &Dataset) -> Result<Criteria> {
    Ok(Criteria {
        k: chain_k(chain)?,
        aic: criterion_aic(chain, data)?,
        bic: criterion_bic(chain, data)?,
        dic: criterion_dic(chain, data)?,
        waic: criterion_waic(chain, data)?,
    })
}

/// Dataset restricted to `nodes`, in the given order.
pub fn subset_nodes(data: &Dataset, nodes: &[usize]) -> Result<Dataset> {
    let a = data.adjacency();
    let y = data.attributes();
    let m = nodes.len();
    let adjacency = DMatrix::from_fn(m, m, |r, c| a[(nodes[r], nodes[c])]);
    let attributes = DMatrix::from_fn(m, data.q(), |r, j| y[(nodes[r], j)]);
    let observed = DMatrix::from_fn(m, data.q(), |r, j| data.is_observed(nodes[r], j));
    Dataset::new(adjacency, attributes, data.family(), observed)
}

/// MAP estimate of (α_t, z_t) for a node outside the training set, from its
/// ties to training nodes with frozen training parameters, under the priors
/// N(0, σ_α²) and N(0, I_k).
pub fn estimate_new_node(
    ties: &[f64],
    alpha_train: &DVector<f64>,
    z_train: &DMatrix<f64>,
    prior: &PriorConfig,
) -> Result<(f64, DVector<f64>)> {
    let k = z_train.ncols();
    let m = alpha_train.len();
    if ties.len() != m || z_train.nrows() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} ties for {m} training nodes",
            ties.len()
        )));
    }
    let prec_alpha = 1.0 / (prior.sigma_alpha * prior.sigma_alpha);
    let objective = |x: &DVector<f64>| -> f64 {
        let mut f = -0.5 * prec_alpha * x[0] * x[0] - 0.5 * x.rows(1, k).norm_squared();
        for i in 0..m {
            let eta = x[0] + alpha_train[i] + (0..k).map(|h| x[1 + h] * z_train[(i, h)]).sum::<f64>();
            f += ties[i] * eta - log1p_exp(eta);
        }
        f
    };
    let mut x = DVector::zeros(k + 1);
    let mut fx = objective(&x);
    for _ in 0..100 {
        let mut grad = DVector::zeros(k + 1);
        let mut hess = DMatrix::zeros(k + 1, k + 1);
        grad[0] = -prec_alpha * x[0];
        hess[(0, 0)] = prec_alpha;
        for h in 0..k {
            grad[1 + h] = -x[1 + h];
            hess[(1 + h, 1 + h)] = 1.0;
        }
        let mut design = DVector::zeros(k + 1);
        for i in 0..m {
            design[0] = 1.0;
            for h in 0..k {
                design[1 + h] = z_train[(i, h)];
            }
            let eta = x[0] + alpha_train[i] + (0..k).map(|h| x[1 + h] * z_train[(i, h)]).sum::<f64>();
            let p = logistic(eta);
            grad.axpy(ties[i] - p, &design, 1.0);
            hess.ger(p * (1.0 - p), &design, &design, 1.0);
        }
        let step = hess
            .cholesky()
            .ok_or(Error::Factorization { dim: k + 1, jitter: 0.0 })?
            .solve(&grad);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &x + &step * t;
            let fc = objective(&cand);
            if fc >= fx {
                x = cand;
                fx = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || step.norm() * t < 1e-10 {
            break;
        }
    }
    Ok((x[0], x.rows(1, k).into_owned()))
}

/// Log-likelihood of every dyad touching a test node plus the observed
/// attribute cells of the test rows, with test-node parameters estimated by
/// [`estimate_new_node`].
pub fn held_out_log_likelihood(
    data: &Dataset,
    train: &[usize],
    test: &[usize],
    fit: &AlignedMean,
    prior: &PriorConfig,
) -> Result<f64> {
    let n = data.n();
    let k = fit.z.ncols();
    let a = data.adjacency();
    let mut alpha = DVector::zeros(n);
    let mut z = DMatrix::zeros(n, k);
    for (r, &i) in train.iter().enumerate() {
        alpha[i] = fit.alpha[r];
        for h in 0..k {
            z[(i, h)] = fit.z[(r, h)];
        }
    }
    for &t in test {
        let ties: Vec<f64> = train.iter().map(|&i| a[(t, i)]).collect();
        let (at, zt) = estimate_new_node(&ties, &fit.alpha, &fit.z, prior)?;
        alpha[t] = at;
        for h in 0..k {
            z[(t, h)] = zt[h];
        }
    }
    let mut is_test = vec![false; n];
    for &t in test {
        is_test[t] = true;
    }
    let theta_a = natural_params_network(&alpha, &z)?;
    let mut ll = 0.0;
    for i in 0..n {
        for j in 0..i {
            if is_test[i] || is_test[j] {
                ll += dyad_log_likelihood(a[(i, j)], theta_a[(i, j)]);
            }
        }
    }
    if data.q() > 0 {
        let theta_y = natural_params_attributes(&fit.gamma, &z, &fit.b)?;
        let y = data.attributes();
        for &t in test {
            for j in 0..data.q() {
                if data.is_observed(t, j) {
                    let s2 = match data.family() {
                        Family::Gaussian => fit.sigma2[j],
                        Family::Bernoulli => 1.0,
                    };
                    ll += cell_log_likelihood(data.family(), y[(t, j)], theta_y[(t, j)], s2);
                }
            }
        }
    }
    Ok(ll)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult {
    pub candidates: Vec<usize>,
    /// Held-out log-likelihood per candidate (outer) and fold (inner).
    pub fold_loglik: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Standard error of the fold mean.
    pub se: Vec<f64>,
    pub selected: usize,
    pub selected_one_se: usize,
}

/// Candidate with the largest mean, and the smallest candidate whose mean is
/// within one standard error of that best mean.
pub fn one_se_rule(candidates: &[usize], mean: &[f64], se: &[f64]) -> (usize, usize) {
    let mut best = 0;
    for c in 1..candidates.len() {
        if mean[c] > mean[best] || (mean[c] == mean[best] && candidates[c] < candidates[best]) {
            best = c;
        }
    }
    let threshold = mean[best] - se[best];
    let one_se = (0..candidates.len())
        .filter(|&c| mean[c] >= threshold)
        .map(|c| candidates[c])
        .min()
        .expect("best is always within threshold");
    (candidates[best], one_se)
}

/// Random near-equal node folds.
pub fn node_folds(n: usize, folds: usize, rng: &mut RngStream) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if folds > n {
        return Err(Error::Config(format!(
            "{folds} folds leave some fold empty with only {n} nodes"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = vec![Vec::new(); folds];
    for (pos, i) in order.into_iter().enumerate() {
        out[pos % folds].push(i);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// Node-level K-fold cross-validation over fixed-dimension fits.
pub fn kfold_cv(
    data: &Dataset,
    candidates: &[usize],
    folds: usize,
    config: &RunConfig,
    rng: &mut RngStream,
) -> Result<CvResult> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidate dimensions".into()));
    }
    let parts = node_folds(data.n(), folds, rng)?;
    let mut fold_loglik = vec![Vec::with_capacity(folds); candidates.len()];
    for test in &parts {
        let train: Vec<usize> = (0..data.n()).filter(|i| test.binary_search(i).is_err()).collect();
        let train_data = subset_nodes(data, &train)?;
        for (c, &k) in candidates.iter().enumerate() {
            let mut cfg = config.clone();
            cfg.seed = rng.split_key();
            let chain = fit_fixed_dimension(&train_data, k, &cfg)?;
            let fit = aligned_posterior_mean(&chain)?;
            fold_loglik[c].push(held_out_log_likelihood(data, &train, test, &fit, &config.prior)?);
        }
    }
    let f = folds as f64;
    let mean: Vec<f64> = fold_loglik.iter().map(|v| v.iter().sum::<f64>() / f).collect();
    let se: Vec<f64> = fold_loglik
        .iter()
        .zip(&mean)
        .map(|(v, m)| {
            let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (f - 1.0);
            (var / f).sqrt()
        })
        .collect();
    let (selected, selected_one_se) = one_se_rule(candidates, &mean, &se);
    Ok(CvResult {
        candidates: candidates.to_vec(),
        fold_loglik,
        mean,
        se,
        selected,
        selected_one_se,
    })
}
