//! Gibbs updates for the joint latent space model.
//!
//! Both attribute families reduce, after Pólya-Gamma augmentation, to a
//! Gaussian pseudo-likelihood in which cell (i, j) contributes a weight
//! `w_ij` and a linear term `u_ij`:
//!
//! | family    | w_ij      | u_ij          |
//! |-----------|-----------|---------------|
//! | Gaussian  | 1/σ_j²    | Y_ij/σ_j²     |
//! | Bernoulli | d^Y_ij    | Y_ij − 1/2    |
//!
//! so that the γ, B and Z conditionals share one implementation. Cells that
//! are missing and not imputed get `w = u = 0`.

pub mod bernoulli;
pub mod gaussian;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::coss::ShrinkageState;
use crate::distributions::{
    logistic, sample_inverse_gamma, sample_normal, sample_polya_gamma, standard_normal,
    GaussianConditional,
};
use crate::error::Result;
use crate::model::{natural_params_attributes, Dataset, Family, ModelState, PriorConfig};
use crate::rng::RngStream;

/// Switches that change what a Gibbs cycle does, not the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleOptions {
    /// Run the dyad and cell Pólya-Gamma draws on the rayon pool. Draws are
    /// identical either way.
    pub parallel: bool,
    /// Re-impute missing attribute cells at the start of each cycle.
    pub impute: bool,
    /// Update ρ, v, ω and θ. Off for fixed-dimension fits with θ ≡ 1.
    pub update_shrinkage: bool,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            parallel: true,
            impute: false,
            update_shrinkage: true,
        }
    }
}

/// Per-cell weights and linear terms of the attribute pseudo-likelihood.
#[derive(Clone, Debug)]
pub struct AttributeTerms {
    pub w: DMatrix<f64>,
    pub u: DMatrix<f64>,
}

/// Value of cell (i, j) if it takes part in the updates.
#[inline]
pub(crate) fn working_cell(data: &Dataset, state: &ModelState, i: usize, j: usize) -> Option<f64> {
    match &state.imputed {
        Some(y) => Some(y[(i, j)]),
        None if data.is_observed(i, j) => Some(data.attributes()[(i, j)]),
        None => None,
    }
}

pub fn attribute_terms(data: &Dataset, state: &ModelState) -> AttributeTerms {
    let (n, q) = (data.n(), data.q());
    let mut w = DMatrix::zeros(n, q);
    let mut u = DMatrix::zeros(n, q);
    for j in 0..q {
        for i in 0..n {
            if let Some(y) = working_cell(data, state, i, j) {
                match data.family() {
                    Family::Gaussian => {
                        let prec = 1.0 / state.sigma2[j];
                        w[(i, j)] = prec;
                        u[(i, j)] = y * prec;
                    }
                    Family::Bernoulli => {
                        w[(i, j)] = state.aug_y[(i, j)];
                        u[(i, j)] = y - 0.5;
                    }
                }
            }
        }
    }
    AttributeTerms { w, u }
}

/// Starting point for a chain: α from the observed density, γ (and σ²) from
/// column summaries, small random Z, zero loadings.
pub fn initial_state(
    data: &Dataset,
    prior: &PriorConfig,
    k: usize,
    fixed_dimension: bool,
    rng: &mut RngStream,
) -> Result<ModelState> {
    let (n, q) = (data.n(), data.q());
    let pairs = (n * (n - 1) / 2) as f64;
    let density = ((data.edge_count() as f64 + 0.5) / (pairs + 1.0)).clamp(1e-3, 1.0 - 1e-3);
    let alpha0 = 0.5 * (density / (1.0 - density)).ln();

    let mut gamma = DVector::zeros(q);
    let mut sigma2 = DVector::zeros(if data.family() == Family::Gaussian { q } else { 0 });
    for j in 0..q {
        let vals: Vec<f64> = (0..n)
            .filter(|&i| data.is_observed(i, j))
            .map(|i| data.attributes()[(i, j)])
            .collect();
        let m = if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        match data.family() {
            Family::Gaussian => {
                gamma[j] = m;
                let var = if vals.len() > 1 {
                    vals.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
                } else {
                    1.0
                };
                sigma2[j] = var.max(1e-2);
            }
            Family::Bernoulli => {
                let p = m.clamp(0.02, 0.98);
                gamma[j] = (p / (1.0 - p)).ln();
            }
        }
    }

    let shrinkage = if fixed_dimension {
        ShrinkageState::fixed_unit(k)
    } else {
        ShrinkageState::slab_start(k, prior)
    };
    let z = DMatrix::from_fn(n, k, |_, h| {
        0.5 * shrinkage.theta[h].sqrt() * standard_normal(rng)
    });
    let aug_y = match data.family() {
        Family::Bernoulli => DMatrix::from_element(n, q, 0.25),
        Family::Gaussian => DMatrix::zeros(0, 0),
    };

    Ok(ModelState {
        alpha: DVector::from_element(n, alpha0),
        gamma,
        z,
        b: DMatrix::zeros(q, k),
        sigma2,
        aug_a: DMatrix::from_element(n, n, 0.25),
        aug_y,
        shrinkage,
        imputed: None,
    })
}

/// Step: d^A_ii' = d^A_i'i ~ PG(1, Θᴬ_ii') for every dyad.
///
/// Row i draws from child stream i of one key taken from `rng`, so the
/// result does not depend on how rows are scheduled across threads.
pub(crate) fn augment_network(state: &mut ModelState, data: &Dataset, rng: &mut RngStream, parallel: bool) {
    let n = data.n();
    let key = rng.split_key();
    let gram = &state.z * state.z.transpose();
    let alpha = &state.alpha;
    let row = |i: usize| -> Vec<f64> {
        let mut r = RngStream::child(key, i as u64);
        (0..i)
            .map(|j| sample_polya_gamma(alpha[i] + alpha[j] + gram[(i, j)], &mut r))
            .collect()
    };
    let rows: Vec<Vec<f64>> = if parallel {
        (0..n).into_par_iter().map(row).collect()
    } else {
        (0..n).map(row).collect()
    };
    for (i, r) in rows.into_iter().enumerate() {
        for (j, d) in r.into_iter().enumerate() {
            state.aug_a[(i, j)] = d;
            state.aug_a[(j, i)] = d;
        }
    }
}

/// Step: d^Y_ij ~ PG(1, Θʸ_ij) over the cells that take part in the updates.
pub(crate) fn augment_attributes(
    state: &mut ModelState,
    data: &Dataset,
    rng: &mut RngStream,
    parallel: bool,
) -> Result<()> {
    let (n, q) = (data.n(), data.q());
    if q == 0 {
        return Ok(());
    }
    let key = rng.split_key();
    let theta = natural_params_attributes(&state.gamma, &state.z, &state.b)?;
    let st: &ModelState = state;
    let row = |i: usize| -> Vec<f64> {
        let mut r = RngStream::child(key, i as u64);
        (0..q)
            .map(|j| {
                if working_cell(data, st, i, j).is_some() {
                    sample_polya_gamma(theta[(i, j)], &mut r)
                } else {
                    0.0
                }
            })
            .collect()
    };
    let rows: Vec<Vec<f64>> = if parallel {
        (0..n).into_par_iter().map(row).collect()
    } else {
        (0..n).map(row).collect()
    };
    let mut aug = DMatrix::zeros(n, q);
    for (i, r) in rows.into_iter().enumerate() {
        for (j, d) in r.into_iter().enumerate() {
            aug[(i, j)] = d;
        }
    }
    state.aug_y = aug;
    Ok(())
}

/// Mean and variance of α_i given everything else.
pub fn alpha_conditional(state: &ModelState, data: &Dataset, prior: &PriorConfig, i: usize) -> (f64, f64) {
    let n = data.n();
    let k = state.k();
    let a = data.adjacency();
    let mut prec = 1.0 / (prior.sigma_alpha * prior.sigma_alpha);
    let mut lin = 0.0;
    for j in 0..n {
        if j == i {
            continue;
        }
        let d = state.aug_a[(i, j)];
        let mut dot = 0.0;
        for h in 0..k {
            dot += state.z[(i, h)] * state.z[(j, h)];
        }
        prec += d;
        lin += a[(i, j)] - 0.5 - d * (state.alpha[j] + dot);
    }
    (lin / prec, 1.0 / prec)
}

/// Step: systematic scan over α_1, …, α_n.
pub(crate) fn update_alpha_all(state: &mut ModelState, data: &Dataset, prior: &PriorConfig, rng: &mut RngStream) {
    let n = data.n();
    let gram = &state.z * state.z.transpose();
    let a = data.adjacency();
    let base_prec = 1.0 / (prior.sigma_alpha * prior.sigma_alpha);
    for i in 0..n {
        let mut prec = base_prec;
        let mut lin = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = state.aug_a[(i, j)];
            prec += d;
            lin += a[(i, j)] - 0.5 - d * (state.alpha[j] + gram[(i, j)]);
        }
        state.alpha[i] = sample_normal(lin / prec, 1.0 / prec, rng);
    }
}

/// Full conditional of z_i in canonical form.
pub fn latent_conditional(
    state: &ModelState,
    data: &Dataset,
    terms: &AttributeTerms,
    i: usize,
) -> GaussianConditional {
    let n = data.n();
    let k = state.k();
    let a = data.adjacency();
    let mut prec = DMatrix::zeros(k, k);
    let mut lin = DVector::zeros(k);
    for h in 0..k {
        prec[(h, h)] = 1.0 / state.shrinkage.theta[h];
    }
    for j in 0..n {
        if j == i {
            continue;
        }
        let d = state.aug_a[(i, j)];
        let resid = a[(i, j)] - 0.5 - d * (state.alpha[i] + state.alpha[j]);
        for h in 0..k {
            let zh = state.z[(j, h)];
            lin[h] += zh * resid;
            for g in 0..=h {
                prec[(h, g)] += d * zh * state.z[(j, g)];
            }
        }
    }
    for l in 0..data.q() {
        let w = terms.w[(i, l)];
        let r = terms.u[(i, l)] - w * state.gamma[l];
        for h in 0..k {
            let bh = state.b[(l, h)];
            lin[h] += bh * r;
            for g in 0..=h {
                prec[(h, g)] += w * bh * state.b[(l, g)];
            }
        }
    }
    symmetrize_lower(&mut prec);
    GaussianConditional::new(prec, lin)
}

/// Step: systematic scan over z_1, …, z_n.
pub(crate) fn update_latent_all(
    state: &mut ModelState,
    data: &Dataset,
    terms: &AttributeTerms,
    rng: &mut RngStream,
) -> Result<()> {
    let n = data.n();
    let k = state.k();
    if k == 0 {
        return Ok(());
    }
    // row-major copy of Z kept in sync with the scan
    let mut zr: Vec<f64> = (0..n * k).map(|idx| state.z[(idx / k, idx % k)]).collect();
    let a = data.adjacency();
    let inv_theta: Vec<f64> = state.shrinkage.theta.iter().map(|t| 1.0 / t).collect();
    let mut prec = DMatrix::zeros(k, k);
    let mut lin = DVector::zeros(k);
    for i in 0..n {
        prec.fill(0.0);
        lin.fill(0.0);
        for h in 0..k {
            prec[(h, h)] = inv_theta[h];
        }
        let ai = state.alpha[i];
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = state.aug_a[(i, j)];
            let resid = a[(i, j)] - 0.5 - d * (ai + state.alpha[j]);
            let zj = &zr[j * k..(j + 1) * k];
            for h in 0..k {
                lin[h] += zj[h] * resid;
                let dz = d * zj[h];
                for g in 0..=h {
                    prec[(h, g)] += dz * zj[g];
                }
            }
        }
        for l in 0..data.q() {
            let w = terms.w[(i, l)];
            let r = terms.u[(i, l)] - w * state.gamma[l];
            for h in 0..k {
                let bh = state.b[(l, h)];
                lin[h] += bh * r;
                let wb = w * bh;
                for g in 0..=h {
                    prec[(h, g)] += wb * state.b[(l, g)];
                }
            }
        }
        symmetrize_lower(&mut prec);
        let draw = GaussianConditional::new(prec.clone(), lin.clone()).sample(rng)?;
        zr[i * k..(i + 1) * k].copy_from_slice(draw.as_slice());
    }
    for i in 0..n {
        for h in 0..k {
            state.z[(i, h)] = zr[i * k + h];
        }
    }
    Ok(())
}

/// Mean and variance of γ_j given everything else.
pub fn gamma_conditional(
    state: &ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    terms: &AttributeTerms,
    j: usize,
) -> (f64, f64) {
    let k = state.k();
    let mut prec = 1.0 / (prior.sigma_gamma * prior.sigma_gamma);
    let mut lin = 0.0;
    for i in 0..data.n() {
        let w = terms.w[(i, j)];
        if w == 0.0 && terms.u[(i, j)] == 0.0 {
            continue;
        }
        let mut dot = 0.0;
        for h in 0..k {
            dot += state.z[(i, h)] * state.b[(j, h)];
        }
        prec += w;
        lin += terms.u[(i, j)] - w * dot;
    }
    (lin / prec, 1.0 / prec)
}

pub(crate) fn update_gamma_all(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    terms: &AttributeTerms,
    rng: &mut RngStream,
) {
    for j in 0..data.q() {
        let (m, v) = gamma_conditional(state, data, prior, terms, j);
        state.gamma[j] = sample_normal(m, v, rng);
    }
}

/// Full conditional of β_j (row j of B) in canonical form.
pub fn loading_conditional(
    state: &ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    terms: &AttributeTerms,
    j: usize,
) -> GaussianConditional {
    let k = state.k();
    let mut prec = DMatrix::zeros(k, k);
    let mut lin = DVector::zeros(k);
    let p0 = 1.0 / (prior.sigma_b * prior.sigma_b);
    for h in 0..k {
        prec[(h, h)] = p0;
    }
    for i in 0..data.n() {
        let w = terms.w[(i, j)];
        let r = terms.u[(i, j)] - w * state.gamma[j];
        for h in 0..k {
            let zh = state.z[(i, h)];
            lin[h] += zh * r;
            for g in 0..=h {
                prec[(h, g)] += w * zh * state.z[(i, g)];
            }
        }
    }
    symmetrize_lower(&mut prec);
    GaussianConditional::new(prec, lin)
}

pub(crate) fn update_loadings_all(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    terms: &AttributeTerms,
    rng: &mut RngStream,
) -> Result<()> {
    for j in 0..data.q() {
        let beta = loading_conditional(state, data, prior, terms, j).sample(rng)?;
        for h in 0..state.k() {
            state.b[(j, h)] = beta[h];
        }
    }
    Ok(())
}

/// Shape and rate of the inverse-gamma conditional of σ_j².
pub fn noise_variance_conditional(
    state: &ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    j: usize,
) -> (f64, f64) {
    let k = state.k();
    let mut count = 0usize;
    let mut ss = 0.0;
    for i in 0..data.n() {
        if let Some(y) = working_cell(data, state, i, j) {
            let mut fit = state.gamma[j];
            for h in 0..k {
                fit += state.z[(i, h)] * state.b[(j, h)];
            }
            ss += (y - fit).powi(2);
            count += 1;
        }
    }
    (prior.a_sigma + 0.5 * count as f64, prior.b_sigma + 0.5 * ss)
}

pub(crate) fn update_noise_all(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    rng: &mut RngStream,
) -> Result<()> {
    for j in 0..data.q() {
        let (shape, rate) = noise_variance_conditional(state, data, prior, j);
        state.sigma2[j] = sample_inverse_gamma(shape, rate, rng)?;
    }
    Ok(())
}

/// Steps: ρ, then v (and ω, π), then θ.
pub(crate) fn update_shrinkage(
    state: &mut ModelState,
    prior: &PriorConfig,
    rng: &mut RngStream,
) -> Result<()> {
    let n = state.z.nrows();
    let ss: Vec<f64> = state.z.column_iter().map(|c| c.norm_squared()).collect();
    state.shrinkage.update(&ss, n, prior, rng)
}

/// Fills missing attribute cells from their predictive law under the
/// current parameters and stores the completed matrix on the state.
pub(crate) fn impute_cells(state: &mut ModelState, data: &Dataset, rng: &mut RngStream) -> Result<DMatrix<f64>> {
    let mut filled = data.attributes().clone();
    let missing = data.missing_cells();
    if !missing.is_empty() {
        let theta = natural_params_attributes(&state.gamma, &state.z, &state.b)?;
        for (i, j) in missing {
            filled[(i, j)] = match data.family() {
                Family::Bernoulli => {
                    if rng.uniform() < logistic(theta[(i, j)]) {
                        1.0
                    } else {
                        0.0
                    }
                }
                Family::Gaussian => sample_normal(theta[(i, j)], state.sigma2[j], rng),
            };
        }
    }
    state.imputed = Some(filled.clone());
    Ok(filled)
}

fn symmetrize_lower(m: &mut DMatrix<f64>) {
    let k = m.nrows();
    for h in 0..k {
        for g in 0..h {
            m[(g, h)] = m[(h, g)];
        }
    }
}

/// One Gibbs cycle for whichever family the dataset carries.
pub fn gibbs_cycle(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    options: &CycleOptions,
    rng: &mut RngStream,
) -> Result<()> {
    match data.family() {
        Family::Gaussian => gaussian::gibbs_cycle_gaussian(state, data, prior, options, rng),
        Family::Bernoulli => bernoulli::gibbs_cycle_bernoulli(state, data, prior, options, rng),
    }
}
