//! Gibbs cycle for Bernoulli attributes.

use crate::error::Result;
use crate::model::{Dataset, ModelState, PriorConfig};
use crate::rng::RngStream;

use super::{
    attribute_terms, augment_attributes, augment_network, impute_cells, update_alpha_all,
    update_gamma_all, update_latent_all, update_loadings_all, update_shrinkage, CycleOptions,
};

pub fn update_augmentation_attributes(
    state: &mut ModelState,
    data: &Dataset,
    rng: &mut RngStream,
) -> Result<()> {
    augment_attributes(state, data, rng, true)
}

pub fn update_latent_positions_bernoulli(
    state: &mut ModelState,
    data: &Dataset,
    rng: &mut RngStream,
) -> Result<()> {
    let terms = attribute_terms(data, state);
    update_latent_all(state, data, &terms, rng)
}

pub fn update_gamma_bernoulli(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    rng: &mut RngStream,
) {
    let terms = attribute_terms(data, state);
    update_gamma_all(state, data, prior, &terms, rng)
}

pub fn update_loadings_bernoulli(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    rng: &mut RngStream,
) -> Result<()> {
    let terms = attribute_terms(data, state);
    update_loadings_all(state, data, prior, &terms, rng)
}

/// impute → d^A → d^Y → α → Z → γ → B → (ρ, v, θ)
pub fn gibbs_cycle_bernoulli(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    options: &CycleOptions,
    rng: &mut RngStream,
) -> Result<()> {
    if options.impute {
        impute_cells(state, data, rng)?;
    }
    augment_network(state, data, rng, options.parallel);
    augment_attributes(state, data, rng, options.parallel)?;
    update_alpha_all(state, data, prior, rng);
    let terms = attribute_terms(data, state);
    update_latent_all(state, data, &terms, rng)?;
    update_gamma_all(state, data, prior, &terms, rng);
    update_loadings_all(state, data, prior, &terms, rng)?;
    if options.update_shrinkage {
        update_shrinkage(state, prior, rng)?;
    }
    Ok(())
}

/// Draws every missing attribute cell from its predictive law and returns
/// the completed matrix, which the rest of the cycle treats as data.
pub fn impute_missing_attributes(
    state: &mut ModelState,
    data: &Dataset,
    rng: &mut RngStream,
) -> Result<nalgebra::DMatrix<f64>> {
    impute_cells(state, data, rng)
}
