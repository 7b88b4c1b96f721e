//! Gibbs cycle for Gaussian attributes.

use crate::error::Result;
use crate::model::{Dataset, ModelState, PriorConfig};
use crate::rng::RngStream;

use super::{
    attribute_terms, augment_network, impute_cells, update_alpha_all, update_gamma_all,
    update_latent_all, update_loadings_all, update_noise_all, update_shrinkage, CycleOptions,
};

pub fn update_augmentation_network(state: &mut ModelState, data: &Dataset, rng: &mut RngStream) {
    augment_network(state, data, rng, true)
}

pub fn update_alpha(state: &mut ModelState, data: &Dataset, prior: &PriorConfig, rng: &mut RngStream) {
    update_alpha_all(state, data, prior, rng)
}

pub fn update_latent_positions_gaussian(
    state: &mut ModelState,
    data: &Dataset,
    rng: &mut RngStream,
) -> Result<()> {
    let terms = attribute_terms(data, state);
    update_latent_all(state, data, &terms, rng)
}

pub fn update_gamma_gaussian(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    rng: &mut RngStream,
) {
    let terms = attribute_terms(data, state);
    update_gamma_all(state, data, prior, &terms, rng)
}

pub fn update_loadings_gaussian(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    rng: &mut RngStream,
) -> Result<()> {
    let terms = attribute_terms(data, state);
    update_loadings_all(state, data, prior, &terms, rng)
}

pub fn update_noise_variance(
    state: &mut ModelState,
    data: &Dataset,
    prior: &PriorConfig,
    rng: &mut RngStream,
) -> Result<()> {
    update_noise_all(state, data, prior, rng)
}

/// impute → d^A → α → Z → γ → B → σ² → (ρ, v, θ)
pub fn gibbs_cycle_gaussian(
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
    update_alpha_all(state, data, prior, rng);
    // W and U depend only on σ², which is updated after γ and B
    let terms = attribute_terms(data, state);
    update_latent_all(state, data, &terms, rng)?;
    update_gamma_all(state, data, prior, &terms, rng);
    update_loadings_all(state, data, prior, &terms, rng)?;
    update_noise_all(state, data, prior, rng)?;
    if options.update_shrinkage {
        update_shrinkage(state, prior, rng)?;
    }
    Ok(())
}
