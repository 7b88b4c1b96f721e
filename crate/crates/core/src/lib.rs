//! Bayesian joint latent space models for a network and node attributes,
//! with a cumulative ordered spike-and-slab prior that selects the latent
//! dimension during Gibbs sampling.

pub mod adaptive;
pub mod coss;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod mcmc;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod select;
pub mod simulate;
pub mod study;

pub use error::{Error, Result};
pub use mcmc::{run_chain, Draw, FitMode, PosteriorChain, RunConfig};
pub use model::{Dataset, Family, ModelState, PriorConfig};
pub use rng::RngStream;
