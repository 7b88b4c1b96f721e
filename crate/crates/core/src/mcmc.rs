//! Chain driver: Gibbs cycles, adaptation, burn-in and thinning.

use nalgebra::{DMatrix, DVector};

use crate::adaptive::{maybe_adapt, AdaptationSchedule};
use crate::error::{Error, Result};
use crate::model::{joint_log_likelihood, Dataset, Family, ModelState, PriorConfig};
use crate::rng::RngStream;
use crate::sampler::{gibbs_cycle, initial_state, CycleOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMode {
    /// Shrinkage prior with adaptive truncation starting at `prior.k_init`.
    Coss,
    /// Independent N(0, 1) latent priors in exactly `k` dimensions.
    Fixed { k: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub prior: PriorConfig,
    pub schedule: AdaptationSchedule,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub family: Family,
    pub mode: FitMode,
    pub seed: u64,
    pub impute: bool,
    /// Dyad-parallel Pólya-Gamma draws; results do not depend on it.
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            prior: PriorConfig::default(),
            schedule: AdaptationSchedule::default(),
            iterations: 25_000,
            burn_in: 10_000,
            thin: 5,
            family: Family::Gaussian,
            mode: FitMode::Coss,
            seed: 0,
            impute: false,
            parallel: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        self.schedule.validate()?;
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be below iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if let FitMode::Fixed { k: 0 } = self.mode {
            return Err(Error::Config("fixed mode needs k >= 1".into()));
        }
        Ok(())
    }

    /// Number of iterations the chain keeps.
    pub fn kept(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    pub fn initial_k(&self) -> usize {
        match self.mode {
            FitMode::Coss => self.prior.k_init,
            FitMode::Fixed { k } => k,
        }
    }
}

/// The stored part of one kept iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Draw {
    pub iteration: usize,
    pub alpha: DVector<f64>,
    pub gamma: DVector<f64>,
    pub z: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub sigma2: DVector<f64>,
    pub theta: Vec<f64>,
    pub rho: Vec<usize>,
}

impl Draw {
    pub fn from_state(iteration: usize, s: &ModelState) -> Self {
        Self {
            iteration,
            alpha: s.alpha.clone(),
            gamma: s.gamma.clone(),
            z: s.z.clone(),
            b: s.b.clone(),
            sigma2: s.sigma2.clone(),
            theta: s.shrinkage.theta.clone(),
            rho: s.shrinkage.rho.clone(),
        }
    }

    pub fn k(&self) -> usize {
        self.z.ncols()
    }

    /// Columns in the slab (ρ_h > h), or every column when `all_active`.
    pub fn active_columns(&self, all_active: bool) -> Vec<usize> {
        (0..self.k())
            .filter(|&h| all_active || self.rho[h] > h + 1)
            .collect()
    }

    pub fn params(&self) -> crate::model::ParamsRef<'_> {
        crate::model::ParamsRef {
            alpha: &self.alpha,
            gamma: &self.gamma,
            z: &self.z,
            b: &self.b,
            sigma2: &self.sigma2,
        }
    }
}

/// Kept iterations of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorChain {
    pub family: Family,
    /// Fixed-dimension fit: every column counts as active.
    pub all_columns_active: bool,
    pub draws: Vec<Draw>,
    /// K* at each kept iteration, recorded before any adaptation.
    pub kstar: Vec<usize>,
    /// Joint log-likelihood at each kept iteration.
    pub loglik: Vec<f64>,
    /// Missing cells in row-major order, when imputation is on.
    pub imputed_cells: Vec<(usize, usize)>,
    /// Values of `imputed_cells` at each kept iteration.
    pub imputed: Vec<Vec<f64>>,
}

impl PosteriorChain {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            all_columns_active: false,
            draws: Vec::new(),
            kstar: Vec::new(),
            loglik: Vec::new(),
            imputed_cells: Vec::new(),
            imputed: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// True when every kept draw has the same number of columns.
    pub fn constant_k(&self) -> Option<usize> {
        let k = self.draws.first()?.k();
        self.draws.iter().all(|d| d.k() == k).then_some(k)
    }
}

/// Runs one chain from a fresh initial state.
pub fn run_chain(data: &Dataset, config: &RunConfig) -> Result<PosteriorChain> {
    config.validate()?;
    if data.family() != config.family {
        return Err(Error::Config(format!(
            "dataset family is {} but the run config says {}",
            data.family(),
            config.family
        )));
    }
    let mut rng = RngStream::new(config.seed, 0);
    let fixed = matches!(config.mode, FitMode::Fixed { .. });
    let mut state = initial_state(data, &config.prior, config.initial_k(), fixed, &mut rng)?;
    run_from(data, config, &mut state, &mut rng)
}

/// Runs `config.iterations` cycles starting from `state`.
pub fn run_from(
    data: &Dataset,
    config: &RunConfig,
    state: &mut ModelState,
    rng: &mut RngStream,
) -> Result<PosteriorChain> {
    let fixed = matches!(config.mode, FitMode::Fixed { .. });
    let options = CycleOptions {
        parallel: config.parallel,
        impute: config.impute,
        update_shrinkage: !fixed,
    };
    let mut chain = PosteriorChain::new(data.family());
    chain.all_columns_active = fixed;
    chain.draws.reserve(config.kept());
    if config.impute {
        chain.imputed_cells = data.missing_cells();
    }
    for t in 1..=config.iterations {
        gibbs_cycle(state, data, &config.prior, &options, rng)?;
        if t > config.burn_in && (t - config.burn_in) % config.thin == 0 {
            chain.kstar.push(if fixed {
                state.k()
            } else {
                state.shrinkage.active_dimension()
            });
            chain.loglik.push(joint_log_likelihood(data, state)?);
            chain.draws.push(Draw::from_state(t, state));
            if config.impute {
                let y = state.imputed.as_ref().expect("imputation ran this cycle");
                chain
                    .imputed
                    .push(chain.imputed_cells.iter().map(|&(i, j)| y[(i, j)]).collect());
            }
        }
        if !fixed {
            maybe_adapt(state, t, &config.schedule, &config.prior, rng)?;
        }
    }
    Ok(chain)
}
