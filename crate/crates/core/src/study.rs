//! Replication harness for the simulation studies.

use rayon::prelude::*;

use crate::error::Result;
use crate::evaluate::{dimension_accuracy, mode_dimension, posterior_mean_state, Recovery};
use crate::mcmc::{run_chain, RunConfig};
use crate::model::Family;
use crate::rng::RngStream;
use crate::simulate::{generate_dataset, SimDesign};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelVariant {
    /// Network and attributes.
    Joint,
    /// Network only.
    Network,
}

impl ModelVariant {
    pub fn label(self) -> &'static str {
        match self {
            ModelVariant::Joint => "JLSM",
            ModelVariant::Network => "Network",
        }
    }
}

/// Outcome of fitting one model to one simulated dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationResult {
    pub replication: usize,
    pub variant: ModelVariant,
    pub density: f64,
    pub khat: usize,
    pub delta_alpha: f64,
    /// NaN for the network-only model.
    pub delta_gamma: f64,
    /// NaN for the network-only model.
    pub delta_b: f64,
    pub delta_z: f64,
}

/// Seeds of replication `rep`: one stream for the data, one for the fit.
pub fn replication_seeds(base_seed: u64, rep: usize) -> (RngStream, u64) {
    let mut root = RngStream::new(base_seed, rep as u64);
    let fit_seed = root.split_key();
    (RngStream::new(root.split_key(), 0), fit_seed)
}

/// Simulates replication `rep` and fits each requested variant to it.
pub fn run_replication(
    design: &SimDesign,
    run: &RunConfig,
    variants: &[ModelVariant],
    base_seed: u64,
    rep: usize,
) -> Result<Vec<ReplicationResult>> {
    let (mut data_rng, fit_seed) = replication_seeds(base_seed, rep);
    let (data, truth) = generate_dataset(design, &mut data_rng)?;
    let mut out = Vec::with_capacity(variants.len());
    for &variant in variants {
        let mut cfg = run.clone();
        cfg.seed = fit_seed;
        cfg.family = design.family;
        let (fit_data, fit_truth) = match variant {
            ModelVariant::Joint => (data.clone(), truth.clone()),
            ModelVariant::Network => {
                let mut t = truth.clone();
                t.gamma0 = nalgebra::DVector::zeros(0);
                t.b0 = nalgebra::DMatrix::zeros(0, truth.b0.ncols());
                (data.network_only(), t)
            }
        };
        let chain = run_chain(&fit_data, &cfg)?;
        let est = posterior_mean_state(&chain)?;
        let rec = Recovery::compute(&est, &fit_truth)?;
        let attr = |v: f64| if variant == ModelVariant::Joint { v } else { f64::NAN };
        out.push(ReplicationResult {
            replication: rep,
            variant,
            density: truth.density,
            khat: mode_dimension(&chain.kstar)?,
            delta_alpha: rec.delta_alpha,
            delta_gamma: attr(rec.delta_gamma),
            delta_b: attr(rec.delta_b),
            delta_z: rec.delta_z,
        });
    }
    Ok(out)
}

/// Runs `reps` replications on the rayon pool. Results are in replication
/// order and do not depend on the number of threads.
pub fn run_cell(
    design: &SimDesign,
    run: &RunConfig,
    variants: &[ModelVariant],
    base_seed: u64,
    reps: usize,
) -> Result<Vec<ReplicationResult>> {
    let per_rep: Vec<Vec<ReplicationResult>> = (0..reps)
        .into_par_iter()
        .map(|rep| run_replication(design, run, variants, base_seed, rep))
        .collect::<Result<_>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// Mean and standard deviation (divisor len − 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(x: &[f64]) -> Self {
        Self {
            mean: crate::diagnostics::mean(x),
            sd: crate::diagnostics::sample_variance(x).sqrt(),
        }
    }

    fn cell(&self) -> String {
        if self.mean.is_nan() {
            "--".to_string()
        } else {
            format!("{:.3} ({:.3})", self.mean, self.sd)
        }
    }
}

/// One row of the Table-1 layout.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub family: Family,
    pub n: usize,
    pub q: usize,
    pub variant: ModelVariant,
    pub reps: usize,
    pub density: MeanSd,
    pub delta_alpha: MeanSd,
    pub delta_gamma: MeanSd,
    pub delta_b: MeanSd,
    pub delta_z: MeanSd,
    pub accuracy: f64,
    pub mab: f64,
}

pub fn summarize(
    design: &SimDesign,
    variant: ModelVariant,
    results: &[ReplicationResult],
) -> Result<CellSummary> {
    let rows: Vec<&ReplicationResult> = results.iter().filter(|r| r.variant == variant).collect();
    let col = |f: fn(&ReplicationResult) -> f64| -> MeanSd {
        MeanSd::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>())
    };
    let khat: Vec<usize> = rows.iter().map(|r| r.khat).collect();
    let acc = dimension_accuracy(&khat, design.k0)?;
    Ok(CellSummary {
        family: design.family,
        n: design.n,
        q: design.q,
        variant,
        reps: rows.len(),
        density: col(|r| r.density),
        delta_alpha: col(|r| r.delta_alpha),
        delta_gamma: col(|r| r.delta_gamma),
        delta_b: col(|r| r.delta_b),
        delta_z: col(|r| r.delta_z),
        accuracy: acc.accuracy,
        mab: acc.mab,
    })
}

pub const TABLE1_HEADER: &str = "Y,(n,q),Model,Δα,Δγ,ΔB,ΔZ,Acc (MAB)";

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

pub fn table1_row(s: &CellSummary) -> String {
    let family = match s.family {
        Family::Gaussian => "Gaussian",
        Family::Bernoulli => "Bernoulli",
    };
    [
        family.to_string(),
        quote(&format!("({},{})", s.n, s.q)),
        s.variant.label().to_string(),
        s.delta_alpha.cell(),
        s.delta_gamma.cell(),
        s.delta_b.cell(),
        s.delta_z.cell(),
        format!("{:.3} ({:.3})", s.accuracy, s.mab),
    ]
    .join(",")
}

pub const REPLICATION_HEADER: &str =
    "replication,model,density,khat,delta_alpha,delta_gamma,delta_b,delta_z";

pub fn replication_row(r: &ReplicationResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        r.replication,
        r.variant.label(),
        r.density,
        r.khat,
        r.delta_alpha,
        r.delta_gamma,
        r.delta_b,
        r.delta_z
    )
}

pub const FIGURE3_HEADER: &str = "alpha_low,alpha_high,density,model,delta_z,delta_z_sd,acc";

pub fn figure3_row(design: &SimDesign, s: &CellSummary) -> String {
    format!(
        "{},{},{:.4},{},{:.4},{:.4},{:.3}",
        design.alpha_range.0,
        design.alpha_range.1,
        s.density.mean,
        s.variant.label(),
        s.delta_z.mean,
        s.delta_z.sd,
        s.accuracy
    )
}

/// α ranges interpolating between the sparse and dense ends of the density
/// study, `points` values in all.
pub fn density_grid(points: usize) -> Vec<(f64, f64)> {
    let (sparse, dense) = ((-3.0, -1.0), (-0.375, -0.125));
    if points <= 1 {
        return vec![sparse];
    }
    (0..points)
        .map(|p| {
            let t = p as f64 / (points - 1) as f64;
            (
                sparse.0 + t * (dense.0 - sparse.0),
                sparse.1 + t * (dense.1 - sparse.1),
            )
        })
        .collect()
}
