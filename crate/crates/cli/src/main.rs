use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jlsm::evaluate::{dimension_posterior, posterior_mean_state, posterior_mode_dimension, Recovery};
use jlsm::io::{
    load_chain, persist_chain, read_config, read_dataset, read_truth, write_dataset, write_truth,
};
use jlsm::select::{fit_fixed_dimension, information_criteria, kfold_cv};
use jlsm::simulate::{generate_dataset, SimDesign};
use jlsm::study::{
    density_grid, figure3_row, replication_row, run_cell, summarize, table1_row, ModelVariant,
    FIGURE3_HEADER, REPLICATION_HEADER, TABLE1_HEADER,
};
use jlsm::{run_chain, Error, Family, RngStream, RunConfig};

const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "jlsm", version, about = "Joint latent space models for networks with node attributes")]
struct Cli {
    /// Worker threads for the rayon pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a network and attributes from the model.
    Simulate(SimulateArgs),
    /// Fit the model and persist the posterior chain.
    Fit(FitArgs),
    /// Summarize a persisted chain, optionally against the true parameters.
    Evaluate(EvaluateArgs),
    /// Compare fixed dimensions by information criteria and cross-validation.
    Select(SelectArgs),
    /// Dimension-recovery study over one (n, q) cell.
    ReplicateStudy1(Study1Args),
    /// JLSM against the network-only model across network densities.
    ReplicateStudy2(Study2Args),
}

#[derive(Args)]
struct DataArgs {
    /// Edge list with a `nodes <n>` header.
    #[arg(long)]
    edges: PathBuf,
    /// Attribute CSV with a header row; `NA` marks a missing cell.
    #[arg(long)]
    attributes: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> jlsm::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => read_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    q: usize,
    #[arg(long, default_value_t = 3)]
    k0: usize,
    #[arg(long, default_value = "gaussian")]
    family: Family,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    alpha_low: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    alpha_high: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for edges.txt, attributes.csv and truth.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Chain directory to create.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Chain directory written by `fit`.
    #[arg(long)]
    chain: PathBuf,
    /// truth.txt written by `simulate`.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Candidate dimensions, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    candidates: Vec<usize>,
    /// Number of node folds; 0 skips cross-validation.
    #[arg(long, default_value_t = 0)]
    folds: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Study1Args {
    /// Cell name such as n100q20.
    #[arg(long, default_value = "n100q20")]
    cell: String,
    #[arg(long, default_value = "gaussian")]
    family: Family,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[command(flatten)]
    run: RunArgs,
    /// Summary CSV; per-replication rows go next to it with a `.reps.csv` suffix.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Study2Args {
    /// Number of α ranges from the sparse to the dense end.
    #[arg(long, default_value_t = 2)]
    points: usize,
    #[arg(long, default_value = "gaussian")]
    family: Family,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> jlsm::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_cell(cell: &str) -> jlsm::Result<(usize, usize)> {
    let bad = || Error::Config(format!("cell '{cell}' is not of the form n<N>q<Q>"));
    let rest = cell.strip_prefix('n').ok_or_else(bad)?;
    let (n, q) = rest.split_once('q').ok_or_else(bad)?;
    Ok((n.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?))
}

fn simulate(a: &SimulateArgs) -> jlsm::Result<()> {
    let design = SimDesign {
        k0: a.k0,
        alpha_range: (a.alpha_low, a.alpha_high),
        ..SimDesign::study1(a.n, a.q, a.family)
    };
    let mut rng = RngStream::new(a.seed, 0);
    let (data, truth) = generate_dataset(&design, &mut rng)?;
    let names: Vec<String> = (1..=a.q).map(|j| format!("y{j}")).collect();
    write_dataset(&a.out, &data, &names)?;
    write_truth(&a.out.join("truth.txt"), &truth)?;
    println!("density={}", truth.density);
    Ok(())
}

fn fit(a: &FitArgs) -> jlsm::Result<()> {
    let cfg = a.run.load()?;
    let (data, _) = read_dataset(&a.data.edges, a.data.attributes.as_deref(), cfg.family)?;
    let chain = run_chain(&data, &cfg)?;
    persist_chain(&a.out, &chain, &cfg)?;
    println!("kept={} khat={}", chain.len(), posterior_mode_dimension(&chain)?);
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> jlsm::Result<()> {
    let (chain, _) = load_chain(&a.chain, None)?;
    let mut s = String::new();
    let w = |s: &mut String, k: &str, v: String| writeln!(s, "{k}={v}").expect("writing to a String");
    w(&mut s, "draws", chain.len().to_string());
    w(&mut s, "khat", posterior_mode_dimension(&chain)?.to_string());
    for (k, c) in dimension_posterior(&chain.kstar) {
        w(&mut s, &format!("p_k{k}"), (c as f64 / chain.len() as f64).to_string());
    }
    if let Some(t) = &a.truth {
        let truth = read_truth(t)?;
        let rec = Recovery::compute(&posterior_mean_state(&chain)?, &truth)?;
        w(&mut s, "delta_alpha", rec.delta_alpha.to_string());
        w(&mut s, "delta_gamma", rec.delta_gamma.to_string());
        w(&mut s, "delta_b", rec.delta_b.to_string());
        w(&mut s, "delta_z", rec.delta_z.to_string());
    }
    emit(a.out.as_deref(), &s)
}

fn select(a: &SelectArgs) -> jlsm::Result<()> {
    let cfg = a.run.load()?;
    let (data, _) = read_dataset(&a.data.edges, a.data.attributes.as_deref(), cfg.family)?;
    let mut s = String::from("k,aic,bic,dic,waic\n");
    for &k in &a.candidates {
        let chain = fit_fixed_dimension(&data, k, &cfg)?;
        let c = information_criteria(&chain, &data)?;
        writeln!(s, "{},{},{},{},{}", c.k, c.aic, c.bic, c.dic, c.waic).expect("writing to a String");
    }
    if a.folds > 0 {
        let mut rng = RngStream::new(cfg.seed, 1);
        let cv = kfold_cv(&data, &a.candidates, a.folds, &cfg, &mut rng)?;
        s.push_str("\nk,cv_mean,cv_se\n");
        for (c, &k) in cv.candidates.iter().enumerate() {
            writeln!(s, "{k},{},{}", cv.mean[c], cv.se[c]).expect("writing to a String");
        }
        writeln!(s, "\nselected={}\nselected_one_se={}", cv.selected, cv.selected_one_se)
            .expect("writing to a String");
    }
    emit(a.out.as_deref(), &s)
}

fn write_reps(out: Option<&Path>, rows: &str) -> jlsm::Result<()> {
    if let Some(p) = out {
        emit(Some(&p.with_extension("reps.csv")), rows)?;
    }
    Ok(())
}

fn study1(a: &Study1Args) -> jlsm::Result<()> {
    let (n, q) = parse_cell(&a.cell)?;
    let cfg = a.run.load()?;
    let design = SimDesign::study1(n, q, a.family);
    let results = run_cell(&design, &cfg, &[ModelVariant::Joint], cfg.seed, a.reps)?;
    let summary = summarize(&design, ModelVariant::Joint, &results)?;
    let mut reps = format!("{REPLICATION_HEADER}\n");
    for r in &results {
        reps.push_str(&replication_row(r));
        reps.push('\n');
    }
    write_reps(a.out.as_deref(), &reps)?;
    emit(a.out.as_deref(), &format!("{TABLE1_HEADER}\n{}\n", table1_row(&summary)))
}

fn study2(a: &Study2Args) -> jlsm::Result<()> {
    let cfg = a.run.load()?;
    let variants = [ModelVariant::Joint, ModelVariant::Network];
    let mut s = format!("{FIGURE3_HEADER}\n");
    let mut reps = format!("alpha_low,alpha_high,{REPLICATION_HEADER}\n");
    for range in density_grid(a.points) {
        let design = SimDesign {
            alpha_range: range,
            ..SimDesign::study1(100, 20, a.family)
        };
        let results = run_cell(&design, &cfg, &variants, cfg.seed, a.reps)?;
        for v in variants {
            s.push_str(&figure3_row(&design, &summarize(&design, v, &results)?));
            s.push('\n');
        }
        for r in &results {
            writeln!(reps, "{},{},{}", range.0, range.1, replication_row(r)).expect("writing to a String");
        }
    }
    write_reps(a.out.as_deref(), &reps)?;
    emit(a.out.as_deref(), &s)
}

fn run(cli: &Cli) -> jlsm::Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Select(a) => select(a),
        Command::ReplicateStudy1(a) => study1(a),
        Command::ReplicateStudy2(a) => study2(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error kind=config message=\"{e}\"");
            return ExitCode::from(EXIT_DATA);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={} message=\"{}\"", e.kind(), e.to_string().replace('"', "'"));
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_DATA })
        }
    }
}
