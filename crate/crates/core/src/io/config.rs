//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{parse_error, read_text};
use crate::error::{Error, Result};
use crate::mcmc::{FitMode, RunConfig};

fn parse_value<T: std::str::FromStr>(path: &Path, line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| parse_error(path, line, format!("bad value '{v}' for {key}")))
}

/// Parses a configuration, starting from the defaults. Unknown keys are
/// rejected; `#` starts a comment.
pub fn parse_config(text: &str, path: &Path) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut mode: Option<String> = None;
    let mut k: Option<usize> = None;
    let mut kappa_set = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(path, line, format!("expected key = value, got '{content}'")))?;
        let (key, v) = (key.trim(), value.trim());
        let p = &mut cfg.prior;
        match key {
            "family" => cfg.family = v.parse().map_err(|_| parse_error(path, line, format!("unknown family '{v}'")))?,
            "mode" => mode = Some(v.to_ascii_lowercase()),
            "k" => k = Some(parse_value(path, line, key, v)?),
            "k_init" => p.k_init = parse_value(path, line, key, v)?,
            "iterations" => cfg.iterations = parse_value(path, line, key, v)?,
            "burn_in" => cfg.burn_in = parse_value(path, line, key, v)?,
            "thin" => cfg.thin = parse_value(path, line, key, v)?,
            "seed" => cfg.seed = parse_value(path, line, key, v)?,
            "impute" => cfg.impute = parse_value(path, line, key, v)?,
            "parallel" => cfg.parallel = parse_value(path, line, key, v)?,
            "sigma_alpha" => p.sigma_alpha = parse_value(path, line, key, v)?,
            "sigma_gamma" => p.sigma_gamma = parse_value(path, line, key, v)?,
            "sigma_b" => p.sigma_b = parse_value(path, line, key, v)?,
            "a_sigma" => p.a_sigma = parse_value(path, line, key, v)?,
            "b_sigma" => p.b_sigma = parse_value(path, line, key, v)?,
            "a_theta" => p.a_theta = parse_value(path, line, key, v)?,
            "b_theta" => p.b_theta = parse_value(path, line, key, v)?,
            "kappa" => {
                p.kappa = parse_value(path, line, key, v)?;
                kappa_set = true;
            }
            "a_stick" => p.a_stick = parse_value(path, line, key, v)?,
            "theta0" => p.theta0 = parse_value(path, line, key, v)?,
            "eta0" => cfg.schedule.eta0 = parse_value(path, line, key, v)?,
            "eta1" => cfg.schedule.eta1 = parse_value(path, line, key, v)?,
            "adapt_start" => cfg.schedule.start = parse_value(path, line, key, v)?,
            other => return Err(parse_error(path, line, format!("unknown key '{other}'"))),
        }
    }
    if !kappa_set {
        cfg.prior.kappa = crate::model::default_kappa(cfg.prior.k_init);
    }
    cfg.mode = match mode.as_deref() {
        None | Some("coss") => FitMode::Coss,
        Some("fixed") => FitMode::Fixed {
            k: k.ok_or_else(|| Error::Config("mode = fixed needs k".into()))?,
        },
        Some(other) => return Err(Error::Config(format!("unknown mode '{other}'"))),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    parse_config(&read_text(path)?, path)
}

/// Canonical text form; every field is written, floats in shortest
/// round-trip notation, so parsing it back gives the same configuration.
pub fn write_config(cfg: &RunConfig) -> String {
    let p = &cfg.prior;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("writing to a String");
    kv("family", cfg.family.to_string());
    match cfg.mode {
        FitMode::Coss => kv("mode", "coss".into()),
        FitMode::Fixed { k } => {
            kv("mode", "fixed".into());
            kv("k", k.to_string());
        }
    }
    kv("k_init", p.k_init.to_string());
    kv("iterations", cfg.iterations.to_string());
    kv("burn_in", cfg.burn_in.to_string());
    kv("thin", cfg.thin.to_string());
    kv("seed", cfg.seed.to_string());
    kv("impute", cfg.impute.to_string());
    kv("parallel", cfg.parallel.to_string());
    kv("sigma_alpha", p.sigma_alpha.to_string());
    kv("sigma_gamma", p.sigma_gamma.to_string());
    kv("sigma_b", p.sigma_b.to_string());
    kv("a_sigma", p.a_sigma.to_string());
    kv("b_sigma", p.b_sigma.to_string());
    kv("a_theta", p.a_theta.to_string());
    kv("b_theta", p.b_theta.to_string());
    kv("kappa", p.kappa.to_string());
    kv("a_stick", p.a_stick.to_string());
    kv("theta0", p.theta0.to_string());
    kv("eta0", cfg.schedule.eta0.to_string());
    kv("eta1", cfg.schedule.eta1.to_string());
    kv("adapt_start", cfg.schedule.start.to_string());
    s
}

/// SHA-256 of the canonical form, hex encoded. The `parallel` switch does
/// not change results and is left out.
pub fn config_hash(cfg: &RunConfig) -> String {
    let canonical: String = write_config(cfg)
        .lines()
        .filter(|l| !l.starts_with("parallel "))
        .map(|l| format!("{l}\n"))
        .collect();
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
