//! Chain directories: one comma-separated file per parameter with one kept
//! iteration per row, a canonical copy of the run configuration, and a
//! manifest tying them together.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use super::config::{config_hash, parse_config, write_config};
use super::{parse_error, read_text, write_text};
use crate::error::{Error, Result};
use crate::mcmc::{Draw, PosteriorChain, RunConfig};
use crate::model::Family;
use crate::simulate::GroundTruth;

const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub format: u32,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub kept: usize,
    pub family: Family,
    pub n: usize,
    pub q: usize,
}

impl Manifest {
    fn render(&self) -> String {
        format!(
            "format = {}\nversion = {}\nconfig_hash = {}\nseed = {}\nkept = {}\nfamily = {}\nn = {}\nq = {}\n",
            self.format, self.version, self.config_hash, self.seed, self.kept, self.family, self.n, self.q
        )
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut get = std::collections::HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_error(path, i + 1, "expected key = value"))?;
            get.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        }
        let field = |k: &str| -> Result<(usize, String)> {
            get.get(k)
                .cloned()
                .ok_or_else(|| manifest_error(path, format!("missing field '{k}'")))
        };
        fn num<T: std::str::FromStr>(path: &Path, (line, v): (usize, String)) -> Result<T> {
            v.parse().map_err(|_| parse_error(path, line, format!("bad value '{v}'")))
        }
        Ok(Self {
            format: num(path, field("format")?)?,
            version: field("version")?.1,
            config_hash: field("config_hash")?.1,
            seed: num(path, field("seed")?)?,
            kept: num(path, field("kept")?)?,
            family: field("family")?.1.parse()?,
            n: num(path, field("n")?)?,
            q: num(path, field("q")?)?,
        })
    }
}

fn manifest_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Manifest {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn push_row<I: IntoIterator<Item = String>>(out: &mut String, fields: I) {
    let mut first = true;
    for f in fields {
        if !first {
            out.push(',');
        }
        out.push_str(&f);
        first = false;
    }
    out.push('\n');
}

fn matrix_fields(m: &DMatrix<f64>) -> impl Iterator<Item = String> + '_ {
    let k = m.ncols();
    std::iter::once(k.to_string())
        .chain((0..m.nrows()).flat_map(move |i| (0..k).map(move |h| m[(i, h)].to_string())))
}

/// Writes `chain` and `config` into `dir`, creating it if needed.
pub fn persist_chain(dir: &Path, chain: &PosteriorChain, config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let first = chain.draws.first().ok_or(Error::EmptyChain)?;
    let manifest = Manifest {
        format: FORMAT_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config),
        seed: config.seed,
        kept: chain.len(),
        family: chain.family,
        n: first.alpha.len(),
        q: first.gamma.len(),
    };
    let mut files: Vec<(&str, String)> = ["alpha", "gamma", "sigma2", "z", "b", "theta", "rho", "kstar", "loglik"]
        .iter()
        .map(|&name| (name, String::new()))
        .collect();
    for (s, d) in chain.draws.iter().enumerate() {
        let it = d.iteration.to_string();
        let vec_row = |v: &DVector<f64>| -> Vec<String> {
            std::iter::once(it.clone()).chain(v.iter().map(|x| x.to_string())).collect()
        };
        push_row(&mut files[0].1, vec_row(&d.alpha));
        push_row(&mut files[1].1, vec_row(&d.gamma));
        push_row(&mut files[2].1, vec_row(&d.sigma2));
        push_row(&mut files[3].1, std::iter::once(it.clone()).chain(matrix_fields(&d.z)));
        push_row(&mut files[4].1, std::iter::once(it.clone()).chain(matrix_fields(&d.b)));
        push_row(
            &mut files[5].1,
            [it.clone(), d.theta.len().to_string()]
                .into_iter()
                .chain(d.theta.iter().map(|x| x.to_string())),
        );
        push_row(
            &mut files[6].1,
            [it.clone(), d.rho.len().to_string()]
                .into_iter()
                .chain(d.rho.iter().map(|x| x.to_string())),
        );
        push_row(&mut files[7].1, [it.clone(), chain.kstar[s].to_string()]);
        push_row(&mut files[8].1, [it.clone(), chain.loglik[s].to_string()]);
    }
    if !chain.imputed_cells.is_empty() {
        let mut text = String::new();
        push_row(
            &mut text,
            std::iter::once("iteration".to_string())
                .chain(chain.imputed_cells.iter().map(|(i, j)| format!("{i}:{j}"))),
        );
        for (d, vals) in chain.draws.iter().zip(&chain.imputed) {
            push_row(
                &mut text,
                std::iter::once(d.iteration.to_string()).chain(vals.iter().map(|x| x.to_string())),
            );
        }
        files.push(("imputed", text));
    }
    for (name, text) in &files {
        write_text(&dir.join(format!("{name}.csv")), text)?;
    }
    write_text(&dir.join("config.txt"), &write_config(config))?;
    write_text(&dir.join("manifest.txt"), &manifest.render())
}

struct Rows {
    path: PathBuf,
    rows: Vec<Vec<String>>,
}

impl Rows {
    fn read(path: PathBuf, expected: usize) -> Result<Self> {
        let text = read_text(&path)?;
        let rows: Vec<Vec<String>> = text
            .lines()
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        if rows.len() != expected {
            return Err(manifest_error(
                &path,
                format!("{} rows but the manifest says {expected}", rows.len()),
            ));
        }
        Ok(Self { path, rows })
    }

    fn num<T: std::str::FromStr>(&self, r: usize, c: usize) -> Result<T> {
        let f = self.rows[r]
            .get(c)
            .ok_or_else(|| parse_error(&self.path, r + 1, format!("missing field {}", c + 1)))?;
        f.parse()
            .map_err(|_| parse_error(&self.path, r + 1, format!("bad value '{f}'")))
    }

    fn tail<T: std::str::FromStr>(&self, r: usize, from: usize, len: usize) -> Result<Vec<T>> {
        if self.rows[r].len() != from + len {
            return Err(parse_error(
                &self.path,
                r + 1,
                format!("expected {} fields, found {}", from + len, self.rows[r].len()),
            ));
        }
        (from..from + len).map(|c| self.num(r, c)).collect()
    }

    fn vector(&self, r: usize, len: usize) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.tail(r, 1, len)?))
    }

    fn matrix(&self, r: usize, nrows: usize) -> Result<DMatrix<f64>> {
        let k: usize = self.num(r, 1)?;
        let vals: Vec<f64> = self.tail(r, 2, nrows * k)?;
        Ok(DMatrix::from_row_slice(nrows, k, &vals))
    }
}

/// Reads a chain directory. The stored configuration must hash to the value
/// in the manifest, and to the hash of `expected` when one is given.
pub fn load_chain(dir: &Path, expected: Option<&RunConfig>) -> Result<(PosteriorChain, RunConfig)> {
    let mpath = dir.join("manifest.txt");
    let manifest = Manifest::parse(&read_text(&mpath)?, &mpath)?;
    if manifest.format != FORMAT_VERSION {
        return Err(manifest_error(&mpath, format!("unsupported format {}", manifest.format)));
    }
    let cpath = dir.join("config.txt");
    let config = parse_config(&read_text(&cpath)?, &cpath)?;
    if config_hash(&config) != manifest.config_hash {
        return Err(manifest_error(&mpath, "config.txt does not match the recorded config hash"));
    }
    if let Some(exp) = expected {
        if config_hash(exp) != manifest.config_hash {
            return Err(manifest_error(&mpath, "chain was produced by a different configuration"));
        }
    }
    let s = manifest.kept;
    let read = |name: &str| Rows::read(dir.join(format!("{name}.csv")), s);
    let (alpha, gamma, sigma2, z, b) = (read("alpha")?, read("gamma")?, read("sigma2")?, read("z")?, read("b")?);
    let (theta, rho, kstar, loglik) = (read("theta")?, read("rho")?, read("kstar")?, read("loglik")?);
    let n_sigma = if manifest.family == Family::Gaussian { manifest.q } else { 0 };

    let mut chain = PosteriorChain::new(manifest.family);
    chain.all_columns_active = matches!(config.mode, crate::mcmc::FitMode::Fixed { .. });
    for r in 0..s {
        let iteration: usize = alpha.num(r, 0)?;
        let k_theta: usize = theta.num(r, 1)?;
        let k_rho: usize = rho.num(r, 1)?;
        chain.draws.push(Draw {
            iteration,
            alpha: alpha.vector(r, manifest.n)?,
            gamma: gamma.vector(r, manifest.q)?,
            sigma2: sigma2.vector(r, n_sigma)?,
            z: z.matrix(r, manifest.n)?,
            b: b.matrix(r, manifest.q)?,
            theta: theta.tail(r, 2, k_theta)?,
            rho: rho.tail(r, 2, k_rho)?,
        });
        chain.kstar.push(kstar.num(r, 1)?);
        chain.loglik.push(loglik.num(r, 1)?);
    }
    let ipath = dir.join("imputed.csv");
    if ipath.exists() {
        let rows = Rows::read(ipath.clone(), s + 1)?;
        let header = &rows.rows[0];
        for f in &header[1..] {
            let cell = f
                .split_once(':')
                .and_then(|(i, j)| Some((i.parse().ok()?, j.parse().ok()?)))
                .ok_or_else(|| parse_error(&ipath, 1, format!("bad cell '{f}'")))?;
            chain.imputed_cells.push(cell);
        }
        let m = chain.imputed_cells.len();
        for r in 1..=s {
            chain.imputed.push(rows.tail(r, 1, m)?);
        }
    }
    Ok((chain, config))
}

/// Writes the generating parameters of a simulated dataset.
pub fn write_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "density,{}", truth.density).expect("writing to a String");
    push_row(&mut s, std::iter::once("alpha".to_string()).chain(truth.alpha0.iter().map(|x| x.to_string())));
    push_row(&mut s, std::iter::once("gamma".to_string()).chain(truth.gamma0.iter().map(|x| x.to_string())));
    push_row(
        &mut s,
        ["z".to_string(), truth.z0.nrows().to_string()].into_iter().chain(matrix_fields(&truth.z0)),
    );
    push_row(
        &mut s,
        ["b".to_string(), truth.b0.nrows().to_string()].into_iter().chain(matrix_fields(&truth.b0)),
    );
    write_text(path, &s)
}

pub fn read_truth(path: &Path) -> Result<GroundTruth> {
    let text = read_text(path)?;
    let lines: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    let labels = ["density", "alpha", "gamma", "z", "b"];
    if lines.len() != labels.len() {
        return Err(parse_error(path, lines.len(), "expected 5 lines"));
    }
    for (i, (l, want)) in lines.iter().zip(labels).enumerate() {
        if l[0] != want {
            return Err(parse_error(path, i + 1, format!("expected '{want}' row")));
        }
    }
    let nums = |i: usize, from: usize| -> Result<Vec<f64>> {
        lines[i][from..]
            .iter()
            .map(|f| f.parse().map_err(|_| parse_error(path, i + 1, format!("bad value '{f}'"))))
            .collect()
    };
    let dims = |i: usize| -> Result<(usize, usize)> {
        let r = lines[i].get(1).and_then(|v| v.parse().ok());
        let c = lines[i].get(2).and_then(|v| v.parse().ok());
        r.zip(c).ok_or_else(|| parse_error(path, i + 1, "bad dimensions"))
    };
    let matrix = |i: usize| -> Result<DMatrix<f64>> {
        let (r, c) = dims(i)?;
        let v = nums(i, 3)?;
        if v.len() != r * c {
            return Err(parse_error(path, i + 1, "wrong number of entries"));
        }
        Ok(DMatrix::from_row_slice(r, c, &v))
    };
    let density = nums(0, 1)?;
    Ok(GroundTruth {
        density: *density.first().ok_or_else(|| parse_error(path, 1, "missing density"))?,
        alpha0: DVector::from_vec(nums(1, 1)?),
        gamma0: DVector::from_vec(nums(2, 1)?),
        z0: matrix(3)?,
        b0: matrix(4)?,
    })
}
