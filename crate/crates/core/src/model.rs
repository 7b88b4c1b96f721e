//! Data and parameter containers, natural-parameter maps and the joint
//! log-likelihood of network and node attributes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::coss::ShrinkageState;
use crate::distributions::log1p_exp;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Gaussian,
    Bernoulli,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gaussian => f.write_str("gaussian"),
            Family::Bernoulli => f.write_str("bernoulli"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "bernoulli" | "binary" => Ok(Family::Bernoulli),
            other => Err(Error::Config(format!("unknown attribute family '{other}'"))),
        }
    }
}

/// An undirected network with node attributes.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    adjacency: DMatrix<f64>,
    attributes: DMatrix<f64>,
    family: Family,
    observed: DMatrix<bool>,
}

impl Dataset {
    /// Validates symmetry, hollowness, binary entries and (for Bernoulli)
    /// binary observed attributes. Unobserved cells are stored as 0.
    pub fn new(
        adjacency: DMatrix<f64>,
        mut attributes: DMatrix<f64>,
        family: Family,
        observed: DMatrix<bool>,
    ) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(Error::InvalidData(format!(
                "adjacency is {}x{}, expected square",
                n,
                adjacency.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 nodes, got {n}")));
        }
        if attributes.nrows() != n {
            return Err(Error::InvalidData(format!(
                "attributes have {} rows for {n} nodes",
                attributes.nrows()
            )));
        }
        if observed.shape() != attributes.shape() {
            return Err(Error::InvalidData(
                "missingness mask shape differs from attributes".into(),
            ));
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::InvalidData(format!("self-loop at node {i}")));
            }
            for j in 0..i {
                let a = adjacency[(i, j)];
                if a != adjacency[(j, i)] {
                    return Err(Error::InvalidData(format!(
                        "adjacency not symmetric at ({i}, {j})"
                    )));
                }
                if a != 0.0 && a != 1.0 {
                    return Err(Error::InvalidData(format!(
                        "adjacency entry ({i}, {j}) = {a} is not binary"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..attributes.ncols() {
                if !observed[(i, j)] {
                    attributes[(i, j)] = 0.0;
                    continue;
                }
                let y = attributes[(i, j)];
                if !y.is_finite() {
                    return Err(Error::InvalidData(format!(
                        "attribute ({i}, {j}) is not finite"
                    )));
                }
                if family == Family::Bernoulli && y != 0.0 && y != 1.0 {
                    return Err(Error::InvalidData(format!(
                        "attribute ({i}, {j}) = {y} is not binary"
                    )));
                }
            }
        }
        Ok(Self {
            adjacency,
            attributes,
            family,
            observed,
        })
    }

    /// Complete-data constructor.
    pub fn complete(adjacency: DMatrix<f64>, attributes: DMatrix<f64>, family: Family) -> Result<Self> {
        let observed = DMatrix::from_element(attributes.nrows(), attributes.ncols(), true);
        Self::new(adjacency, attributes, family, observed)
    }

    /// Same network with the attributes dropped.
    pub fn network_only(&self) -> Self {
        let n = self.n();
        Self {
            adjacency: self.adjacency.clone(),
            attributes: DMatrix::zeros(n, 0),
            family: self.family,
            observed: DMatrix::from_element(n, 0, true),
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn q(&self) -> usize {
        self.attributes.ncols()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn attributes(&self) -> &DMatrix<f64> {
        &self.attributes
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn observed(&self) -> &DMatrix<bool> {
        &self.observed
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.observed[(i, j)]
    }

    pub fn missing_cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for i in 0..self.n() {
            for j in 0..self.q() {
                if !self.observed[(i, j)] {
                    cells.push((i, j));
                }
            }
        }
        cells
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n();
        let mut m = 0;
        for i in 0..n {
            for j in 0..i {
                if self.adjacency[(i, j)] == 1.0 {
                    m += 1;
                }
            }
        }
        m
    }
}

/// Prior hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorConfig {
    pub sigma_alpha: f64,
    pub sigma_gamma: f64,
    pub sigma_b: f64,
    pub a_sigma: f64,
    pub b_sigma: f64,
    pub a_theta: f64,
    pub b_theta: f64,
    pub kappa: f64,
    pub a_stick: f64,
    pub theta0: f64,
    pub k_init: usize,
}

impl PriorConfig {
    /// Simulation-study settings: a_θ = b_θ = 3, a = 8, θ₀ = 0.1,
    /// σ_α = σ_γ = 100, σ_B = 1, k = 8, κ = k².
    pub fn simulation_defaults() -> Self {
        let k_init = 8;
        Self {
            sigma_alpha: 100.0,
            sigma_gamma: 100.0,
            sigma_b: 1.0,
            a_sigma: 1.0,
            b_sigma: 1.0,
            a_theta: 3.0,
            b_theta: 3.0,
            kappa: default_kappa(k_init),
            a_stick: 8.0,
            theta0: 0.1,
            k_init,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("sigma_alpha", self.sigma_alpha),
            ("sigma_gamma", self.sigma_gamma),
            ("sigma_b", self.sigma_b),
            ("a_sigma", self.a_sigma),
            ("b_sigma", self.b_sigma),
            ("a_theta", self.a_theta),
            ("b_theta", self.b_theta),
            ("kappa", self.kappa),
            ("a_stick", self.a_stick),
            ("theta0", self.theta0),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.k_init == 0 {
            return Err(Error::Config("k_init must be at least 1".into()));
        }
        if self.theta0 >= self.b_theta / self.a_theta {
            return Err(Error::Config(format!(
                "theta0 = {} must be below b_theta/a_theta = {}",
                self.theta0,
                self.b_theta / self.a_theta
            )));
        }
        Ok(())
    }
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self::simulation_defaults()
    }
}

/// κ = k², the first-break concentration used when none is given.
pub fn default_kappa(k: usize) -> f64 {
    (k * k) as f64
}

/// Borrowed view of the likelihood-relevant parameters.
#[derive(Clone, Copy, Debug)]
pub struct ParamsRef<'a> {
    pub alpha: &'a DVector<f64>,
    pub gamma: &'a DVector<f64>,
    pub z: &'a DMatrix<f64>,
    pub b: &'a DMatrix<f64>,
    /// Residual variances (Gaussian family); empty for Bernoulli.
    pub sigma2: &'a DVector<f64>,
}

/// Every sampled quantity for one MCMC iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub alpha: DVector<f64>,
    pub gamma: DVector<f64>,
    /// n × k latent positions.
    pub z: DMatrix<f64>,
    /// q × k loadings.
    pub b: DMatrix<f64>,
    pub sigma2: DVector<f64>,
    /// Pólya-Gamma draws for the dyads; symmetric, diagonal unused.
    pub aug_a: DMatrix<f64>,
    /// Pólya-Gamma draws for the attribute cells (Bernoulli family).
    pub aug_y: DMatrix<f64>,
    pub shrinkage: ShrinkageState,
    /// Working attribute matrix with missing cells filled in, when imputing.
    pub imputed: Option<DMatrix<f64>>,
}

impl ModelState {
    pub fn k(&self) -> usize {
        self.z.ncols()
    }

    pub fn params(&self) -> ParamsRef<'_> {
        ParamsRef {
            alpha: &self.alpha,
            gamma: &self.gamma,
            z: &self.z,
            b: &self.b,
            sigma2: &self.sigma2,
        }
    }

    pub fn check_dimensions(&self, data: &Dataset) -> Result<()> {
        let (n, q, k) = (data.n(), data.q(), self.k());
        let ok = self.alpha.len() == n
            && self.gamma.len() == q
            && self.z.nrows() == n
            && self.b.shape() == (q, k)
            && self.shrinkage.k() == k
            && (data.family() == Family::Bernoulli || self.sigma2.len() == q);
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "state (n={}, q={}, k={}) does not match dataset (n={n}, q={q})",
                self.alpha.len(),
                self.gamma.len(),
                k
            )))
        }
    }
}

/// Θᴬ with Θᴬᵢⱼ = αᵢ + αⱼ + zᵢᵀzⱼ.
pub fn natural_params_network(alpha: &DVector<f64>, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = alpha.len();
    if z.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "alpha has length {n} but Z has {} rows",
            z.nrows()
        )));
    }
    let mut theta = z * z.transpose();
    for i in 0..n {
        for j in 0..n {
            theta[(i, j)] += alpha[i] + alpha[j];
        }
    }
    Ok(theta)
}

/// Θʸ with Θʸᵢⱼ = γⱼ + βⱼᵀzᵢ.
pub fn natural_params_attributes(
    gamma: &DVector<f64>,
    z: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let q = gamma.len();
    if b.nrows() != q || b.ncols() != z.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "gamma has length {q}, B is {}x{}, Z is {}x{}",
            b.nrows(),
            b.ncols(),
            z.nrows(),
            z.ncols()
        )));
    }
    let mut theta = z * b.transpose();
    for mut row in theta.row_iter_mut() {
        for j in 0..q {
            row[j] += gamma[j];
        }
    }
    Ok(theta)
}

/// log p(A_ij | Θ) for one dyad.
#[inline]
pub fn dyad_log_likelihood(a: f64, theta: f64) -> f64 {
    a * theta - log1p_exp(theta)
}

/// log p(Y_ij | Θ, σ²) for one attribute cell.
#[inline]
pub fn cell_log_likelihood(family: Family, y: f64, theta: f64, sigma2: f64) -> f64 {
    match family {
        Family::Gaussian => {
            let r = y - theta;
            -0.5 * (2.0 * PI * sigma2).ln() - 0.5 * r * r / sigma2
        }
        Family::Bernoulli => y * theta - log1p_exp(theta),
    }
}

fn check_attribute_family(data: &Dataset, params: &ParamsRef<'_>) -> Result<()> {
    if data.family() == Family::Gaussian && params.sigma2.len() != data.q() {
        return Err(Error::DimensionMismatch(format!(
            "Gaussian attributes need {} residual variances, got {}",
            data.q(),
            params.sigma2.len()
        )));
    }
    Ok(())
}

pub fn network_log_likelihood(data: &Dataset, params: &ParamsRef<'_>) -> Result<f64> {
    let theta = natural_params_network(params.alpha, params.z)?;
    if theta.nrows() != data.n() {
        return Err(Error::DimensionMismatch(format!(
            "parameters are for {} nodes, data has {}",
            theta.nrows(),
            data.n()
        )));
    }
    let a = data.adjacency();
    let mut ll = 0.0;
    for j in 0..data.n() {
        for i in (j + 1)..data.n() {
            ll += dyad_log_likelihood(a[(i, j)], theta[(i, j)]);
        }
    }
    Ok(ll)
}

/// Attribute log-likelihood over observed cells only.
pub fn attribute_log_likelihood(data: &Dataset, params: &ParamsRef<'_>) -> Result<f64> {
    if data.q() == 0 {
        return Ok(0.0);
    }
    check_attribute_family(data, params)?;
    let theta = natural_params_attributes(params.gamma, params.z, params.b)?;
    if theta.nrows() != data.n() {
        return Err(Error::DimensionMismatch("latent positions do not match node count".into()));
    }
    let y = data.attributes();
    let family = data.family();
    let mut ll = 0.0;
    for j in 0..data.q() {
        let s2 = if family == Family::Gaussian { params.sigma2[j] } else { 1.0 };
        for i in 0..data.n() {
            if data.is_observed(i, j) {
                ll += cell_log_likelihood(family, y[(i, j)], theta[(i, j)], s2);
            }
        }
    }
    Ok(ll)
}

pub fn log_likelihood_at(data: &Dataset, params: &ParamsRef<'_>) -> Result<f64> {
    Ok(network_log_likelihood(data, params)? + attribute_log_likelihood(data, params)?)
}

/// Joint log-likelihood of the network and the observed attributes.
pub fn joint_log_likelihood(data: &Dataset, state: &ModelState) -> Result<f64> {
    log_likelihood_at(data, &state.params())
}
