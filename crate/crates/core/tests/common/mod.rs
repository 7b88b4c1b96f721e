//! Independent oracles and the checks shared by the test targets and the
//! acceptance runner.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use jlsm::coss::{
    active_dimension, prior_predictive_theta, sample_theta, stick_breaking_weights,
};
use jlsm::diagnostics::{geweke_z, ks_one_sample, ks_two_sample};
use jlsm::distributions::{log_density_slab_multivariate_t, sample_polya_gamma};
use jlsm::io::persist_chain;
use jlsm::mcmc::{FitMode, PosteriorChain, RunConfig};
use jlsm::model::{Dataset, Family, ModelState, PriorConfig};
use jlsm::sampler::{bernoulli, gaussian, gibbs_cycle, CycleOptions};
use jlsm::select::{
    criterion_aic, criterion_bic, criterion_dic, criterion_waic, parameter_count, waic_parts,
};
use jlsm::simulate::{draw_data, draw_prior_state, generate_dataset, SimDesign};
use jlsm::{run_chain, Draw, RngStream};

/// One verified property with a human-readable summary.
#[derive(Clone, Debug)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub fn assert_checks(checks: &[Check]) {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.label, c.detail))
        .collect();
    assert!(failed.is_empty(), "failed checks:\n{}", failed.join("\n"));
}

// ---------------------------------------------------------------------------
// distribution oracles

/// Mean and variance of PG(1, c) from its infinite-convolution form
/// PG(1, c) = (1 / 2π²) Σ g_k / ((k − ½)² + c² / 4π²), g_k ~ Exp(1),
/// truncated after `terms` summands.
pub fn pg_series_moments(c: f64, terms: usize) -> (f64, f64) {
    let shift = c * c / (4.0 * PI * PI);
    let (mut m, mut v) = (0.0, 0.0);
    // smallest summands first
    for k in (1..=terms).rev() {
        let d = (k as f64 - 0.5).powi(2) + shift;
        m += 1.0 / d;
        v += 1.0 / (d * d);
    }
    (m / (2.0 * PI * PI), v / (4.0 * PI.powi(4)))
}

/// log ∫ N(x; 0, θ I) IG(θ; a, b) dθ by the trapezoid rule in log θ.
pub fn slab_log_density_quadrature(x: &[f64], a: f64, b: f64) -> f64 {
    let n = x.len() as f64;
    let ss: f64 = x.iter().map(|v| v * v).sum();
    let log_ig_const = a * b.ln() - ln_gamma(a);
    let (lo, hi, steps) = (-60.0, 60.0, 24_000);
    let h = (hi - lo) / steps as f64;
    let logs: Vec<f64> = (0..=steps)
        .map(|s| {
            let u = lo + s as f64 * h;
            let theta = u.exp();
            let log_normal = -0.5 * n * (2.0 * PI * theta).ln() - 0.5 * ss / theta;
            let log_ig = log_ig_const - (a + 1.0) * u - b / theta;
            // dθ = θ du
            let w: f64 = if s == 0 || s == steps { 0.5 } else { 1.0 };
            log_normal + log_ig + u + w.ln()
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln() + h.ln()
}

fn sample_moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    let se_mean = (m2 / n).sqrt();
    let se_var = ((m4 - m2 * m2) / n).sqrt();
    (m, m2, se_mean, se_var)
}

pub fn distribution_checks(seed: u64) -> Vec<Check> {
    let mut rng = RngStream::new(seed, 0);
    let mut out = Vec::new();
    for &c in &[0.0, 0.5, 1.0, 2.0, 10.0] {
        let draws: Vec<f64> = (0..100_000).map(|_| sample_polya_gamma(c, &mut rng)).collect();
        let (m, v, se_m, se_v) = sample_moments(&draws);
        let (om, ov) = pg_series_moments(c, 2_000_000);
        let zm = (m - om) / se_m;
        let zv = (v - ov) / se_v;
        out.push(Check::new(
            format!("PG(1,{c}) moments"),
            zm.abs() < 4.0 && zv.abs() < 4.0,
            format!("mean {m:.6} vs {om:.6} (z={zm:.2}), var {v:.3e} vs {ov:.3e} (z={zv:.2})"),
        ));
    }
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let dim = 1 + (rng.uniform() * 5.0) as usize;
        let scale = 0.2 + 3.0 * rng.uniform();
        let x: Vec<f64> = (0..dim)
            .map(|_| scale * (2.0 * rng.uniform() - 1.0))
            .collect();
        let a = 0.5 + 5.0 * rng.uniform();
        let b = 0.2 + 5.0 * rng.uniform();
        let diff = (log_density_slab_multivariate_t(&x, a, b) - slab_log_density_quadrature(&x, a, b)).abs();
        worst = worst.max(diff);
    }
    out.push(Check::new(
        "slab multivariate-t vs quadrature",
        worst < 1e-8,
        format!("max |diff| = {worst:.2e} over 20 inputs"),
    ));
    let plus: Vec<f64> = (0..10_000).map(|_| sample_polya_gamma(1.5, &mut rng)).collect();
    let minus: Vec<f64> = (0..10_000).map(|_| sample_polya_gamma(-1.5, &mut rng)).collect();
    let ks = ks_two_sample(&plus, &minus).expect("nonempty samples");
    out.push(Check::new(
        "PG(1,c) symmetric in c",
        ks.p_value > 0.01,
        format!("two-sample KS p = {:.3}", ks.p_value),
    ));
    out
}

// ---------------------------------------------------------------------------
// augmented joint density and single-site conditional oracles

/// log p(A, Y, parameters | d) up to a constant, written directly from the
/// model: Pólya-Gamma pseudo-likelihood for the logistic parts, Gaussian
/// attributes as themselves, and every prior.
pub fn augmented_log_joint(data: &Dataset, s: &ModelState, prior: &PriorConfig) -> f64 {
    let (n, q, k) = (data.n(), data.q(), s.k());
    let a = data.adjacency();
    let y = data.attributes();
    let dot = |i: usize, j: usize| (0..k).map(|h| s.z[(i, h)] * s.z[(j, h)]).sum::<f64>();
    let mut lp = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let t = s.alpha[i] + s.alpha[j] + dot(i, j);
            lp += (a[(i, j)] - 0.5) * t - 0.5 * s.aug_a[(i, j)] * t * t;
        }
    }
    for i in 0..n {
        for j in 0..q {
            if !data.is_observed(i, j) {
                continue;
            }
            let t = s.gamma[j] + (0..k).map(|h| s.b[(j, h)] * s.z[(i, h)]).sum::<f64>();
            lp += match data.family() {
                Family::Gaussian => {
                    -0.5 * s.sigma2[j].ln() - (y[(i, j)] - t).powi(2) / (2.0 * s.sigma2[j])
                }
                Family::Bernoulli => (y[(i, j)] - 0.5) * t - 0.5 * s.aug_y[(i, j)] * t * t,
            };
        }
    }
    let sa2 = prior.sigma_alpha.powi(2);
    let sg2 = prior.sigma_gamma.powi(2);
    let sb2 = prior.sigma_b.powi(2);
    lp -= s.alpha.iter().map(|v| v * v).sum::<f64>() / (2.0 * sa2);
    lp -= s.gamma.iter().map(|v| v * v).sum::<f64>() / (2.0 * sg2);
    lp -= s.b.iter().map(|v| v * v).sum::<f64>() / (2.0 * sb2);
    if data.family() == Family::Gaussian {
        for &v in s.sigma2.iter() {
            lp += -(prior.a_sigma + 1.0) * v.ln() - prior.b_sigma / v;
        }
    }
    for h in 0..k {
        let th = s.shrinkage.theta[h];
        for i in 0..n {
            lp += -0.5 * th.ln() - s.z[(i, h)].powi(2) / (2.0 * th);
        }
        if s.shrinkage.rho[h] > h + 1 {
            lp += -(prior.a_theta + 1.0) * th.ln() - prior.b_theta / th;
        }
    }
    lp
}

/// Mean and variance of a density whose log is quadratic, read off three
/// evaluations of the log.
fn normal_from_log(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (fm, f0, fp) = (f(-1.0), f(0.0), f(1.0));
    let curvature = -(fp - 2.0 * f0 + fm);
    let slope = 0.5 * (fp - fm);
    (slope / curvature, 1.0 / curvature)
}

/// Mean and covariance of a multivariate density with quadratic log.
fn mvn_from_log(dim: usize, f: impl Fn(&DVector<f64>) -> f64) -> (DVector<f64>, DMatrix<f64>) {
    let e = |idx: &[usize]| {
        let mut v = DVector::zeros(dim);
        for &i in idx {
            v[i] += 1.0;
        }
        v
    };
    let f0 = f(&DVector::zeros(dim));
    let f1: Vec<f64> = (0..dim).map(|a| f(&e(&[a]))).collect();
    let mut hess = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            hess[(a, b)] = f(&e(&[a, b])) - f1[a] - f1[b] + f0;
        }
    }
    let grad = DVector::from_fn(dim, |a, _| f1[a] - f0 - 0.5 * hess[(a, a)]);
    let cov = (-hess).try_inverse().expect("negative definite Hessian");
    (&cov * grad, cov)
}

/// Shape and rate of an inverse-gamma law whose log density is
/// c − (shape + 1) ln x − rate / x, from three evaluations.
fn inverse_gamma_from_log(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let xs = [0.5f64, 1.0, 2.0];
    let m = Matrix3::from_fn(|r, c| match c {
        0 => 1.0,
        1 => -xs[r].ln(),
        _ => -1.0 / xs[r],
    });
    let rhs = Vector3::from_fn(|r, _| f(xs[r]));
    let sol = m.lu().solve(&rhs).expect("nonsingular design");
    (sol[1] - 1.0, sol[2])
}

fn normal_cdf(mean: f64, var: f64) -> impl Fn(f64) -> f64 {
    let d = Normal::new(mean, var.sqrt()).expect("valid normal");
    move |x| d.cdf(x)
}

fn inverse_gamma_cdf(shape: f64, rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { gamma_ur(shape, rate / x) }
}

pub fn conditional_prior() -> PriorConfig {
    PriorConfig {
        sigma_alpha: 1.5,
        sigma_gamma: 1.5,
        sigma_b: 1.0,
        a_sigma: 3.0,
        b_sigma: 2.0,
        k_init: 2,
        kappa: 4.0,
        ..PriorConfig::simulation_defaults()
    }
}

/// A random instance with every augmentation variable drawn and frozen.
pub fn conditional_instance(family: Family, seed: u64) -> (Dataset, ModelState, PriorConfig) {
    let prior = conditional_prior();
    let mut rng = RngStream::new(seed, 0);
    let mut s = draw_prior_state(8, 3, 2, family, &prior, false, &mut rng).unwrap();
    let data = draw_data(&s, family, &mut rng).unwrap();
    gaussian::update_augmentation_network(&mut s, &data, &mut rng);
    if family == Family::Bernoulli {
        bernoulli::update_augmentation_attributes(&mut s, &data, &mut rng).unwrap();
    }
    (data, s, prior)
}

const KS_DRAWS: usize = 10_000;

fn ks_check(label: String, draws: &[f64], cdf: impl Fn(f64) -> f64) -> Check {
    let ks = ks_one_sample(draws, cdf).expect("nonempty sample");
    Check::new(
        label,
        ks.p_value > 0.01,
        format!("D = {:.4}, p = {:.3}", ks.statistic, ks.p_value),
    )
}

fn repeat_site(
    s: &ModelState,
    rng: &mut RngStream,
    mut step: impl FnMut(&mut ModelState, &mut RngStream),
    read: impl Fn(&ModelState) -> f64,
) -> Vec<f64> {
    (0..KS_DRAWS)
        .map(|_| {
            let mut t = s.clone();
            step(&mut t, rng);
            read(&t)
        })
        .collect()
}

pub fn conditional_checks(family: Family, seed: u64) -> Vec<Check> {
    let (data, s, prior) = conditional_instance(family, seed);
    let mut rng = RngStream::new(seed, 1);
    let tag = format!("{family}");
    let mut out = Vec::new();

    // α_1 is the first site of its scan, so it sees the frozen complement
    let (m, v) = normal_from_log(|x| {
        let mut t = s.clone();
        t.alpha[0] = x;
        augmented_log_joint(&data, &t, &prior)
    });
    let draws = repeat_site(&s, &mut rng, |t, r| gaussian::update_alpha(t, &data, &prior, r), |t| t.alpha[0]);
    out.push(ks_check(format!("{tag} alpha_1"), &draws, normal_cdf(m, v)));

    let (m, v) = normal_from_log(|x| {
        let mut t = s.clone();
        t.gamma[0] = x;
        augmented_log_joint(&data, &t, &prior)
    });
    let draws = repeat_site(
        &s,
        &mut rng,
        |t, r| match family {
            Family::Gaussian => gaussian::update_gamma_gaussian(t, &data, &prior, r),
            Family::Bernoulli => bernoulli::update_gamma_bernoulli(t, &data, &prior, r),
        },
        |t| t.gamma[0],
    );
    out.push(ks_check(format!("{tag} gamma_1"), &draws, normal_cdf(m, v)));

    // β_1 through two projections
    let k = s.k();
    let (mean, cov) = mvn_from_log(k, |beta| {
        let mut t = s.clone();
        for h in 0..k {
            t.b[(0, h)] = beta[h];
        }
        augmented_log_joint(&data, &t, &prior)
    });
    let betas: Vec<DVector<f64>> = (0..KS_DRAWS)
        .map(|_| {
            let mut t = s.clone();
            match family {
                Family::Gaussian => gaussian::update_loadings_gaussian(&mut t, &data, &prior, &mut rng),
                Family::Bernoulli => bernoulli::update_loadings_bernoulli(&mut t, &data, &prior, &mut rng),
            }
            .unwrap();
            t.b.row(0).transpose()
        })
        .collect();
    for (name, u) in [
        ("e1", DVector::from_vec(vec![1.0, 0.0])),
        ("diag", DVector::from_vec(vec![0.6, -0.8])),
    ] {
        let proj: Vec<f64> = betas.iter().map(|b| b.dot(&u)).collect();
        let pm = mean.dot(&u);
        let pv = (u.transpose() * &cov * &u)[(0, 0)];
        out.push(ks_check(format!("{tag} beta_1·{name}"), &proj, normal_cdf(pm, pv)));
    }

    // z_1 through its first coordinate
    let (mean, cov) = mvn_from_log(k, |zr| {
        let mut t = s.clone();
        for h in 0..k {
            t.z[(0, h)] = zr[h];
        }
        augmented_log_joint(&data, &t, &prior)
    });
    let draws = repeat_site(
        &s,
        &mut rng,
        |t, r| match family {
            Family::Gaussian => gaussian::update_latent_positions_gaussian(t, &data, r).unwrap(),
            Family::Bernoulli => bernoulli::update_latent_positions_bernoulli(t, &data, r).unwrap(),
        },
        |t| t.z[(0, 0)],
    );
    out.push(ks_check(format!("{tag} z_1[1]"), &draws, normal_cdf(mean[0], cov[(0, 0)])));

    if family == Family::Gaussian {
        let (shape, rate) = inverse_gamma_from_log(|x| {
            let mut t = s.clone();
            t.sigma2[0] = x;
            augmented_log_joint(&data, &t, &prior)
        });
        let draws = repeat_site(
            &s,
            &mut rng,
            |t, r| gaussian::update_noise_variance(t, &data, &prior, r).unwrap(),
            |t| t.sigma2[0],
        );
        out.push(ks_check(format!("{tag} sigma2_1"), &draws, inverse_gamma_cdf(shape, rate)));
    }

    // θ_1 in the slab (ρ_1 = 3 > 1), and the spike as a point mass
    let mut slab = s.clone();
    slab.shrinkage.rho[0] = 3;
    let (shape, rate) = inverse_gamma_from_log(|x| {
        let mut t = slab.clone();
        t.shrinkage.theta[0] = x;
        augmented_log_joint(&data, &t, &prior)
    });
    let col: Vec<f64> = s.z.column(0).iter().copied().collect();
    let draws: Vec<f64> = (0..KS_DRAWS)
        .map(|_| sample_theta(1, 3, &col, &prior, &mut rng).unwrap())
        .collect();
    out.push(ks_check(format!("{tag} theta_1 slab"), &draws, inverse_gamma_cdf(shape, rate)));
    let spike = sample_theta(1, 1, &col, &prior, &mut rng).unwrap();
    out.push(Check::new(
        format!("{tag} theta_1 spike"),
        spike == prior.theta0,
        format!("draw {spike}"),
    ));
    out
}

// ---------------------------------------------------------------------------
// Geweke joint-distribution test

pub fn geweke_prior() -> PriorConfig {
    PriorConfig {
        sigma_alpha: 1.0,
        sigma_gamma: 1.0,
        sigma_b: 1.0,
        a_sigma: 3.0,
        b_sigma: 2.0,
        k_init: 2,
        kappa: 4.0,
        ..PriorConfig::simulation_defaults()
    }
}

fn functionals(s: &ModelState, family: Family, fixed: bool) -> Vec<(&'static str, f64)> {
    let (n, q, k) = (s.alpha.len(), s.gamma.len(), s.k());
    let seventh = match (family, fixed) {
        (Family::Gaussian, _) => ("sigma2_1", s.sigma2[0]),
        (Family::Bernoulli, false) => ("theta_1", s.shrinkage.theta[0]),
        (Family::Bernoulli, true) => ("z_11*z_21", s.z[(0, 0)] * s.z[(1, 0)]),
    };
    let eighth = if fixed {
        ("B_11", s.b[(0, 0)])
    } else {
        ("K*", active_dimension(&s.shrinkage.rho) as f64)
    };
    vec![
        ("alpha_1", s.alpha[0]),
        ("alpha_1^2", s.alpha[0].powi(2)),
        ("gamma_1", s.gamma[0]),
        ("gamma_1^2", s.gamma[0].powi(2)),
        ("|Z|^2/nk", s.z.norm_squared() / (n * k) as f64),
        ("|B|^2/qk", s.b.norm_squared() / (q * k) as f64),
        seventh,
        eighth,
    ]
}

/// Forward draws from the prior against a successive-conditional chain that
/// alternates data ~ p(data | parameters) with one Gibbs cycle. Eight
/// functionals, |z| < 4 each.
pub fn geweke_checks(family: Family, fixed: bool, samples: usize, seed: u64) -> Vec<Check> {
    let (n, q, k) = (6, 2, 2);
    let prior = geweke_prior();
    let mut rng = RngStream::new(seed, 0);
    let options = CycleOptions {
        parallel: false,
        impute: false,
        update_shrinkage: !fixed,
    };
    let mut forward: Vec<Vec<(&'static str, f64)>> = Vec::with_capacity(samples);
    for _ in 0..samples {
        let s = draw_prior_state(n, q, k, family, &prior, fixed, &mut rng).unwrap();
        forward.push(functionals(&s, family, fixed));
    }
    let mut s = draw_prior_state(n, q, k, family, &prior, fixed, &mut rng).unwrap();
    let mut chain = Vec::with_capacity(samples);
    for _ in 0..samples {
        for _ in 0..2 {
            let data = draw_data(&s, family, &mut rng).unwrap();
            gibbs_cycle(&mut s, &data, &prior, &options, &mut rng).unwrap();
        }
        chain.push(functionals(&s, family, fixed));
    }
    let mode = if fixed { "fixed k" } else { "COSS" };
    (0..8)
        .map(|f| {
            let fw: Vec<f64> = forward.iter().map(|v| v[f].1).collect();
            let ch: Vec<f64> = chain.iter().map(|v| v[f].1).collect();
            let z = geweke_z(&fw, &ch);
            Check::new(
                format!("{family} {mode} {}", forward[0][f].0),
                z.abs() < 4.0,
                format!("z = {z:.2}"),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// selection criteria

fn oracle_log_sigmoid(a: f64, t: f64) -> f64 {
    let p = 1.0 / (1.0 + (-t).exp());
    if a == 1.0 { p.ln() } else { (1.0 - p).ln() }
}

fn oracle_loglik(data: &Dataset, alpha: &[f64], z: &[f64], gamma: &[f64], b: &[f64], s2: &[f64]) -> f64 {
    // k = 1 throughout the toy chains
    let (n, q) = (data.n(), data.q());
    let mut ll = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            ll += oracle_log_sigmoid(data.adjacency()[(i, j)], alpha[i] + alpha[j] + z[i] * z[j]);
        }
        for j in 0..q {
            let mu = gamma[j] + b[j] * z[i];
            let y = data.attributes()[(i, j)];
            ll += -0.5 * (2.0 * PI * s2[j]).ln() - (y - mu).powi(2) / (2.0 * s2[j]);
        }
    }
    ll
}

fn toy_draw(alpha: &[f64], z: &[f64], gamma: &[f64], b: &[f64], s2: &[f64]) -> Draw {
    Draw {
        iteration: 0,
        alpha: DVector::from_column_slice(alpha),
        gamma: DVector::from_column_slice(gamma),
        z: DMatrix::from_column_slice(z.len(), 1, z),
        b: DMatrix::from_column_slice(b.len(), 1, b),
        sigma2: DVector::from_column_slice(s2),
        theta: vec![1.0],
        rho: vec![2],
    }
}

fn toy_chain(family: Family, draws: Vec<Draw>) -> PosteriorChain {
    let mut c = PosteriorChain::new(family);
    c.all_columns_active = true;
    c.kstar = vec![1; draws.len()];
    c.draws = draws;
    c
}

fn close(label: &str, got: f64, want: f64, tol: f64) -> Check {
    Check::new(
        label,
        (got - want).abs() <= tol * want.abs().max(1.0),
        format!("{got:.12} vs {want:.12}"),
    )
}

pub fn criteria_checks() -> Vec<Check> {
    let mut out = Vec::new();

    // WAIC, one dyad, no attributes, three states
    let mut a = DMatrix::zeros(2, 2);
    a[(0, 1)] = 1.0;
    a[(1, 0)] = 1.0;
    let data = Dataset::complete(a, DMatrix::zeros(2, 0), Family::Gaussian).unwrap();
    let states = [([0.2, -0.4], [0.5, 1.1]), ([0.1, 0.3], [-0.7, 0.2]), ([-0.5, 0.9], [1.3, 0.4])];
    let chain = toy_chain(
        Family::Gaussian,
        states.iter().map(|(al, z)| toy_draw(al, z, &[], &[], &[])).collect(),
    );
    let lls: Vec<f64> = states
        .iter()
        .map(|(al, z)| oracle_log_sigmoid(1.0, al[0] + al[1] + z[0] * z[1]))
        .collect();
    let lppd = (lls.iter().map(|l| l.exp()).sum::<f64>() / 3.0).ln();
    let m = lls.iter().sum::<f64>() / 3.0;
    let pen = lls.iter().map(|l| (l - m).powi(2)).sum::<f64>() / 2.0;
    out.push(close("WAIC one-dyad toy", criterion_waic(&chain, &data).unwrap(), -2.0 * (lppd - pen), 1e-12));

    // n = 3, q = 1 Gaussian toy with three k = 1 states; z signs agree with the
    // last state, so the aligned mean is the coordinate mean
    let mut a = DMatrix::zeros(3, 3);
    for (i, j) in [(0, 1), (1, 2)] {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    let y = DMatrix::from_column_slice(3, 1, &[0.4, -1.2, 2.1]);
    let data = Dataset::complete(a, y, Family::Gaussian).unwrap();
    type ToyState = ([f64; 3], [f64; 3], [f64; 1], [f64; 1], [f64; 1]);
    let states: [ToyState; 3] = [
        ([0.1, -0.2, 0.3], [0.5, -0.3, 0.9], [0.2], [0.7], [1.3]),
        ([0.0, 0.4, -0.1], [0.8, -0.1, 0.6], [-0.1], [0.5], [0.8]),
        ([-0.3, 0.2, 0.5], [0.6, -0.5, 1.2], [0.4], [0.9], [1.1]),
    ];
    let chain = toy_chain(
        Family::Gaussian,
        states.iter().map(|s| toy_draw(&s.0, &s.1, &s.2, &s.3, &s.4)).collect(),
    );
    let mean_of = |f: &dyn Fn(&ToyState) -> Vec<f64>| -> Vec<f64> {
        let rows: Vec<Vec<f64>> = states.iter().map(f).collect();
        (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / 3.0).collect()
    };
    let al = mean_of(&|s| s.0.to_vec());
    let zz = mean_of(&|s| s.1.to_vec());
    let gm = mean_of(&|s| s.2.to_vec());
    let bb = mean_of(&|s| s.3.to_vec());
    let s2 = mean_of(&|s| s.4.to_vec());
    let ll_hat = oracle_loglik(&data, &al, &zz, &gm, &bb, &s2);
    let lls: Vec<f64> = states
        .iter()
        .map(|s| oracle_loglik(&data, &s.0, &s.1, &s.2, &s.3, &s.4))
        .collect();
    let d = 3.0 + 1.0 + 3.0 + 2.0;
    let n = 3.0f64;
    let aic = criterion_aic(&chain, &data).unwrap();
    let bic = criterion_bic(&chain, &data).unwrap();
    out.push(close("AIC toy", aic, -2.0 * ll_hat + 2.0 * d, 1e-10));
    out.push(close("BIC toy", bic, -2.0 * ll_hat + 2.0 * d * n.ln(), 1e-10));
    out.push(close("BIC − AIC = (2 ln n − 2)d", bic - aic, (2.0 * n.ln() - 2.0) * d, 1e-10));
    let mean_ll = lls.iter().sum::<f64>() / 3.0;
    let p_dic = 2.0 * (ll_hat - mean_ll);
    out.push(close("DIC toy", criterion_dic(&chain, &data).unwrap(), -2.0 * ll_hat + 2.0 * p_dic, 1e-10));

    // pointwise WAIC over three dyads and three cells
    let mut lppd = 0.0;
    let mut pen = 0.0;
    let mut units: Vec<Vec<f64>> = Vec::new();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        units.push(
            states
                .iter()
                .map(|s| oracle_log_sigmoid(data.adjacency()[(i, j)], s.0[i] + s.0[j] + s.1[i] * s.1[j]))
                .collect(),
        );
    }
    for i in 0..3 {
        units.push(
            states
                .iter()
                .map(|s| {
                    let mu = s.2[0] + s.3[0] * s.1[i];
                    let r = data.attributes()[(i, 0)] - mu;
                    -0.5 * (2.0 * PI * s.4[0]).ln() - r * r / (2.0 * s.4[0])
                })
                .collect(),
        );
    }
    for u in &units {
        lppd += (u.iter().map(|l| l.exp()).sum::<f64>() / 3.0).ln();
        let m = u.iter().sum::<f64>() / 3.0;
        pen += u.iter().map(|l| (l - m).powi(2)).sum::<f64>() / 2.0;
    }
    out.push(close("WAIC toy with attributes", criterion_waic(&chain, &data).unwrap(), -2.0 * (lppd - pen), 1e-10));
    let parts = waic_parts(&chain, &data).unwrap();
    out.push(Check::new(
        "WAIC penalties nonnegative",
        parts.penalty_network >= 0.0 && parts.penalty_attributes >= 0.0,
        format!("{:.4}, {:.4}", parts.penalty_network, parts.penalty_attributes),
    ));

    // one state: p_DIC = 0
    let single = toy_chain(Family::Gaussian, vec![toy_draw(&states[0].0, &states[0].1, &states[0].2, &states[0].3, &states[0].4)]);
    out.push(close("single-state DIC", criterion_dic(&single, &data).unwrap(), -2.0 * lls[0], 1e-10));

    let dg = parameter_count(Family::Gaussian, 100, 20, 3);
    let db = parameter_count(Family::Bernoulli, 100, 20, 3);
    out.push(Check::new("d Gaussian (100,20,3)", dg == 500, format!("{dg}")));
    out.push(Check::new("d Bernoulli (100,20,3)", db == 480, format!("{db}")));
    out
}

// ---------------------------------------------------------------------------
// COSS prior properties

pub fn prior_checks(seed: u64) -> Vec<Check> {
    let mut rng = RngStream::new(seed, 0);
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = 1 + (rng.uniform() * 50.0) as usize;
        let mut v: Vec<f64> = (0..k).map(|_| rng.uniform()).collect();
        v[k - 1] = 1.0;
        let omega = stick_breaking_weights(&v).unwrap();
        worst = worst.max((omega.iter().sum::<f64>() - 1.0).abs());
    }
    out.push(Check::new("stick weights sum to 1", worst < 1e-12, format!("max error {worst:.1e}")));

    let draws = 100_000;
    for &(kappa, a, h) in &[(1.0, 1.0, 2usize), (4.0, 8.0, 1), (4.0, 8.0, 3), (64.0, 8.0, 2), (2.0, 3.0, 4)] {
        let prior = PriorConfig {
            kappa,
            a_stick: a,
            ..PriorConfig::simulation_defaults()
        };
        let sample = prior_predictive_theta(&prior, h + 2, draws, &mut rng).unwrap();
        let x: Vec<f64> = sample.iter().map(|d| 1.0 - d.pi[h - 1]).collect();
        let (m, _, se, _) = sample_moments(&x);
        let want = (1.0 / (kappa + 1.0)) * (1.0 / (a + 1.0)).powi(h as i32 - 1);
        let z = (m - want) / se;
        out.push(Check::new(
            format!("E(1-pi_{h}) at kappa={kappa}, a={a}"),
            z.abs() < 3.0,
            format!("{m:.5} vs {want:.5} (z={z:.2})"),
        ));
    }

    // stochastic ordering of the spike indicator and of |z| ≤ 0.1, k = 5
    for &(kappa, a) in &[(1.0, 1.0), (0.5, 0.5)] {
        let prior = PriorConfig {
            kappa,
            a_stick: a,
            ..PriorConfig::simulation_defaults()
        };
        let k = 5;
        let sample = prior_predictive_theta(&prior, k, 200_000, &mut rng).unwrap();
        let z: Vec<Vec<f64>> = sample
            .iter()
            .map(|d| d.theta.iter().map(|t| t.sqrt() * jlsm::distributions::standard_normal(&mut rng)).collect())
            .collect();
        for h in 1..k {
            let spike: Vec<f64> = sample
                .iter()
                .map(|d| d.is_spike(h + 1, prior.theta0) as u8 as f64 - d.is_spike(h, prior.theta0) as u8 as f64)
                .collect();
            let (m, _, se, _) = sample_moments(&spike);
            out.push(Check::new(
                format!("Pr(spike_{}) > Pr(spike_{h}) at kappa={kappa}, a={a}", h + 1),
                m > 3.0 * se,
                format!("difference {m:.4}, SE {se:.4}"),
            ));
            let small: Vec<f64> = z
                .iter()
                .map(|r| (r[h].abs() <= 0.1) as u8 as f64 - (r[h - 1].abs() <= 0.1) as u8 as f64)
                .collect();
            let (m, _, se, _) = sample_moments(&small);
            out.push(Check::new(
                format!("Pr(|z_{}| <= 0.1) > Pr(|z_{h}| <= 0.1) at kappa={kappa}, a={a}", h + 1),
                m > 3.0 * se,
                format!("difference {m:.4}, SE {se:.4}"),
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// determinism

pub fn small_run_config(family: Family, seed: u64) -> RunConfig {
    RunConfig {
        iterations: 300,
        burn_in: 100,
        thin: 2,
        family,
        seed,
        schedule: jlsm::adaptive::AdaptationSchedule {
            start: 50,
            ..Default::default()
        },
        ..RunConfig::default()
    }
}

fn dir_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

pub fn determinism_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    for family in [Family::Gaussian, Family::Bernoulli] {
        let mut rng = RngStream::new(11, 0);
        let (data, _) = generate_dataset(&SimDesign::study1(30, 5, family), &mut rng).unwrap();
        let cfg = small_run_config(family, 7);
        let tmp = tempfile::tempdir().unwrap();
        let runs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
            .map(|r| {
                let chain = pool.install(|| run_chain(&data, &cfg)).unwrap();
                let dir = tmp.path().join(format!("run{r}"));
                persist_chain(&dir, &chain, &cfg).unwrap();
                dir_bytes(&dir)
            })
            .collect();
        out.push(Check::new(
            format!("{family} fit byte-identical, parallel PG"),
            runs[0] == runs[1],
            format!("{} files", runs[0].len()),
        ));
        let parallel = pool.install(|| run_chain(&data, &cfg)).unwrap();
        let sequential = run_chain(&data, &RunConfig { parallel: false, ..cfg.clone() }).unwrap();
        out.push(Check::new(
            format!("{family} parallel and sequential chains equal"),
            parallel == sequential,
            format!("{} draws", parallel.len()),
        ));
    }
    let mut fixed = small_run_config(Family::Gaussian, 3);
    fixed.mode = FitMode::Fixed { k: 2 };
    let mut rng = RngStream::new(12, 0);
    let (data, _) = generate_dataset(&SimDesign::study1(20, 3, Family::Gaussian), &mut rng).unwrap();
    let a = run_chain(&data, &fixed).unwrap();
    let b = run_chain(&data, &fixed).unwrap();
    out.push(Check::new("fixed-k fit repeatable", a == b, format!("{} draws", a.len())));
    out
}
