//! Monte-Carlo coverage studies on the linear-grid design.
//!
//! Node `i` (1-based) has `beta*_i = (i-1) L / (n-1)` and two covariates,
//! `x_i1` uniform on `{-1, +1}` and `x_i2 ~ Beta(2, 2)`; edge covariates are
//! `z_ij = (x_i1 x_j1, |x_i2 - x_j2|)`. Each replication draws fresh
//! covariates and a fresh network from its own seed stream, fits the model
//! and records interval coverage.

use std::fmt;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::estimator::{fit, FitOptions};
use crate::families::{normal_quantile, EdgeFamily};
use crate::inference::{beta_diff_interval, beta_variances, gamma_inference};
use crate::linalg::sup_norm;
use crate::model::{CovariateTensor, Network, Params};

/// Scale `L` of the `beta*` grid, either a named rate in `n` or a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LSpec {
    Zero,
    /// `log(log n)`
    LogLog,
    /// `(log n)^{1/2}`
    SqrtLog,
    /// `log n`
    Log,
    Value(f64),
}

impl LSpec {
    pub fn value(self, n: usize) -> f64 {
        let ln = (n as f64).ln();
        match self {
            LSpec::Zero => 0.0,
            LSpec::LogLog => ln.ln(),
            LSpec::SqrtLog => ln.sqrt(),
            LSpec::Log => ln,
            LSpec::Value(v) => v,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(LSpec::Zero),
            "loglog" => Ok(LSpec::LogLog),
            "sqrtlog" => Ok(LSpec::SqrtLog),
            "log" => Ok(LSpec::Log),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .map(LSpec::Value)
                .ok_or_else(|| Error::Config(format!("invalid L_spec '{other}'"))),
        }
    }
}

impl fmt::Display for LSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LSpec::Zero => f.write_str("0"),
            LSpec::LogLog => f.write_str("loglog"),
            LSpec::SqrtLog => f.write_str("sqrtlog"),
            LSpec::Log => f.write_str("log"),
            LSpec::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for LSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LSpec::Value(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for LSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(0.0) => Ok(LSpec::Zero),
            Raw::Num(v) if v.is_finite() && v > 0.0 => Ok(LSpec::Value(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("invalid L_spec {v}"))),
            Raw::Text(s) => LSpec::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

fn default_gamma_star() -> Vec<f64> {
    vec![0.5, 1.0]
}

fn default_level() -> f64 {
    0.95
}

/// Simulation configuration. `tracked_pairs` use 1-based node labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDesign {
    pub n: usize,
    #[serde(rename = "L_spec", alias = "l_spec", alias = "L")]
    pub l_spec: LSpec,
    pub family: EdgeFamily,
    #[serde(default = "default_gamma_star")]
    pub gamma_star: Vec<f64>,
    pub reps: usize,
    #[serde(alias = "seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub tracked_pairs: Vec<[usize; 2]>,
    #[serde(default = "default_level")]
    pub level: f64,
}

impl SimDesign {
    pub fn new(n: usize, l_spec: LSpec, family: EdgeFamily, reps: usize, master_seed: u64) -> Self {
        SimDesign {
            n,
            l_spec,
            family,
            gamma_star: default_gamma_star(),
            reps,
            master_seed,
            tracked_pairs: Vec::new(),
            level: default_level(),
        }
    }

    pub fn with_pairs(mut self, pairs: &[[usize; 2]]) -> Self {
        self.tracked_pairs = pairs.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Config(format!("n = {} is below 3", self.n)));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be positive".into()));
        }
        if self.gamma_star.len() != 2 {
            return Err(Error::Config("gamma_star must have length 2".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level {} not in (0, 1)", self.level)));
        }
        if self.l_spec.value(self.n) < 0.0 {
            return Err(Error::Config("L must be nonnegative".into()));
        }
        for &[i, j] in &self.tracked_pairs {
            if i == 0 || j == 0 || i > self.n || j > self.n || i == j {
                return Err(Error::Config(format!("tracked pair ({i}, {j}) invalid for n = {}", self.n)));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer over `(master, index)`; gives each replication an
/// independent, order-free seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut x = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// `beta*_i = (i-1) L / (n-1)` for `i = 1..n`.
pub fn beta_grid(n: usize, l: f64) -> DVector<f64> {
    DVector::from_fn(n, |i, _| i as f64 * l / (n - 1) as f64)
}

/// Edge covariates `(x_i1 x_j1, |x_i2 - x_j2|)` from nodal covariates.
pub fn homophily_covariates(x1: &[f64], x2: &[f64]) -> Result<CovariateTensor> {
    if x1.len() != x2.len() {
        return Err(Error::Shape("nodal covariate columns differ in length".into()));
    }
    CovariateTensor::from_fn(x1.len(), 2, |i, j, k| match k {
        0 => x1[i] * x1[j],
        _ => (x2[i] - x2[j]).abs(),
    })
}

pub fn generate_design(n: usize, l: f64, seed: u64) -> Result<(DVector<f64>, CovariateTensor)> {
    if n < 3 || !(l >= 0.0) {
        return Err(Error::Config(format!("design needs n >= 3 and L >= 0, got n = {n}, L = {l}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta22 = Beta::new(2.0, 2.0).expect("valid Beta parameters");
    let x1: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let x2: Vec<f64> = (0..n).map(|_| beta22.sample(&mut rng)).collect();
    Ok((beta_grid(n, l), homophily_covariates(&x1, &x2)?))
}

/// Independent edge draws at `pi*_ij`.
pub fn sample_network(
    beta_star: &DVector<f64>,
    gamma_star: &DVector<f64>,
    z: &CovariateTensor,
    fam: EdgeFamily,
    seed: u64,
) -> Result<Network> {
    if beta_star.len() != z.n() || gamma_star.len() != z.p() {
        return Err(Error::Shape("true parameters do not match covariates".into()));
    }
    let params = Params::new(beta_star.clone(), gamma_star.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = z.n();
    let mut pairs = Vec::with_capacity(z.n_pairs());
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j, fam.sample_edge(params.predictor(z, i, j), &mut rng)));
        }
    }
    Network::from_pairs(n, pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub theoretical: f64,
    pub empirical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCoverage {
    /// 1-based node labels.
    pub i: usize,
    pub j: usize,
    pub coverage: f64,
    pub mean_length: f64,
    /// Sorted standardized differences against normal quantiles.
    pub qq_points: Vec<QqPoint>,
}

impl PairCoverage {
    /// Pearson correlation between theoretical and empirical quantiles.
    pub fn qq_correlation(&self) -> f64 {
        let m = self.qq_points.len() as f64;
        let mx = self.qq_points.iter().map(|q| q.theoretical).sum::<f64>() / m;
        let my = self.qq_points.iter().map(|q| q.empirical).sum::<f64>() / m;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for q in &self.qq_points {
            let (dx, dy) = (q.theoretical - mx, q.empirical - my);
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        sxy / (sxx * syy).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefCoverage {
    /// 1-based coefficient index.
    pub index: usize,
    pub coverage: f64,
    pub coverage_bc: f64,
    pub mean_length: f64,
    pub mean_abs_bc_shift: f64,
    /// Monte-Carlo mean of `gamma_hat_k - gamma*_k`.
    pub mean_error: f64,
    /// Monte-Carlo mean of `gamma_bc_k - gamma*_k`.
    pub mean_error_bc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub design: SimDesign,
    pub successes: usize,
    pub failures: usize,
    pub pairs: Vec<PairCoverage>,
    pub gamma: Vec<CoefCoverage>,
    /// Median over successful replications of `||beta_hat - beta*||_inf`.
    pub median_beta_sup_error: f64,
}

struct CoefOutcome {
    covered: bool,
    covered_bc: bool,
    length: f64,
    error: f64,
    error_bc: f64,
}

struct RepOutcome {
    pair_hits: Vec<(bool, f64, f64)>,
    coef_hits: Vec<CoefOutcome>,
    beta_sup_error: f64,
}

fn run_once(design: &SimDesign, opts: &FitOptions, seed: u64) -> Result<RepOutcome> {
    let l = design.l_spec.value(design.n);
    let (beta_star, z) = generate_design(design.n, l, derive_seed(seed, 0))?;
    let gamma_star = DVector::from_column_slice(&design.gamma_star);
    let net = sample_network(&beta_star, &gamma_star, &z, design.family, derive_seed(seed, 1))?;
    let fitted = fit(&net, &z, design.family, opts)?;
    fitted.require_converged()?;
    let vars = beta_variances(&fitted, &net, &z, design.family)?;
    let inf = gamma_inference(&fitted, &net, &z, design.family)?;

    let mut pair_hits = Vec::with_capacity(design.tracked_pairs.len());
    for &[a, b] in &design.tracked_pairs {
        let (i, j) = (a - 1, b - 1);
        let truth = beta_star[i] - beta_star[j];
        let ci = beta_diff_interval(&fitted, &vars, i, j, design.level)?;
        let xi = (ci.point - truth) / vars.diff_scale(i, j);
        pair_hits.push((ci.contains(truth), ci.length(), xi));
    }
    let mut coef_hits = Vec::with_capacity(z.p());
    for k in 0..z.p() {
        let ci = inf.gamma_interval(k, design.level)?;
        let bc = inf.gamma_bc_interval(k, design.level)?;
        coef_hits.push(CoefOutcome {
            covered: ci.contains(gamma_star[k]),
            covered_bc: bc.contains(gamma_star[k]),
            length: ci.length(),
            error: inf.gamma_hat[k] - gamma_star[k],
            error_bc: inf.gamma_bc[k] - gamma_star[k],
        });
    }
    Ok(RepOutcome {
        pair_hits,
        coef_hits,
        beta_sup_error: sup_norm(&(&fitted.beta_hat - &beta_star)),
    })
}

fn run_replication(design: &SimDesign, opts: &FitOptions, index: usize) -> Option<RepOutcome> {
    let seed = derive_seed(design.master_seed, index as u64);
    match run_once(design, opts, seed) {
        Ok(out) => Some(out),
        // a degenerate draw gets one fresh resample
        Err(Error::DegenerateDegree { .. }) => run_once(design, opts, derive_seed(seed, u64::MAX)).ok(),
        Err(_) => None,
    }
}

/// Run every replication and aggregate coverage. Replications run in
/// parallel but are reduced in index order, so the report is a pure function
/// of the design and options.
pub fn run_monte_carlo(design: &SimDesign, opts: &FitOptions) -> Result<MonteCarloReport> {
    design.validate()?;
    let outcomes: Vec<Option<RepOutcome>> = (0..design.reps)
        .into_par_iter()
        .map(|r| run_replication(design, opts, r))
        .collect();
    let ok: Vec<&RepOutcome> = outcomes.iter().flatten().collect();
    let failures = design.reps - ok.len();
    if failures as f64 > 0.1 * design.reps as f64 || ok.is_empty() {
        return Err(Error::TooManyFailures {
            failures,
            reps: design.reps,
        });
    }
    let m = ok.len() as f64;

    let pairs = design
        .tracked_pairs
        .iter()
        .enumerate()
        .map(|(t, &[i, j])| {
            let hits = ok.iter().filter(|o| o.pair_hits[t].0).count() as f64;
            let length = ok.iter().map(|o| o.pair_hits[t].1).sum::<f64>() / m;
            let mut xi: Vec<f64> = ok.iter().map(|o| o.pair_hits[t].2).collect();
            xi.sort_by(f64::total_cmp);
            let qq_points = xi
                .iter()
                .enumerate()
                .map(|(k, &e)| QqPoint {
                    theoretical: normal_quantile((k as f64 + 0.5) / m),
                    empirical: e,
                })
                .collect();
            PairCoverage {
                i,
                j,
                coverage: hits / m,
                mean_length: length,
                qq_points,
            }
        })
        .collect();

    let gamma = (0..design.gamma_star.len())
        .map(|k| {
            let mean = |f: fn(&CoefOutcome) -> f64| ok.iter().map(|o| f(&o.coef_hits[k])).sum::<f64>() / m;
            CoefCoverage {
                index: k + 1,
                coverage: mean(|c| f64::from(u8::from(c.covered))),
                coverage_bc: mean(|c| f64::from(u8::from(c.covered_bc))),
                mean_length: mean(|c| c.length),
                mean_abs_bc_shift: mean(|c| (c.error_bc - c.error).abs()),
                mean_error: mean(|c| c.error),
                mean_error_bc: mean(|c| c.error_bc),
            }
        })
        .collect();

    let mut errs: Vec<f64> = ok.iter().map(|o| o.beta_sup_error).collect();
    errs.sort_by(f64::total_cmp);
    let mid = errs.len() / 2;
    let median_beta_sup_error = if errs.len() % 2 == 1 {
        errs[mid]
    } else {
        0.5 * (errs[mid - 1] + errs[mid])
    };

    Ok(MonteCarloReport {
        design: design.clone(),
        successes: ok.len(),
        failures,
        pairs,
        gamma,
        median_beta_sup_error,
    })
}
