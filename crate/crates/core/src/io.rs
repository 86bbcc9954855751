//! Tab-separated data files, fit reports and simulation tables.
//!
//! Files use 1-based node labels; everything in memory is 0-based. Edge
//! lists hold one `i<TAB>j<TAB>weight` record per unordered pair and omitted
//! pairs have weight zero. Covariate files come in two layouts:
//!
//! * edge mode, header `i  j  z1 .. zp`, one row for every pair;
//! * nodal mode, header `i  x1:map .. xq:map`, one row per node, expanded to
//!   pairs through `product`, `absdiff` or `match`. The `:map` suffix may be
//!   omitted when maps are supplied separately.
//!
//! Every float written by this module carries 17 significant digits.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::{Error, Result};
use crate::estimator::{fit, FitOptions, FitResult};
use crate::families::EdgeFamily;
use crate::inference::{
    beta_diff_interval, beta_variances, gamma_inference_with, homogeneity_test, BetaVariances, InferenceOptions,
    InferenceResult,
};
use crate::model::{condition_diagnostics, CovariateTensor, DiagnosticsReport, Network};
use crate::simulation::MonteCarloReport;

/// How a nodal covariate column becomes an edge covariate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariateMap {
    /// `x_i x_j`
    Product,
    /// `|x_i - x_j|`
    AbsDiff,
    /// `1` if `x_i == x_j`, else `0`
    Match,
}

impl CovariateMap {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            CovariateMap::Product => a * b,
            CovariateMap::AbsDiff => (a - b).abs(),
            CovariateMap::Match => f64::from(u8::from(a == b)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CovariateMap::Product => "product",
            CovariateMap::AbsDiff => "absdiff",
            CovariateMap::Match => "match",
        }
    }
}

impl FromStr for CovariateMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "product" => Ok(CovariateMap::Product),
            "absdiff" => Ok(CovariateMap::AbsDiff),
            "match" => Ok(CovariateMap::Match),
            other => Err(Error::UnknownMap(other.to_string())),
        }
    }
}

impl fmt::Display for CovariateMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parsed edge list, still without a node count.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    /// 0-based `(i, j, weight)` with `i < j`.
    pub pairs: Vec<(usize, usize, f64)>,
    /// Largest 1-based label seen.
    pub max_label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovariateSource {
    Edge {
        names: Vec<String>,
        rows: HashMap<(usize, usize), Vec<f64>>,
        max_label: usize,
    },
    Nodal {
        names: Vec<String>,
        maps: Vec<Option<CovariateMap>>,
        /// `values[node]`, 0-based, absent nodes are `None`.
        values: Vec<Option<Vec<f64>>>,
    },
}

impl CovariateSource {
    pub fn max_label(&self) -> usize {
        match self {
            CovariateSource::Edge { max_label, .. } => *max_label,
            CovariateSource::Nodal { values, .. } => values.len(),
        }
    }

    pub fn names(&self) -> &[String] {
        match self {
            CovariateSource::Edge { names, .. } | CovariateSource::Nodal { names, .. } => names,
        }
    }

    /// Expand to a pairwise tensor on `n` nodes. `maps` overrides any maps
    /// declared in a nodal header.
    pub fn to_tensor(&self, n: usize, maps: Option<&[CovariateMap]>) -> Result<CovariateTensor> {
        match self {
            CovariateSource::Edge { names, rows, .. } => {
                let p = names.len();
                let mut data = Vec::with_capacity(n * n.saturating_sub(1) / 2 * p);
                for i in 0..n {
                    for j in (i + 1)..n {
                        let row = rows.get(&(i, j)).ok_or(Error::MissingPair { i: i + 1, j: j + 1 })?;
                        data.extend_from_slice(row);
                    }
                }
                CovariateTensor::new(n, p, data)
            }
            CovariateSource::Nodal {
                names,
                maps: declared,
                values,
            } => {
                let maps: Vec<CovariateMap> = match maps {
                    Some(m) if m.len() != names.len() => {
                        return Err(Error::Config(format!(
                            "{} maps given for {} nodal columns",
                            m.len(),
                            names.len()
                        )))
                    }
                    Some(m) => m.to_vec(),
                    None => declared
                        .iter()
                        .zip(names)
                        .map(|(m, name)| m.ok_or_else(|| Error::Config(format!("no map declared for column '{name}'"))))
                        .collect::<Result<_>>()?,
                };
                let mut rows = Vec::with_capacity(n);
                for node in 0..n {
                    match values.get(node).and_then(Option::as_ref) {
                        Some(v) => rows.push(v.as_slice()),
                        None => return Err(Error::Config(format!("no covariate row for node {}", node + 1))),
                    }
                }
                CovariateTensor::from_fn(n, names.len(), |i, j, k| maps[k].apply(rows[i][k], rows[j][k]))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub network: Network,
    pub covariates: CovariateTensor,
    pub covariate_names: Vec<String>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

struct Records<'a> {
    path: &'a str,
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Records<'a> {
    fn new(text: &'a str, path: &'a str) -> Self {
        Records {
            path,
            lines: text.lines().enumerate(),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_string(),
            line,
            message: message.into(),
        }
    }
}

impl<'a> Iterator for Records<'a> {
    /// `(1-based line number, tab-separated fields)`
    type Item = (usize, Vec<&'a str>);

    fn next(&mut self) -> Option<Self::Item> {
        for (k, raw) in self.lines.by_ref() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            return Some((k + 1, line.split('\t').map(str::trim).collect()));
        }
        None
    }
}

fn parse_label(recs: &Records<'_>, line: usize, field: &str) -> Result<usize> {
    match field.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(recs.err(line, format!("invalid node label '{field}'"))),
    }
}

fn parse_value(recs: &Records<'_>, line: usize, field: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(recs.err(line, format!("invalid number '{field}'"))),
    }
}

fn ordered_pair(recs: &Records<'_>, line: usize, a: usize, b: usize) -> Result<(usize, usize)> {
    match a.cmp(&b) {
        std::cmp::Ordering::Less => Ok((a, b)),
        std::cmp::Ordering::Greater => Ok((b, a)),
        std::cmp::Ordering::Equal => Err(recs.err(line, format!("self-pair ({a}, {b})"))),
    }
}

pub fn parse_edge_list(text: &str, path: &str) -> Result<EdgeList> {
    let mut recs = Records::new(text, path);
    let (line, header) = recs.next().ok_or_else(|| recs.err(1, "empty file"))?;
    if header != ["i", "j", "weight"] {
        return Err(recs.err(line, "expected header 'i<TAB>j<TAB>weight'"));
    }
    let mut seen = HashMap::new();
    let mut pairs = Vec::new();
    let mut max_label = 0;
    while let Some((line, f)) = recs.next() {
        if f.len() != 3 {
            return Err(recs.err(line, format!("expected 3 tab-separated fields, found {}", f.len())));
        }
        let a = parse_label(&recs, line, f[0])?;
        let b = parse_label(&recs, line, f[1])?;
        let w = parse_value(&recs, line, f[2])?;
        let (i, j) = ordered_pair(&recs, line, a, b)?;
        if w < 0.0 {
            return Err(Error::NegativeWeight { i, j, weight: w, line });
        }
        if seen.insert((i, j), line).is_some() {
            return Err(Error::DuplicatePair { i, j, line });
        }
        max_label = max_label.max(j);
        pairs.push((i - 1, j - 1, w));
    }
    Ok(EdgeList { pairs, max_label })
}

pub fn parse_covariates(text: &str, path: &str) -> Result<CovariateSource> {
    let mut recs = Records::new(text, path);
    let (line, header) = recs.next().ok_or_else(|| recs.err(1, "empty file"))?;
    if header.first() != Some(&"i") {
        return Err(recs.err(line, "header must start with 'i'"));
    }
    if header.get(1) == Some(&"j") {
        let names: Vec<String> = header[2..].iter().map(|s| s.to_string()).collect();
        let mut rows = HashMap::new();
        let mut max_label = 0;
        while let Some((line, f)) = recs.next() {
            if f.len() != names.len() + 2 {
                return Err(recs.err(line, format!("expected {} fields, found {}", names.len() + 2, f.len())));
            }
            let a = parse_label(&recs, line, f[0])?;
            let b = parse_label(&recs, line, f[1])?;
            let (i, j) = ordered_pair(&recs, line, a, b)?;
            let z = f[2..].iter().map(|s| parse_value(&recs, line, s)).collect::<Result<Vec<_>>>()?;
            if rows.insert((i - 1, j - 1), z).is_some() {
                return Err(Error::DuplicatePair { i, j, line });
            }
            max_label = max_label.max(j);
        }
        return Ok(CovariateSource::Edge {
            names,
            rows,
            max_label,
        });
    }

    let mut names = Vec::new();
    let mut maps = Vec::new();
    for col in &header[1..] {
        match col.split_once(':') {
            Some((name, map)) => {
                names.push(name.trim().to_string());
                maps.push(Some(map.parse()?));
            }
            None => {
                names.push(col.to_string());
                maps.push(None);
            }
        }
    }
    let mut values: Vec<Option<Vec<f64>>> = Vec::new();
    while let Some((line, f)) = recs.next() {
        if f.len() != names.len() + 1 {
            return Err(recs.err(line, format!("expected {} fields, found {}", names.len() + 1, f.len())));
        }
        let node = parse_label(&recs, line, f[0])?;
        let x = f[1..].iter().map(|s| parse_value(&recs, line, s)).collect::<Result<Vec<_>>>()?;
        if values.len() < node {
            values.resize(node, None);
        }
        if values[node - 1].replace(x).is_some() {
            return Err(recs.err(line, format!("duplicate node {node}")));
        }
    }
    Ok(CovariateSource::Nodal { names, maps, values })
}

/// Load and validate a dataset; `n` is the largest label in either file.
pub fn load_dataset(edge_path: &Path, covariate_path: &Path) -> Result<Dataset> {
    load_dataset_with_maps(edge_path, covariate_path, None)
}

pub fn load_dataset_with_maps(
    edge_path: &Path,
    covariate_path: &Path,
    maps: Option<&[CovariateMap]>,
) -> Result<Dataset> {
    let edges = parse_edge_list(&read_text(edge_path)?, &edge_path.display().to_string())?;
    let covs = parse_covariates(&read_text(covariate_path)?, &covariate_path.display().to_string())?;
    let n = edges.max_label.max(covs.max_label());
    let covariates = covs.to_tensor(n, maps)?;
    let network = Network::from_pairs(n, edges.pairs)?;
    Ok(Dataset {
        network,
        covariates,
        covariate_names: covs.names().to_vec(),
    })
}

/// Edge list with nonzero weights only.
pub fn write_edge_list(net: &Network, path: &Path) -> Result<()> {
    let mut out = String::from("i\tj\tweight\n");
    let n = net.n();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = net.weight(i, j);
            if w != 0.0 {
                out.push_str(&format!("{}\t{}\t{}\n", i + 1, j + 1, w));
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Edge-mode covariate file covering every pair.
pub fn write_edge_covariates(z: &CovariateTensor, names: &[String], path: &Path) -> Result<()> {
    if names.len() != z.p() {
        return Err(Error::Shape(format!("{} names for {} covariates", names.len(), z.p())));
    }
    let mut out = String::from("i\tj");
    for name in names {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..z.n() {
        for j in (i + 1)..z.n() {
            out.push_str(&format!("{}\t{}", i + 1, j + 1));
            for v in z.get(i, j) {
                out.push_str(&format!("\t{v}"));
            }
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Pretty JSON whose floats all carry 17 significant digits; non-finite
/// values become `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    struct Exact<'a>(PrettyFormatter<'a>);

    impl Formatter for Exact<'_> {
        fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
            w.write_all(format_float(v).as_bytes())
        }
        fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
            self.write_f64(w, f64::from(v))
        }
        fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.begin_array(w)
        }
        fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.end_array(w)
        }
        fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
            self.0.begin_array_value(w, first)
        }
        fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.end_array_value(w)
        }
        fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.begin_object(w)
        }
        fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.end_object(w)
        }
        fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
            self.0.begin_object_key(w, first)
        }
        fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.begin_object_value(w)
        }
        fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.end_object_value(w)
        }
    }

    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Exact(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = to_json_string(value)?;
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTest {
    /// 1-based labels.
    pub i: usize,
    pub j: usize,
    pub difference: f64,
    pub se: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub ci: Interval,
}

/// Serialized result of a fit. The key set is fixed: optional parts are
/// `null` rather than absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub family: EdgeFamily,
    pub n: usize,
    pub p: usize,
    pub covariate_names: Vec<String>,
    pub level: f64,
    pub converged: bool,
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub final_f_norm: f64,
    pub final_q_norm: f64,
    pub beta_hat: Vec<f64>,
    pub beta_se: Vec<f64>,
    pub gamma_hat: Vec<f64>,
    pub gamma_se: Vec<f64>,
    pub gamma_ci: Vec<Interval>,
    pub gamma_bc: Option<Vec<f64>>,
    pub gamma_bc_ci: Option<Vec<Interval>>,
    pub homogeneity_tests: Vec<PairTest>,
    pub diagnostics: DiagnosticsReport,
}

pub const FIT_REPORT_KEYS: [&str; 19] = [
    "family",
    "n",
    "p",
    "covariate_names",
    "level",
    "converged",
    "inner_iters",
    "outer_iters",
    "final_f_norm",
    "final_q_norm",
    "beta_hat",
    "beta_se",
    "gamma_hat",
    "gamma_se",
    "gamma_ci",
    "gamma_bc",
    "gamma_bc_ci",
    "homogeneity_tests",
    "diagnostics",
];

#[derive(Debug, Clone)]
pub struct FitRequest {
    pub family: EdgeFamily,
    pub level: f64,
    pub bias_correct: bool,
    /// 1-based pairs to test for `beta_i = beta_j`.
    pub pairs: Vec<(usize, usize)>,
    pub options: FitOptions,
    pub inference: InferenceOptions,
}

impl FitRequest {
    pub fn new(family: EdgeFamily) -> Self {
        FitRequest {
            family,
            level: 0.95,
            bias_correct: false,
            pairs: Vec::new(),
            options: FitOptions::default(),
            inference: InferenceOptions::default(),
        }
    }
}

/// Fit, run inference and assemble the report. Non-convergence is an error.
pub fn fit_report(data: &Dataset, req: &FitRequest) -> Result<(FitResult, FitReport)> {
    let (net, z, fam) = (&data.network, &data.covariates, req.family);
    net.check_support(fam)?;
    let n = net.n();
    for &(i, j) in &req.pairs {
        if i == 0 || j == 0 || i > n || j > n || i == j {
            return Err(Error::Config(format!("pair ({i}, {j}) invalid for n = {n}")));
        }
    }
    crate::inference::critical_value(req.level).map_err(|e| Error::Config(e.to_string()))?;

    let fitted = fit(net, z, fam, &req.options)?;
    fitted.require_converged()?;
    let vars = beta_variances(&fitted, net, z, fam)?;
    let inf = gamma_inference_with(&fitted, net, z, fam, &req.inference)?;
    let diagnostics = condition_diagnostics(&fitted.params(), z, fam)?;
    let report = assemble(data, req, &fitted, &vars, &inf, diagnostics)?;
    Ok((fitted, report))
}

fn assemble(
    data: &Dataset,
    req: &FitRequest,
    fitted: &FitResult,
    vars: &BetaVariances,
    inf: &InferenceResult,
    diagnostics: DiagnosticsReport,
) -> Result<FitReport> {
    let n = fitted.n();
    let p = inf.p();
    let ci = |bc: bool| -> Result<Vec<Interval>> {
        (0..p)
            .map(|k| {
                let e = if bc {
                    inf.gamma_bc_interval(k, req.level)?
                } else {
                    inf.gamma_interval(k, req.level)?
                };
                Ok(Interval {
                    lower: e.lower,
                    upper: e.upper,
                })
            })
            .collect()
    };
    let mut tests = Vec::with_capacity(req.pairs.len());
    for &(a, b) in &req.pairs {
        let (i, j) = (a - 1, b - 1);
        let t = homogeneity_test(fitted, vars, i, j)?;
        let e = beta_diff_interval(fitted, vars, i, j, req.level)?;
        tests.push(PairTest {
            i: a,
            j: b,
            difference: e.point,
            se: vars.diff_scale(i, j),
            statistic: t.statistic,
            p_value: t.p_value,
            ci: Interval {
                lower: e.lower,
                upper: e.upper,
            },
        });
    }
    Ok(FitReport {
        family: req.family,
        n,
        p,
        covariate_names: data.covariate_names.clone(),
        level: req.level,
        converged: fitted.converged,
        inner_iters: fitted.inner_iters,
        outer_iters: fitted.outer_iters,
        final_f_norm: fitted.final_f_norm,
        final_q_norm: fitted.final_q_norm,
        beta_hat: fitted.beta_hat.iter().copied().collect(),
        beta_se: (0..n).map(|i| vars.beta_se(i)).collect(),
        gamma_hat: inf.gamma_hat.iter().copied().collect(),
        gamma_se: (0..p).map(|k| inf.gamma_se(k)).collect(),
        gamma_ci: ci(false)?,
        gamma_bc: req.bias_correct.then(|| inf.gamma_bc.iter().copied().collect()),
        gamma_bc_ci: if req.bias_correct { Some(ci(true)?) } else { None },
        homogeneity_tests: tests,
        diagnostics,
    })
}

/// Rows `target,coverage,mean_length`. Targets are `beta_i-beta_j` for
/// tracked pairs, then `gamma_k` and `gamma_k_bc`.
pub fn coverage_csv(report: &MonteCarloReport) -> String {
    let mut out = String::from("target,coverage,mean_length\n");
    for pc in &report.pairs {
        out.push_str(&format!(
            "beta_{}-beta_{},{},{}\n",
            pc.i,
            pc.j,
            format_float(pc.coverage),
            format_float(pc.mean_length)
        ));
    }
    for g in &report.gamma {
        let len = format_float(g.mean_length);
        out.push_str(&format!("gamma_{},{},{len}\n", g.index, format_float(g.coverage)));
        out.push_str(&format!("gamma_{}_bc,{},{len}\n", g.index, format_float(g.coverage_bc)));
    }
    out
}

/// Rows `target,theoretical_quantile,empirical_quantile`, one block per
/// tracked pair.
pub fn qq_csv(report: &MonteCarloReport) -> String {
    let mut out = String::from("target,theoretical_quantile,empirical_quantile\n");
    for pc in &report.pairs {
        for q in &pc.qq_points {
            out.push_str(&format!(
                "beta_{}-beta_{},{},{}\n",
                pc.i,
                pc.j,
                format_float(q.theoretical),
                format_float(q.empirical)
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub master_seed: u64,
    pub n: usize,
    pub reps: usize,
    pub family: EdgeFamily,
    pub l_spec: String,
    pub l_value: f64,
    pub successes: usize,
    pub failures: usize,
    pub median_beta_sup_error: f64,
    pub mean_abs_bc_shift: Vec<f64>,
    pub package_version: String,
    pub threads: usize,
    pub elapsed_seconds: f64,
}

impl RunMetadata {
    pub fn new(report: &MonteCarloReport, elapsed_seconds: f64) -> Self {
        let d = &report.design;
        RunMetadata {
            master_seed: d.master_seed,
            n: d.n,
            reps: d.reps,
            family: d.family,
            l_spec: d.l_spec.to_string(),
            l_value: d.l_spec.value(d.n),
            successes: report.successes,
            failures: report.failures,
            median_beta_sup_error: report.median_beta_sup_error,
            mean_abs_bc_shift: report.gamma.iter().map(|g| g.mean_abs_bc_shift).collect(),
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            threads: rayon::current_num_threads(),
            elapsed_seconds,
        }
    }
}

/// Write `coverage.csv`, `qq_points.csv` and `metadata.json` into `dir`.
pub fn write_simulation_outputs(report: &MonteCarloReport, elapsed_seconds: f64, dir: &Path) -> Result<()> {
    let io_err = |e: io::Error| Error::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io_err)?;
    fs::write(dir.join("coverage.csv"), coverage_csv(report)).map_err(io_err)?;
    fs::write(dir.join("qq_points.csv"), qq_csv(report)).map_err(io_err)?;
    write_json(&RunMetadata::new(report, elapsed_seconds), &dir.join("metadata.json"))
}

/// Write `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
