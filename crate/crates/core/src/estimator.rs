//! Two-stage moment estimator.
//!
//! The inner stage solves `F_gamma(beta) = 0` for fixed `gamma` by Newton's
//! method on the balanced Jacobian `V`. The outer stage runs Newton on the
//! profiled equation `Q_c(gamma) = Q(beta_hat_gamma, gamma) = 0` using the
//! profiled Jacobian `H`. Both stages backtrack by step halving when the
//! residual sup-norm fails to decrease; near the root this is plain Newton.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::EdgeFamily;
use crate::linalg::{pcg, solve_small, sup_norm, CgOptions, SpdOperator};
use crate::model::{
    covariate_blocks, jacobian_v, profile_h_with, residual_f_unchecked, residual_q_unchecked, CovariateTensor,
    Network, Params,
};

/// Starting point for `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaInit {
    Zeros,
    /// Degree-based warm start.
    #[default]
    LogDegree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Tolerance on `||F||_inf / max(1, ||d||_inf)`.
    pub inner_tol: f64,
    /// Tolerance on `||Q||_inf / max(1, sum_{i<j} ||z_ij||_inf a_ij)`.
    pub outer_tol: f64,
    pub max_inner_iters: usize,
    pub max_outer_iters: usize,
    pub beta_init: BetaInit,
    /// Maximum number of step halvings per Newton step.
    pub damping: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            inner_tol: 1e-10,
            outer_tol: 1e-10,
            max_inner_iters: 200,
            max_outer_iters: 100,
            beta_init: BetaInit::LogDegree,
            damping: 30,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::Config("max_inner_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub gamma: Vec<f64>,
    /// Relative `||Q_c||_inf` at this `gamma`.
    pub q_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta_hat: DVector<f64>,
    pub gamma_hat: DVector<f64>,
    /// Total inner Newton iterations across all outer steps.
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub converged: bool,
    /// `||F||_inf / max(1, ||d||_inf)` at the returned estimate.
    pub final_f_norm: f64,
    /// `||Q||_inf / max(1, sum_{i<j} ||z_ij||_inf a_ij)` at the returned estimate.
    pub final_q_norm: f64,
    pub trace: Vec<TraceEntry>,
}

impl FitResult {
    pub fn params(&self) -> Params {
        Params::new(self.beta_hat.clone(), self.gamma_hat.clone())
    }

    pub fn n(&self) -> usize {
        self.beta_hat.len()
    }

    pub fn require_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged)
        }
    }
}

/// Scale used for the relative degree residual.
pub fn degree_scale(net: &Network) -> f64 {
    sup_norm(net.degrees()).max(1.0)
}

/// Scale used for the relative covariate residual.
pub fn covariate_scale(net: &Network, z: &CovariateTensor) -> f64 {
    let n = net.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let zmax = z.get(i, j).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            s += zmax * net.weight(i, j);
        }
    }
    s.max(1.0)
}

fn check_inputs(net: &Network, z: &CovariateTensor, fam: EdgeFamily) -> Result<()> {
    if net.n() != z.n() {
        return Err(Error::Shape(format!("network has {} nodes, covariates {}", net.n(), z.n())));
    }
    net.check_support(fam)?;
    let upper = (net.n() - 1) as f64;
    for (node, &degree) in net.degrees().iter().enumerate() {
        if degree <= 0.0 || (fam.is_binary() && degree >= upper) {
            return Err(Error::DegenerateDegree { node, degree });
        }
    }
    Ok(())
}

fn check_design(z: &CovariateTensor) -> Result<()> {
    if z.p() == 0 {
        return Ok(());
    }
    let eig = z.gram().symmetric_eigenvalues();
    let max = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if max == 0.0 || min <= 1e-12 * max {
        return Err(Error::DegenerateDesign(format!(
            "covariate Gram matrix is singular (eigenvalues in [{min:e}, {max:e}])"
        )));
    }
    Ok(())
}

/// Degree-based starting values for `beta`.
pub fn initial_beta(net: &Network, fam: EdgeFamily, init: BetaInit) -> DVector<f64> {
    let n = net.n();
    match init {
        BetaInit::Zeros => DVector::zeros(n),
        BetaInit::LogDegree => match fam {
            EdgeFamily::Poisson => {
                let d = net.degrees().map(|v| v.max(0.5));
                let total: f64 = d.sum();
                let root_sum: f64 = d.iter().map(|v| v.sqrt()).sum();
                let cross = root_sum * root_sum - total;
                let scale = (n - 1) as f64 * total / cross;
                d.map(|v| 0.5 * (v / (n - 1) as f64 * scale).ln())
            }
            EdgeFamily::Logistic | EdgeFamily::Probit => {
                let lo = 1.0 / (2.0 * n as f64);
                net.degrees().map(|v| {
                    let r = (v / (n - 1) as f64).clamp(lo, 1.0 - lo);
                    0.5 * (r / (1.0 - r)).ln()
                })
            }
        },
    }
}

struct InnerSolution {
    beta: DVector<f64>,
    iters: usize,
    f_norm: f64,
}

/// Newton on `F_gamma(beta) = 0`. Iterates until the relative residual is at
/// most `target`; a stall is accepted only when `accept` is already met.
fn newton_beta(
    net: &Network,
    z: &CovariateTensor,
    fam: EdgeFamily,
    gamma: &DVector<f64>,
    beta0: DVector<f64>,
    opts: &FitOptions,
    target: f64,
) -> Result<InnerSolution> {
    let scale = degree_scale(net);
    let mut params = Params::new(beta0, gamma.clone());
    let mut f = residual_f_unchecked(net, &params, z, fam);
    let mut norm = sup_norm(&f) / scale;
    let mut iters = 0;
    loop {
        if norm <= target {
            break;
        }
        if iters >= opts.max_inner_iters {
            if norm <= opts.inner_tol {
                break;
            }
            return Err(Error::MaxIterations {
                stage: "inner beta solve",
                iters,
                residual: norm,
            });
        }
        let v = jacobian_v(&params, z, fam)?;
        let step = v.solver()?.solve_vec(&f)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.damping {
            let trial = Params::new(&params.beta - &step * t, params.gamma.clone());
            let f_trial = residual_f_unchecked(net, &trial, z, fam);
            let n_trial = sup_norm(&f_trial) / scale;
            if n_trial < norm {
                params = trial;
                f = f_trial;
                norm = n_trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iters += 1;
        if !accepted {
            if norm <= opts.inner_tol {
                break;
            }
            return Err(Error::MaxIterations {
                stage: "inner beta solve (line search stalled)",
                iters,
                residual: norm,
            });
        }
    }
    Ok(InnerSolution {
        beta: params.beta,
        iters,
        f_norm: norm,
    })
}

// Inner solves feeding the profiled residual are pushed well below the
// user tolerance so Q_c is resolved to the outer tolerance.
fn inner_target(opts: &FitOptions) -> f64 {
    (opts.inner_tol * 1e-3).max(1e-14)
}

/// `beta_hat_gamma`: the root of the degree equations for fixed `gamma`.
pub fn solve_beta_given_gamma(
    net: &Network,
    gamma: &DVector<f64>,
    z: &CovariateTensor,
    fam: EdgeFamily,
    opts: &FitOptions,
) -> Result<DVector<f64>> {
    opts.validate()?;
    check_inputs(net, z, fam)?;
    if gamma.len() != z.p() {
        return Err(Error::Shape(format!("gamma has length {}, covariates p = {}", gamma.len(), z.p())));
    }
    let beta0 = initial_beta(net, fam, opts.beta_init);
    newton_beta(net, z, fam, gamma, beta0, opts, opts.inner_tol).map(|s| s.beta)
}

/// Two-stage Newton fit of `(beta, gamma)`.
///
/// Hitting `max_outer_iters` yields a result with `converged == false`
/// rather than an error; inner-solve failures are errors.
pub fn fit(net: &Network, z: &CovariateTensor, fam: EdgeFamily, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    check_inputs(net, z, fam)?;
    check_design(z)?;
    let q_scale = covariate_scale(net, z);
    let target = inner_target(opts);

    let mut gamma = DVector::zeros(z.p());
    let first = newton_beta(net, z, fam, &gamma, initial_beta(net, fam, opts.beta_init), opts, target)?;
    let mut inner_iters = first.iters;
    let mut beta = first.beta;
    let mut f_norm = first.f_norm;
    let mut q = residual_q_unchecked(net, &Params::new(beta.clone(), gamma.clone()), z, fam);
    let mut q_norm = sup_norm(&q) / q_scale;
    let mut trace = vec![TraceEntry {
        gamma: gamma.iter().copied().collect(),
        q_norm,
    }];

    let mut outer_iters = 0;
    while outer_iters < opts.max_outer_iters && q_norm > opts.outer_tol {
        let params = Params::new(beta.clone(), gamma.clone());
        let v = jacobian_v(&params, z, fam)?;
        let h = profile_h_with(&params, z, fam, &v)?;
        let step = solve_small(&h, &q)?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.damping {
            let trial_gamma = &gamma - &step * t;
            match newton_beta(net, z, fam, &trial_gamma, beta.clone(), opts, target) {
                Ok(sol) => {
                    inner_iters += sol.iters;
                    let trial = Params::new(sol.beta.clone(), trial_gamma.clone());
                    let q_trial = residual_q_unchecked(net, &trial, z, fam);
                    let n_trial = sup_norm(&q_trial) / q_scale;
                    if n_trial < q_norm {
                        accepted = Some((trial_gamma, sol, q_trial, n_trial));
                        break;
                    }
                }
                // an overlong trial step can leave the inner solve stranded
                Err(Error::MaxIterations { .. }) => {}
                Err(e) => return Err(e),
            }
            t *= 0.5;
        }
        let Some((g, sol, q_new, n_new)) = accepted else {
            break;
        };
        gamma = g;
        beta = sol.beta;
        f_norm = sol.f_norm;
        q = q_new;
        q_norm = n_new;
        outer_iters += 1;
        trace.push(TraceEntry {
            gamma: gamma.iter().copied().collect(),
            q_norm,
        });
    }

    Ok(FitResult {
        converged: q_norm <= opts.outer_tol && f_norm <= opts.inner_tol,
        beta_hat: beta,
        gamma_hat: gamma,
        inner_iters,
        outer_iters,
        final_f_norm: f_norm,
        final_q_norm: q_norm,
        trace,
    })
}

/// `V` applied matrix-free, recomputing `mu'(pi_ij)` on every product so no
/// n x n matrix is stored.
struct PairwiseJacobian<'a> {
    params: &'a Params,
    z: &'a CovariateTensor,
    fam: EdgeFamily,
    diag: DVector<f64>,
}

impl<'a> PairwiseJacobian<'a> {
    fn new(params: &'a Params, z: &'a CovariateTensor, fam: EdgeFamily) -> Self {
        let n = z.n();
        let mut diag = DVector::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = fam.d1(params.predictor(z, i, j));
                diag[i] += d;
                diag[j] += d;
            }
        }
        PairwiseJacobian { params, z, fam, diag }
    }
}

impl SpdOperator for PairwiseJacobian<'_> {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        let n = self.dim();
        out.copy_from(&self.diag.component_mul(x));
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.fam.d1(self.params.predictor(self.z, i, j));
                out[i] += d * x[j];
                out[j] += d * x[i];
            }
        }
    }

    fn diagonal(&self) -> DVector<f64> {
        self.diag.clone()
    }
}

fn merit(net: &Network, z: &CovariateTensor, fam: EdgeFamily, params: &Params, scales: (f64, f64)) -> (f64, f64) {
    let f = sup_norm(&residual_f_unchecked(net, params, z, fam)) / scales.0;
    let q = sup_norm(&residual_q_unchecked(net, params, z, fam)) / scales.1;
    (f, q)
}

/// Alternating fit: a damped Newton sweep on `beta` with `gamma` fixed, then
/// a Newton step on `gamma` through the profiled Jacobian (with the matching
/// first-order move in `beta`), repeated.
///
/// All solves against `V` are matrix-free conjugate gradients, so memory
/// beyond the covariates stays O(n p). Converges to the same root as [`fit`].
pub fn alternating_fit(net: &Network, z: &CovariateTensor, fam: EdgeFamily, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    check_inputs(net, z, fam)?;
    check_design(z)?;
    let scales = (degree_scale(net), covariate_scale(net, z));
    let cg = CgOptions::default();
    let p = z.p();

    let mut params = Params::new(initial_beta(net, fam, opts.beta_init), DVector::zeros(p));
    let (mut f_norm, mut q_norm) = merit(net, z, fam, &params, scales);
    let mut trace = vec![TraceEntry {
        gamma: params.gamma.iter().copied().collect(),
        q_norm,
    }];
    let mut inner_iters = 0;
    let mut outer_iters = 0;

    while outer_iters < opts.max_outer_iters && !(f_norm <= opts.inner_tol && q_norm <= opts.outer_tol) {
        let mut progressed = false;

        // beta sweep
        let f = residual_f_unchecked(net, &params, z, fam);
        let step = pcg(&PairwiseJacobian::new(&params, z, fam), &f, cg)?;
        let mut t = 1.0;
        for _ in 0..=opts.damping {
            let trial = Params::new(&params.beta - &step * t, params.gamma.clone());
            let (fn_trial, qn_trial) = merit(net, z, fam, &trial, scales);
            if fn_trial < f_norm {
                params = trial;
                f_norm = fn_trial;
                q_norm = qn_trial;
                progressed = true;
                break;
            }
            t *= 0.5;
        }
        inner_iters += 1;

        // coupled step from the Schur complement of the joint Jacobian:
        // dgamma = H^{-1} (Q - (V^{-1} C)' F), dbeta = V^{-1} F - (V^{-1} C) dgamma
        if p > 0 {
            let op = PairwiseJacobian::new(&params, z, fam);
            let blocks = covariate_blocks(&params, z, fam);
            let f = residual_f_unchecked(net, &params, z, fam);
            let q = residual_q_unchecked(net, &params, z, fam);
            let mut v_inv_c = DMatrix::zeros(z.n(), p);
            for k in 0..p {
                let col = pcg(&op, &blocks.cross.column(k).into_owned(), cg)?;
                v_inv_c.set_column(k, &col);
            }
            let h = &blocks.q_gamma - blocks.cross.transpose() * &v_inv_c;
            let d_gamma = solve_small(&h, &(&q - v_inv_c.transpose() * &f))?;
            let d_beta = pcg(&op, &f, cg)? - &v_inv_c * &d_gamma;
            let current = f_norm + q_norm;
            let mut t = 1.0;
            for _ in 0..=opts.damping {
                let trial = Params::new(&params.beta - &d_beta * t, &params.gamma - &d_gamma * t);
                let (fn_trial, qn_trial) = merit(net, z, fam, &trial, scales);
                if fn_trial + qn_trial < current {
                    params = trial;
                    f_norm = fn_trial;
                    q_norm = qn_trial;
                    progressed = true;
                    break;
                }
                t *= 0.5;
            }
        }
        outer_iters += 1;
        trace.push(TraceEntry {
            gamma: params.gamma.iter().copied().collect(),
            q_norm,
        });
        if !progressed {
            break;
        }
    }

    Ok(FitResult {
        converged: f_norm <= opts.inner_tol && q_norm <= opts.outer_tol,
        beta_hat: params.beta,
        gamma_hat: params.gamma,
        inner_iters,
        outer_iters,
        final_f_norm: f_norm,
        final_q_norm: q_norm,
        trace,
    })
}
