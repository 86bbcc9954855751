//! Standard errors, confidence intervals, the degree homogeneity test and the
//! analytic bias correction for `gamma_hat`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::FitResult;
use crate::families::{normal_cdf, normal_quantile, EdgeFamily};
use crate::linalg::inverse_small;
use crate::model::{covariate_blocks, jacobian_v, s_approx, CovariateTensor, Network, Params};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl IntervalEstimate {
    fn symmetric(point: f64, se: f64, level: f64) -> Result<Self> {
        let half = critical_value(level)? * se;
        Ok(IntervalEstimate {
            point,
            lower: point - half,
            upper: point + half,
            level,
        })
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Two-sided normal critical value `z_{(1+level)/2}`.
pub fn critical_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} not in (0, 1)")));
    }
    Ok(normal_quantile(0.5 * (1.0 + level)))
}

/// `v_ii = sum_j mu'(pi_ij)` and `u_ii = sum_j Var(a_ij)` at the estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaVariances {
    pub v_diag: DVector<f64>,
    pub u_diag: DVector<f64>,
}

impl BetaVariances {
    /// Marginal standard error of `beta_hat_i`, `u_ii^{1/2} / v_ii`.
    pub fn beta_se(&self, i: usize) -> f64 {
        self.u_diag[i].sqrt() / self.v_diag[i]
    }

    /// Scale of the standardized difference, `(1/v_ii + 1/v_jj)^{1/2}`.
    pub fn diff_scale(&self, i: usize, j: usize) -> f64 {
        (1.0 / self.v_diag[i] + 1.0 / self.v_diag[j]).sqrt()
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.v_diag.len();
        if i >= n || j >= n {
            return Err(Error::Index(format!("node pair ({i}, {j}) with n = {n}")));
        }
        if i == j {
            return Err(Error::Index(format!("pair needs two distinct nodes, got ({i}, {j})")));
        }
        Ok(())
    }
}

pub fn beta_variances(fit: &FitResult, net: &Network, z: &CovariateTensor, fam: EdgeFamily) -> Result<BetaVariances> {
    fit.require_converged()?;
    if net.n() != z.n() || fit.n() != z.n() || fit.gamma_hat.len() != z.p() {
        return Err(Error::Shape("fit, network and covariates disagree".into()));
    }
    Ok(variances_at(&fit.params(), z, fam))
}

fn variances_at(params: &Params, z: &CovariateTensor, fam: EdgeFamily) -> BetaVariances {
    let n = z.n();
    let mut v = DVector::zeros(n);
    let mut u = DVector::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let pi = params.predictor(z, i, j);
            let d = fam.d1(pi);
            let s = fam.variance(pi);
            v[i] += d;
            v[j] += d;
            u[i] += s;
            u[j] += s;
        }
    }
    BetaVariances { v_diag: v, u_diag: u }
}

/// Normal interval for `beta_i - beta_j` with scale `(1/v_ii + 1/v_jj)^{1/2}`.
pub fn beta_diff_interval(
    fit: &FitResult,
    vars: &BetaVariances,
    i: usize,
    j: usize,
    level: f64,
) -> Result<IntervalEstimate> {
    fit.require_converged()?;
    vars.check_pair(i, j)?;
    IntervalEstimate::symmetric(fit.beta_hat[i] - fit.beta_hat[j], vars.diff_scale(i, j), level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Test of `beta_i = beta_j`: `|beta_i - beta_j| / (1/v_ii + 1/v_jj)^{1/2}`
/// against the standard normal, two-sided.
pub fn homogeneity_test(fit: &FitResult, vars: &BetaVariances, i: usize, j: usize) -> Result<HomogeneityTest> {
    fit.require_converged()?;
    vars.check_pair(i, j)?;
    let statistic = (fit.beta_hat[i] - fit.beta_hat[j]).abs() / vars.diff_scale(i, j);
    Ok(HomogeneityTest {
        statistic,
        p_value: two_sided_p(statistic),
    })
}

pub fn two_sided_p(statistic: f64) -> f64 {
    2.0 * normal_cdf(-statistic.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceOptions {
    /// Sign applied to the plug-in bias estimate.
    pub bias_sign: f64,
    /// Replace `V^{-1}` by its diagonal approximation `S` when forming the
    /// projected covariates. Each entry of `V^{-1} - S` is `O(n^{-2})`, but
    /// the error is nearly rank one, so `S C` misses a term of the order of
    /// the covariate mean; only use this for centred covariates.
    pub diagonal_approx: bool,
    /// Use the projected covariates `z~_kj` instead of `z_kj` in the bias
    /// numerator. This accounts for the dependence of `beta_hat` on `gamma`;
    /// for Poisson edges the resulting bias is identically zero.
    pub projected_bias: bool,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            bias_sign: 1.0,
            diagonal_approx: false,
            projected_bias: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub v_diag: DVector<f64>,
    pub u_diag: DVector<f64>,
    /// Profiled Jacobian at the estimate (unnormalized sum over pairs).
    pub h_hat: DMatrix<f64>,
    /// `sum_{i<j} lambda_ij z~_ij z~_ij'`.
    pub sigma_hat: DMatrix<f64>,
    /// Plug-in bias `(1/(2 sqrt N)) sum_k [sum_j z_kj mu''_kj] / [sum_j mu'_kj]`.
    pub b_hat: DVector<f64>,
    /// Sandwich covariance `H^{-1} Sigma H^{-1}` of `gamma_hat`.
    pub gamma_cov: DMatrix<f64>,
    pub gamma_hat: DVector<f64>,
    pub gamma_bc: DVector<f64>,
    /// Number of node pairs `n (n - 1) / 2`.
    pub n_pairs: usize,
}

impl InferenceResult {
    pub fn p(&self) -> usize {
        self.gamma_hat.len()
    }

    pub fn gamma_se(&self, k: usize) -> f64 {
        self.gamma_cov[(k, k)].sqrt()
    }

    fn check_coef(&self, k: usize) -> Result<()> {
        if k >= self.p() {
            return Err(Error::Index(format!("coefficient {k} with p = {}", self.p())));
        }
        Ok(())
    }

    pub fn gamma_interval(&self, k: usize, level: f64) -> Result<IntervalEstimate> {
        self.check_coef(k)?;
        IntervalEstimate::symmetric(self.gamma_hat[k], self.gamma_se(k), level)
    }

    /// Interval centred at the bias-corrected estimate; same width as [`Self::gamma_interval`].
    pub fn gamma_bc_interval(&self, k: usize, level: f64) -> Result<IntervalEstimate> {
        self.check_coef(k)?;
        IntervalEstimate::symmetric(self.gamma_bc[k], self.gamma_se(k), level)
    }

    /// Wald test of `gamma_k = 0` using the uncorrected estimate.
    pub fn gamma_wald(&self, k: usize) -> Result<HomogeneityTest> {
        self.check_coef(k)?;
        let statistic = self.gamma_hat[k] / self.gamma_se(k);
        Ok(HomogeneityTest {
            statistic,
            p_value: two_sided_p(statistic),
        })
    }
}

pub fn gamma_inference(
    fit: &FitResult,
    net: &Network,
    z: &CovariateTensor,
    fam: EdgeFamily,
) -> Result<InferenceResult> {
    gamma_inference_with(fit, net, z, fam, &InferenceOptions::default())
}

pub fn gamma_inference_with(
    fit: &FitResult,
    net: &Network,
    z: &CovariateTensor,
    fam: EdgeFamily,
    opts: &InferenceOptions,
) -> Result<InferenceResult> {
    let vars = beta_variances(fit, net, z, fam)?;
    let params = fit.params();
    let (n, p) = (z.n(), z.p());
    let v = jacobian_v(&params, z, fam)?;
    let blocks = covariate_blocks(&params, z, fam);

    // rows of `proj` are (V^{-1} C)_i, so V_Qbeta V^{-1} T_ij = proj_i + proj_j
    let proj = if opts.diagonal_approx {
        let s = s_approx(&v);
        DMatrix::from_fn(n, p, |i, k| blocks.cross[(i, k)] * s[i])
    } else {
        v.solver()?.solve(&blocks.cross)?
    };
    let h_hat = &blocks.q_gamma - blocks.cross.transpose() * &proj;

    let mut sigma_hat = DMatrix::zeros(p, p);
    let mut ztilde = vec![0.0; p];
    let mut curvature = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        for j in (i + 1)..n {
            let pi = params.predictor(z, i, j);
            let lambda = fam.variance(pi);
            let d2 = fam.d2(pi);
            let zij = z.get(i, j);
            for k in 0..p {
                ztilde[k] = zij[k] - proj[(i, k)] - proj[(j, k)];
                let w = if opts.projected_bias { ztilde[k] } else { zij[k] };
                curvature[(i, k)] += w * d2;
                curvature[(j, k)] += w * d2;
            }
            for a in 0..p {
                for b in 0..p {
                    sigma_hat[(a, b)] += lambda * ztilde[a] * ztilde[b];
                }
            }
        }
    }

    let n_pairs = z.n_pairs();
    let root_n = (n_pairs as f64).sqrt();
    let mut b_hat = DVector::zeros(p);
    for k in 0..n {
        for a in 0..p {
            b_hat[a] += curvature[(k, a)] / vars.v_diag[k];
        }
    }
    b_hat *= opts.bias_sign / (2.0 * root_n);

    let h_inv = inverse_small(&h_hat)?;
    let cov = &h_inv * &sigma_hat * h_inv.transpose();
    let gamma_cov = (&cov + cov.transpose()) * 0.5;
    // gamma_bc = gamma - N^{-1/2} (H / N)^{-1} B
    let gamma_bc = &fit.gamma_hat - (&h_inv * &b_hat) * root_n;

    Ok(InferenceResult {
        v_diag: vars.v_diag,
        u_diag: vars.u_diag,
        h_hat,
        sigma_hat,
        b_hat,
        gamma_cov,
        gamma_hat: fit.gamma_hat.clone(),
        gamma_bc,
        n_pairs,
    })
}
