//! Network, covariates and parameters, plus the estimating-equation pieces
//! built on them: degree residuals `F`, covariate residuals `Q`, the degree
//! Jacobian `V`, its diagonal approximate inverse `S` and the profiled
//! Jacobian `H`.
//!
//! All pair sums run over `i < j` in row-major order so results are bitwise
//! reproducible. The diagonal of every pairwise matrix is zero and never
//! summed.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::EdgeFamily;
use crate::linalg::{inverse_small, SpdSolver};

/// Smallest supported node count; `beta` is not identifiable below it.
pub const MIN_NODES: usize = 3;

/// Undirected weighted network without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    weights: DMatrix<f64>,
    degrees: DVector<f64>,
}

impl Network {
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::Shape(format!("adjacency is {}x{}", n, weights.ncols())));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidNetwork(format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidNetwork(format!("self-loop at node {i}")));
            }
            for j in (i + 1)..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidNetwork(format!("weight {w} at ({i}, {j})")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::InvalidNetwork(format!("asymmetric weight at ({i}, {j})")));
                }
            }
        }
        let degrees = DVector::from_fn(n, |i, _| {
            (0..n).filter(|&j| j != i).map(|j| weights[(i, j)]).sum()
        });
        Ok(Network { weights, degrees })
    }

    /// Build from unordered pairs `(i, j, weight)`, 0-based; missing pairs are 0.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut w = DMatrix::zeros(n, n);
        for (i, j, a) in pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidNetwork(format!("bad pair ({i}, {j}) for n = {n}")));
            }
            w[(i, j)] = a;
            w[(j, i)] = a;
        }
        Network::from_weights(w)
    }

    /// Complete network with every edge weight equal to `w`.
    pub fn constant(n: usize, w: f64) -> Result<Self> {
        Network::from_weights(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { w }))
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    /// Binary families accept only 0/1 weights.
    pub fn check_support(&self, family: EdgeFamily) -> Result<()> {
        if !family.is_binary() {
            return Ok(());
        }
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w != 0.0 && w != 1.0 {
                    return Err(Error::BinaryFamilyNonbinaryWeights {
                        family: family.name(),
                        i,
                        j,
                        weight: w,
                    });
                }
            }
        }
        Ok(())
    }

    /// Relabel nodes: new node `k` is old node `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Network {
        let n = self.n();
        assert_eq!(perm.len(), n);
        let w = DMatrix::from_fn(n, n, |a, b| self.weights[(perm[a], perm[b])]);
        Network::from_weights(w).expect("permutation preserves validity")
    }
}

/// Edge covariates `z_ij`, stored densely for `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateTensor {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl CovariateTensor {
    /// `data` holds `p` values per pair, pairs ordered `(0,1), (0,2), ..., (n-2,n-1)`.
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        let pairs = n * n.saturating_sub(1) / 2;
        if data.len() != pairs * p {
            return Err(Error::Shape(format!(
                "covariate buffer has {} values, expected {} pairs x {p}",
                data.len(),
                pairs
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite covariate {bad}")));
        }
        Ok(CovariateTensor { n, p, data })
    }

    pub fn empty(n: usize) -> Self {
        CovariateTensor { n, p: 0, data: Vec::new() }
    }

    pub fn from_fn<F>(n: usize, p: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> f64,
    {
        let mut data = Vec::with_capacity(n * n.saturating_sub(1) / 2 * p);
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..p {
                    data.push(f(i, j, k));
                }
            }
        }
        CovariateTensor::new(n, p, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_pairs(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    #[inline]
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(a != b && b < self.n);
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    /// `z_ij` (symmetric in `i`, `j`).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        let k = self.pair_index(i, j) * self.p;
        &self.data[k..k + self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `z_* = max_ij ||z_ij||_inf`.
    pub fn z_star(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `sum_{i<j} z_ij z_ij'`.
    pub fn gram(&self) -> DMatrix<f64> {
        let p = self.p;
        let mut g = DMatrix::zeros(p, p);
        if p == 0 {
            return g;
        }
        for z in self.data.chunks_exact(p) {
            for a in 0..p {
                for b in 0..p {
                    g[(a, b)] += z[a] * z[b];
                }
            }
        }
        g
    }

    pub fn scaled(&self, factor: f64) -> CovariateTensor {
        CovariateTensor {
            n: self.n,
            p: self.p,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> CovariateTensor {
        assert_eq!(perm.len(), self.n);
        CovariateTensor::from_fn(self.n, self.p, |a, b, k| self.get(perm[a], perm[b])[k])
            .expect("permutation preserves shape")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub beta: DVector<f64>,
    pub gamma: DVector<f64>,
}

impl Params {
    pub fn new(beta: DVector<f64>, gamma: DVector<f64>) -> Self {
        Params { beta, gamma }
    }

    pub fn zeros(n: usize, p: usize) -> Self {
        Params::new(DVector::zeros(n), DVector::zeros(p))
    }

    fn check(&self, z: &CovariateTensor) -> Result<()> {
        if self.beta.len() != z.n() || self.gamma.len() != z.p() {
            return Err(Error::Shape(format!(
                "params (n={}, p={}) vs covariates (n={}, p={})",
                self.beta.len(),
                self.gamma.len(),
                z.n(),
                z.p()
            )));
        }
        if self.beta.iter().chain(self.gamma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite parameter".into()));
        }
        Ok(())
    }

    /// `pi_ij` for one pair.
    #[inline]
    pub fn predictor(&self, z: &CovariateTensor, i: usize, j: usize) -> f64 {
        let zij = z.get(i, j);
        let mut pi = self.beta[i] + self.beta[j];
        for (zk, gk) in zij.iter().zip(self.gamma.iter()) {
            pi += zk * gk;
        }
        pi
    }
}

fn check_network(net: &Network, z: &CovariateTensor) -> Result<()> {
    if net.n() != z.n() {
        return Err(Error::Shape(format!("network has {} nodes, covariates {}", net.n(), z.n())));
    }
    Ok(())
}

/// Degree Jacobian `V = dF/dbeta'`: off-diagonal `mu'(pi_ij)`, diagonal equal to the row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedJacobian {
    matrix: DMatrix<f64>,
}

impl BalancedJacobian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn diag(&self) -> DVector<f64> {
        self.matrix.diagonal()
    }

    pub fn solver(&self) -> Result<SpdSolver<'_>> {
        SpdSolver::new(&self.matrix)
    }

    /// `max_i |v_ii - sum_{j != i} v_ij| / v_ii`.
    pub fn balance_error(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let s: f64 = (0..n).filter(|&j| j != i).map(|j| self.matrix[(i, j)]).sum();
                (self.matrix[(i, i)] - s).abs() / self.matrix[(i, i)]
            })
            .fold(0.0, f64::max)
    }

    /// Smallest and largest off-diagonal entry (the `m`, `M` of the balanced class).
    pub fn off_diagonal_range(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                lo = lo.min(self.matrix[(i, j)]);
                hi = hi.max(self.matrix[(i, j)]);
            }
        }
        (lo, hi)
    }
}

/// Symmetric matrix of `pi_ij`; the diagonal is zero and never used.
pub fn linear_predictor(params: &Params, z: &CovariateTensor) -> Result<DMatrix<f64>> {
    params.check(z)?;
    let n = z.n();
    let mut pi = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = params.predictor(z, i, j);
            pi[(i, j)] = v;
            pi[(j, i)] = v;
        }
    }
    Ok(pi)
}

/// Matrix of edge means `mu(pi_ij)` with zero diagonal.
pub fn mean_matrix(params: &Params, z: &CovariateTensor, fam: EdgeFamily) -> Result<DMatrix<f64>> {
    let mut m = linear_predictor(params, z)?;
    let n = z.n();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = if i == j { 0.0 } else { fam.mean(m[(i, j)]) };
        }
    }
    Ok(m)
}

/// `F_i = sum_{j != i} mu(pi_ij) - d_i`.
pub fn residual_f(
    net: &Network,
    params: &Params,
    z: &CovariateTensor,
    fam: EdgeFamily,
) -> Result<DVector<f64>> {
    check_network(net, z)?;
    params.check(z)?;
    Ok(residual_f_unchecked(net, params, z, fam))
}

pub(crate) fn residual_f_unchecked(
    net: &Network,
    params: &Params,
    z: &CovariateTensor,
    fam: EdgeFamily,
) -> DVector<f64> {
    let n = z.n();
    let mut f = DVector::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let m = fam.mean(params.predictor(z, i, j));
            f[i] += m;
            f[j] += m;
        }
    }
    f -= net.degrees();
    f
}

/// `Q = sum_{i<j} z_ij (mu(pi_ij) - a_ij)`.
pub fn residual_q(
    net: &Network,
    params: &Params,
    z: &CovariateTensor,
    fam: EdgeFamily,
) -> Result<DVector<f64>> {
    check_network(net, z)?;
    params.check(z)?;
    Ok(residual_q_unchecked(net, params, z, fam))
}

pub(crate) fn residual_q_unchecked(
    net: &Network,
    params: &Params,
    z: &CovariateTensor,
    fam: EdgeFamily,
) -> DVector<f64> {
    let n = z.n();
    let mut q = DVector::zeros(z.p());
    for i in 0..n {
        for j in (i + 1)..n {
            let r = fam.mean(params.predictor(z, i, j)) - net.weight(i, j);
            for (qk, zk) in q.iter_mut().zip(z.get(i, j)) {
                *qk += zk * r;
            }
        }
    }
    q
}

pub fn jacobian_v(params: &Params, z: &CovariateTensor, fam: EdgeFamily) -> Result<BalancedJacobian> {
    params.check(z)?;
    let n = z.n();
    let mut v = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = fam.d1(params.predictor(z, i, j));
            if !(d > 0.0) {
                return Err(Error::NonPositiveDerivative { i, j, value: d });
            }
            v[(i, j)] = d;
            v[(j, i)] = d;
            v[(i, i)] += d;
            v[(j, j)] += d;
        }
    }
    Ok(BalancedJacobian { matrix: v })
}

/// Diagonal of `S = diag(1/v_11, ..., 1/v_nn)`.
pub fn s_approx(v: &BalancedJacobian) -> DVector<f64> {
    v.diag().map(|d| 1.0 / d)
}

/// Pieces of the joint Jacobian that involve `gamma`:
/// `dQ/dgamma'` (p x p) and `C = dF/dgamma'` (n x p), whose transpose is `dQ/dbeta'`.
pub(crate) struct CovariateBlocks {
    pub q_gamma: DMatrix<f64>,
    pub cross: DMatrix<f64>,
}

pub(crate) fn covariate_blocks(params: &Params, z: &CovariateTensor, fam: EdgeFamily) -> CovariateBlocks {
    let (n, p) = (z.n(), z.p());
    let mut q_gamma = DMatrix::zeros(p, p);
    let mut cross = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = fam.d1(params.predictor(z, i, j));
            let zij = z.get(i, j);
            for a in 0..p {
                let za = zij[a] * d;
                cross[(i, a)] += za;
                cross[(j, a)] += za;
                for b in 0..p {
                    q_gamma[(a, b)] += za * zij[b];
                }
            }
        }
    }
    CovariateBlocks { q_gamma, cross }
}

/// Profiled Jacobian `H = dQ/dgamma' - dQ/dbeta' V^{-1} dF/dgamma'`, using
/// exact solves against `V`.
pub fn profile_h(params: &Params, z: &CovariateTensor, fam: EdgeFamily) -> Result<DMatrix<f64>> {
    let v = jacobian_v(params, z, fam)?;
    profile_h_with(params, z, fam, &v)
}

pub(crate) fn profile_h_with(
    params: &Params,
    z: &CovariateTensor,
    fam: EdgeFamily,
    v: &BalancedJacobian,
) -> Result<DMatrix<f64>> {
    let blocks = covariate_blocks(params, z, fam);
    if z.p() == 0 {
        return Ok(blocks.q_gamma);
    }
    let solved = v.solver()?.solve(&blocks.cross)?;
    Ok(&blocks.q_gamma - blocks.cross.transpose() * solved)
}

/// `H` with `V^{-1}` replaced by `S`; a cheap approximation for diagnostics.
pub fn profile_h_diagonal_approx(params: &Params, z: &CovariateTensor, fam: EdgeFamily) -> Result<DMatrix<f64>> {
    params.check(z)?;
    let blocks = covariate_blocks(params, z, fam);
    let v = jacobian_v(params, z, fam)?;
    let s = s_approx(&v);
    let mut h = blocks.q_gamma;
    for i in 0..z.n() {
        let c = blocks.cross.row(i);
        h -= c.transpose() * c * s[i];
    }
    Ok(h)
}

/// Empirical regularity quantities at a parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// `min |mu'(pi_ij)|`
    pub b0: f64,
    /// `max |mu'(pi_ij)|`
    pub b1: f64,
    /// `max |mu''(pi_ij)|`
    pub b2: f64,
    /// `max |mu'''(pi_ij)|`
    pub b3: f64,
    /// `||n^2 H^{-1}||_inf`; infinite when `H` is singular or `p = 0`.
    pub kappa_hat: f64,
    /// Mean edge expectation over pairs (graph density or average weight).
    pub density: f64,
    pub pi_min: f64,
    pub pi_max: f64,
    pub z_star: f64,
}

pub fn condition_diagnostics(params: &Params, z: &CovariateTensor, fam: EdgeFamily) -> Result<DiagnosticsReport> {
    params.check(z)?;
    let n = z.n();
    let mut b0 = f64::INFINITY;
    let (mut b1, mut b2, mut b3) = (0.0_f64, 0.0_f64, 0.0_f64);
    let (mut pi_min, mut pi_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let pi = params.predictor(z, i, j);
            let d1 = fam.d1(pi).abs();
            b0 = b0.min(d1);
            b1 = b1.max(d1);
            b2 = b2.max(fam.d2(pi).abs());
            b3 = b3.max(fam.d3(pi).abs());
            pi_min = pi_min.min(pi);
            pi_max = pi_max.max(pi);
            total += fam.mean(pi);
        }
    }
    let kappa_hat = if z.p() == 0 {
        f64::INFINITY
    } else {
        match profile_h(params, z, fam).and_then(|h| inverse_small(&h)) {
            Ok(inv) => {
                let scaled = inv * (n * n) as f64;
                scaled
                    .row_iter()
                    .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max)
            }
            Err(Error::SingularJacobian(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        }
    };
    Ok(DiagnosticsReport {
        b0,
        b1,
        b2,
        b3,
        kappa_hat,
        density: total / z.n_pairs() as f64,
        pi_min,
        pi_max,
        z_star: z.z_star(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn predictor_examples() {
        let z = CovariateTensor::empty(3);
        let pi = linear_predictor(&Params::zeros(3, 0), &z).unwrap();
        assert_eq!(pi, DMatrix::zeros(3, 3));

        let pi = linear_predictor(&Params::new(dv(&[1.0, 2.0, 3.0]), dv(&[])), &z).unwrap();
        assert_eq!((pi[(0, 1)], pi[(0, 2)], pi[(1, 2)]), (3.0, 4.0, 5.0));
        assert_eq!(pi[(2, 1)], 5.0);

        // n = 2 is allowed for raw covariate objects even though networks need 3 nodes
        let z = CovariateTensor::new(2, 2, vec![1.0, 0.0]).unwrap();
        let pi = linear_predictor(&Params::new(dv(&[0.0, 0.0]), dv(&[0.5, 1.0])), &z).unwrap();
        assert_eq!(pi[(0, 1)], 0.5);
    }

    #[test]
    fn shape_errors() {
        let z = CovariateTensor::empty(3);
        let bad = Params::zeros(4, 0);
        assert!(matches!(linear_predictor(&bad, &z), Err(Error::Shape(_))));
        let net = Network::constant(4, 1.0).unwrap();
        assert!(matches!(
            residual_f(&net, &Params::zeros(3, 0), &z, EdgeFamily::Poisson),
            Err(Error::Shape(_))
        ));
        assert!(CovariateTensor::new(3, 1, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn network_validation() {
        assert!(Network::constant(2, 1.0).is_err());
        let mut w = DMatrix::from_element(3, 3, 1.0);
        w.fill_diagonal(0.0);
        w[(0, 1)] = 2.0;
        assert!(Network::from_weights(w.clone()).is_err());
        w[(1, 0)] = 2.0;
        let net = Network::from_weights(w).unwrap();
        assert_eq!(net.degrees().as_slice(), &[3.0, 3.0, 2.0]);
        assert!(Network::from_pairs(3, [(0, 1, -1.0)]).is_err());
        assert!(net.check_support(EdgeFamily::Probit).is_err());
        assert!(net.check_support(EdgeFamily::Poisson).is_ok());
    }

    #[test]
    fn residual_f_examples() {
        let net = Network::constant(3, 4.0).unwrap();
        let l2 = 2f64.ln();
        let params = Params::new(dv(&[l2, l2, l2]), dv(&[]));
        let f = residual_f(&net, &params, &CovariateTensor::empty(3), EdgeFamily::Poisson).unwrap();
        assert!(f.amax() < 1e-14);

        let net = Network::from_weights(DMatrix::zeros(5, 5)).unwrap();
        let f = residual_f(&net, &Params::zeros(5, 0), &CovariateTensor::empty(5), EdgeFamily::Logistic).unwrap();
        assert!(f.iter().all(|&v| v == 2.0));
    }

    #[test]
    fn residual_q_examples() {
        let net = Network::constant(4, 2.0).unwrap();
        let z = CovariateTensor::from_fn(4, 2, |_, _, _| 0.0).unwrap();
        let params = Params::new(dv(&[0.1, 0.2, -0.3, 0.0]), dv(&[1.0, -1.0]));
        assert_eq!(residual_q(&net, &params, &z, EdgeFamily::Poisson).unwrap(), DVector::zeros(2));

        // a network equal to its own mean matrix has zero residuals
        let z = CovariateTensor::from_fn(4, 1, |i, j, _| (i + 2 * j) as f64 * 0.1).unwrap();
        let params = Params::new(dv(&[0.1, 0.2, -0.3, 0.0]), dv(&[0.7]));
        let mean = mean_matrix(&params, &z, EdgeFamily::Poisson).unwrap();
        let net = Network::from_weights(mean).unwrap();
        assert!(residual_q(&net, &params, &z, EdgeFamily::Poisson).unwrap().amax() < 1e-14);
        assert!(residual_f(&net, &params, &z, EdgeFamily::Poisson).unwrap().amax() < 1e-14);
    }

    #[test]
    fn jacobian_examples() {
        let z = CovariateTensor::empty(3);
        let v = jacobian_v(&Params::zeros(3, 0), &z, EdgeFamily::Poisson).unwrap();
        assert_eq!(v.matrix(), &DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0]));
        assert_eq!(s_approx(&v), dv(&[0.5, 0.5, 0.5]));

        let v = jacobian_v(&Params::zeros(3, 0), &z, EdgeFamily::Logistic).unwrap();
        assert_eq!(v.matrix()[(0, 1)], 0.25);
        assert_eq!(v.matrix()[(2, 2)], 0.5);
        assert_eq!(s_approx(&v), dv(&[2.0, 2.0, 2.0]));
        assert_eq!(v.balance_error(), 0.0);
    }

    #[test]
    fn profile_h_zero_covariates() {
        let z = CovariateTensor::from_fn(5, 2, |_, _, _| 0.0).unwrap();
        let params = Params::new(dv(&[0.1, 0.2, -0.3, 0.0, 0.4]), dv(&[1.0, -1.0]));
        for fam in EdgeFamily::ALL {
            assert_eq!(profile_h(&params, &z, fam).unwrap(), DMatrix::zeros(2, 2));
        }
    }

    #[test]
    fn diagnostics_examples() {
        let z = CovariateTensor::from_fn(6, 1, |i, j, _| if (i + j) % 2 == 0 { 1.0 } else { -1.0 }).unwrap();
        let r = condition_diagnostics(&Params::zeros(6, 1), &z, EdgeFamily::Poisson).unwrap();
        assert_eq!((r.b0, r.b1, r.b2, r.b3, r.density), (1.0, 1.0, 1.0, 1.0, 1.0));
        assert_eq!((r.pi_min, r.pi_max), (0.0, 0.0));
        assert!(r.kappa_hat.is_finite() && r.kappa_hat > 0.0);

        let r = condition_diagnostics(&Params::zeros(6, 1), &z, EdgeFamily::Logistic).unwrap();
        assert_eq!((r.b0, r.b1, r.b2), (0.25, 0.25, 0.0));
        assert!(r.b3 <= 0.25);

        let zero = CovariateTensor::from_fn(6, 1, |_, _, _| 0.0).unwrap();
        let r = condition_diagnostics(&Params::zeros(6, 1), &zero, EdgeFamily::Poisson).unwrap();
        assert!(r.kappa_hat.is_infinite());
    }

    #[test]
    fn pair_index_is_lexicographic() {
        let z = CovariateTensor::empty(5);
        let mut k = 0;
        for i in 0..5 {
            for j in (i + 1)..5 {
                assert_eq!(z.pair_index(i, j), k);
                assert_eq!(z.pair_index(j, i), k);
                k += 1;
            }
        }
    }
}
