//! Linear solves against the symmetric positive definite degree Jacobian.
//!
//! Dense Cholesky up to `DENSE_SOLVE_MAX_N` unknowns, Jacobi-preconditioned
//! conjugate gradients above that. Only `V^{-1} x` is ever needed, never the
//! inverse itself.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest system solved with a dense factorization.
pub const DENSE_SOLVE_MAX_N: usize = 2000;

/// A symmetric positive definite operator that can be applied to vectors.
pub trait SpdOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<f64>, out: &mut DVector<f64>);
    fn diagonal(&self) -> DVector<f64>;
}

impl SpdOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        self.mul_to(x, out);
    }

    fn diagonal(&self) -> DVector<f64> {
        DMatrix::diagonal(self)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            rel_tol: 1e-13,
            max_iters: 10_000,
        }
    }
}

/// Preconditioned conjugate gradients with the diagonal (Jacobi) preconditioner.
pub fn pcg<Op: SpdOperator + ?Sized>(
    op: &Op,
    rhs: &DVector<f64>,
    opts: CgOptions,
) -> Result<DVector<f64>> {
    let n = op.dim();
    let inv_diag = op.diagonal().map(|d| if d > 0.0 { 1.0 / d } else { 1.0 });
    let rhs_norm = rhs.norm();
    let mut x = DVector::zeros(n);
    if rhs_norm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.clone();
    let mut z = r.component_mul(&inv_diag);
    let mut p = z.clone();
    let mut ap = DVector::zeros(n);
    let mut rz = r.dot(&z);
    for _ in 0..opts.max_iters {
        op.apply(&p, &mut ap);
        let pap = p.dot(&ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::SingularJacobian("operator not positive definite".into()));
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        if r.norm() <= opts.rel_tol * rhs_norm {
            return Ok(x);
        }
        z = r.component_mul(&inv_diag);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p *= beta;
        p += &z;
    }
    Err(Error::SingularJacobian(format!(
        "conjugate gradients did not reach {:e} in {} iterations",
        opts.rel_tol, opts.max_iters
    )))
}

/// Factorized SPD system reused across several right-hand sides.
pub enum SpdSolver<'a> {
    Dense(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Iterative(&'a DMatrix<f64>),
}

impl<'a> SpdSolver<'a> {
    pub fn new(matrix: &'a DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() <= DENSE_SOLVE_MAX_N {
            matrix
                .clone()
                .cholesky()
                .map(SpdSolver::Dense)
                .ok_or_else(|| Error::SingularJacobian("Cholesky factorization failed".into()))
        } else {
            Ok(SpdSolver::Iterative(matrix))
        }
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            SpdSolver::Dense(chol) => Ok(chol.solve(rhs)),
            SpdSolver::Iterative(m) => pcg(*m, rhs, CgOptions::default()),
        }
    }

    pub fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            SpdSolver::Dense(chol) => Ok(chol.solve(rhs)),
            SpdSolver::Iterative(_) => {
                let mut out = DMatrix::zeros(rhs.nrows(), rhs.ncols());
                for (k, col) in rhs.column_iter().enumerate() {
                    let x = self.solve_vec(&col.into_owned())?;
                    out.set_column(k, &x);
                }
                Ok(out)
            }
        }
    }
}

/// Solve a small (p x p) symmetric system, falling back to LU when the matrix
/// is not numerically positive definite.
pub fn solve_small(matrix: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(chol) = matrix.clone().cholesky() {
        return Ok(chol.solve(rhs));
    }
    matrix
        .clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::SingularJacobian("profiled jacobian is singular".into()))
}

pub fn inverse_small(matrix: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = matrix.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if let Some(chol) = matrix.clone().cholesky() {
        return Ok(chol.inverse());
    }
    matrix
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularJacobian("profiled jacobian is singular".into()))
}

pub fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
