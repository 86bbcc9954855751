//! Independent test oracles. Nothing here calls into the estimator; the
//! mean functions are written out from their textbook definitions.
#![allow(dead_code)]

use covbeta::{CovariateTensor, EdgeFamily, Network};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn mean(fam: EdgeFamily, x: f64) -> f64 {
    match fam {
        EdgeFamily::Logistic => 1.0 / (1.0 + (-x).exp()),
        EdgeFamily::Poisson => x.exp(),
        EdgeFamily::Probit => 0.5 * libm::erfc(-x / 2f64.sqrt()),
    }
}

pub fn mean_d1(fam: EdgeFamily, x: f64) -> f64 {
    match fam {
        EdgeFamily::Logistic => {
            let e = (-x.abs()).exp();
            e / ((1.0 + e) * (1.0 + e))
        }
        EdgeFamily::Poisson => x.exp(),
        EdgeFamily::Probit => (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
    }
}

/// Edge covariates with `p` columns drawn uniformly from `[-1, 1]`.
pub fn random_covariates(n: usize, p: usize, rng: &mut impl Rng) -> CovariateTensor {
    CovariateTensor::from_fn(n, p, |_, _, _| rng.random_range(-1.0..1.0)).unwrap()
}

pub fn draw_network(
    fam: EdgeFamily,
    beta: &DVector<f64>,
    gamma: &DVector<f64>,
    z: &CovariateTensor,
    rng: &mut impl Rng,
) -> Network {
    let n = beta.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let pi = beta[i] + beta[j] + z.get(i, j).iter().zip(gamma.iter()).map(|(a, b)| a * b).sum::<f64>();
            pairs.push((i, j, fam.sample_edge(pi, rng)));
        }
    }
    Network::from_pairs(n, pairs).unwrap()
}

pub fn degrees_ok(net: &Network, fam: EdgeFamily) -> bool {
    let top = (net.n() - 1) as f64;
    net.degrees().iter().all(|&d| d > 0.0 && (!fam.is_binary() || d < top))
}

/// A random instance with nondegenerate degrees. Small instances are also
/// required to have a finite estimate, which the degrees alone do not
/// guarantee once covariates can separate the edges.
pub fn fixture(fam: EdgeFamily, n: usize, p: usize, seed: u64) -> (Network, CovariateTensor, DVector<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let beta = DVector::from_fn(n, |_, _| rng.random_range(-0.6..0.6));
        let gamma = DVector::from_fn(p, |_, _| rng.random_range(-0.8..0.8));
        let z = random_covariates(n, p, &mut rng);
        let net = draw_network(fam, &beta, &gamma, &z, &mut rng);
        if degrees_ok(&net, fam) && (n > 20 || full_newton(&net, &z, fam).is_some()) {
            return (net, z, beta, gamma);
        }
    }
}

fn predictor(beta: &[f64], gamma: &[f64], z: &CovariateTensor, i: usize, j: usize) -> f64 {
    beta[i] + beta[j] + z.get(i, j).iter().zip(gamma).map(|(a, b)| a * b).sum::<f64>()
}

/// The joint moment system `G(theta) = (F, Q)` with `theta = (beta, gamma)`,
/// evaluated by direct summation over pairs.
pub fn joint_residual(net: &Network, z: &CovariateTensor, fam: EdgeFamily, theta: &DVector<f64>) -> DVector<f64> {
    let (n, p) = (z.n(), z.p());
    let (beta, gamma) = (&theta.as_slice()[..n], &theta.as_slice()[n..]);
    let mut g = DVector::zeros(n + p);
    for i in 0..n {
        g[i] = -net.degrees()[i];
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let m = mean(fam, predictor(beta, gamma, z, i, j));
            g[i] += m;
            g[j] += m;
            for k in 0..p {
                g[n + k] += z.get(i, j)[k] * (m - net.weight(i, j));
            }
        }
    }
    g
}

pub fn joint_jacobian(z: &CovariateTensor, fam: EdgeFamily, theta: &DVector<f64>) -> DMatrix<f64> {
    let (n, p) = (z.n(), z.p());
    let (beta, gamma) = (&theta.as_slice()[..n], &theta.as_slice()[n..]);
    let mut jac = DMatrix::zeros(n + p, n + p);
    for i in 0..n {
        for j in (i + 1)..n {
            let zij = z.get(i, j);
            let d = mean_d1(fam, predictor(beta, gamma, z, i, j));
            jac[(i, i)] += d;
            jac[(j, j)] += d;
            jac[(i, j)] += d;
            jac[(j, i)] += d;
            for k in 0..p {
                jac[(i, n + k)] += zij[k] * d;
                jac[(j, n + k)] += zij[k] * d;
                jac[(n + k, i)] += zij[k] * d;
                jac[(n + k, j)] += zij[k] * d;
                for l in 0..p {
                    jac[(n + k, n + l)] += zij[k] * zij[l] * d;
                }
            }
        }
    }
    jac
}

/// Damped Newton on the full `(n + p)`-dimensional system from zero. A root
/// with huge coordinates means the estimate does not exist (the residual is
/// then small only because the mean saturates), so it is reported as `None`.
pub fn full_newton(net: &Network, z: &CovariateTensor, fam: EdgeFamily) -> Option<DVector<f64>> {
    let (n, p) = (z.n(), z.p());
    let mut theta = DVector::zeros(n + p);
    let mut g = joint_residual(net, z, fam, &theta);
    for _ in 0..500 {
        if theta.amax() > 15.0 {
            return None;
        }
        if g.amax() < 1e-13 {
            return Some(theta);
        }
        let step = joint_jacobian(z, fam, &theta).lu().solve(&g)?;
        let mut t = 1.0;
        loop {
            let cand = &theta - &step * t;
            let gc = joint_residual(net, z, fam, &cand);
            if gc.amax() < g.amax() || t < 1e-10 {
                theta = cand;
                g = gc;
                break;
            }
            t *= 0.5;
        }
    }
    (g.amax() < 1e-10 && theta.amax() <= 15.0).then_some(theta)
}

/// `n x n` Jacobian of `F` in `beta` by central differences.
pub fn fd_jacobian_beta(net: &Network, z: &CovariateTensor, fam: EdgeFamily, theta: &DVector<f64>) -> DMatrix<f64> {
    let n = z.n();
    let h = 1e-6;
    let mut jac = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut up = theta.clone();
        let mut dn = theta.clone();
        up[c] += h;
        dn[c] -= h;
        let diff = (joint_residual(net, z, fam, &up) - joint_residual(net, z, fam, &dn)) / (2.0 * h);
        for r in 0..n {
            jac[(r, c)] = diff[r];
        }
    }
    jac
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
