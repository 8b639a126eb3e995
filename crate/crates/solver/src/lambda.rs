use dirlap_core::vector::{axpy, dot, norm2};
use dirlap_core::{Error, Result, SparseGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operator::deflate;

#[derive(Clone, Debug)]
pub struct LambdaConfig {
    pub iterations: usize,
    pub cg_tolerance: f64,
    /// Cap on conjugate-gradient steps per inverse-power step, as a
    /// multiple of `n` (plus 100).
    pub cg_steps_per_vertex: usize,
}

impl Default for LambdaConfig {
    fn default() -> Self {
        LambdaConfig { iterations: 40, cg_tolerance: 1e-10, cg_steps_per_vertex: 20 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaEstimate {
    /// Final Rayleigh quotient, an upper bound on `λ*`.
    pub rayleigh: f64,
    /// `rayleigh / 2`, reported as the lower bound `λ̂`.
    pub lambda_hat: f64,
    pub cg_steps: usize,
}

/// Estimates `λ*` of `N = I − (Ŵ + Ŵᵀ)/2` on the complement of the unit
/// kernel `k` by inverse powering with Jacobi-preconditioned conjugate
/// gradients, returning half the final Rayleigh quotient as `λ̂`.
pub fn estimate_lambda(walk: &SparseGraph, kernel: &[f64], cfg: &LambdaConfig, seed: u64) -> Result<LambdaEstimate> {
    let n = walk.n();
    if n < 2 {
        return Err(Error::LambdaEstimateFailed("fewer than two vertices".into()));
    }
    let diag: Vec<f64> = walk.diagonal().iter().map(|w| 1.0 - w).collect();
    if diag.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::LambdaEstimateFailed("normalized symmetrization has a nonpositive diagonal".into()));
    }
    let apply = |x: &[f64], y: &mut [f64], tmp: &mut [f64]| {
        walk.mul_vec(x, y);
        walk.mul_vec_t(x, tmp);
        for i in 0..n {
            y[i] = x[i] - 0.5 * (y[i] + tmp[i]);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    deflate(&mut v, kernel);
    let mut total_steps = 0;
    let max_steps = cfg.cg_steps_per_vertex * n + 100;
    let mut tmp = vec![0.0; n];
    let mut nv = vec![0.0; n];
    for _ in 0..cfg.iterations {
        let nrm = norm2(&v);
        if !(nrm > 0.0) {
            return Err(Error::LambdaEstimateFailed("iterate vanished".into()));
        }
        v.iter_mut().for_each(|x| *x /= nrm);
        let (y, steps) = pcg(&apply, &diag, &v, kernel, cfg.cg_tolerance, max_steps);
        total_steps += steps;
        v = y;
        deflate(&mut v, kernel);
    }
    let nrm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    apply(&v, &mut nv, &mut tmp);
    let rayleigh = dot(&v, &nv);
    if !(rayleigh.is_finite() && rayleigh > 0.0) {
        return Err(Error::LambdaEstimateFailed(format!("Rayleigh quotient {rayleigh}")));
    }
    Ok(LambdaEstimate { rayleigh, lambda_hat: 0.5 * rayleigh, cg_steps: total_steps })
}

/// Solves `N y = b` on the complement of `k` with preconditioner
/// `P diag(N)^{-1} P`.
fn pcg<F>(apply: &F, diag: &[f64], b: &[f64], k: &[f64], tol: f64, max_steps: usize) -> (Vec<f64>, usize)
where
    F: Fn(&[f64], &mut [f64], &mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    deflate(&mut r, k);
    let bnorm = norm2(&r);
    if bnorm == 0.0 {
        return (x, 0);
    }
    let precond = |r: &[f64]| -> Vec<f64> {
        let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
        deflate(&mut z, k);
        z
    };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut steps = 0;
    while steps < max_steps {
        steps += 1;
        apply(&p, &mut ap, &mut tmp);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let a = rz / pap;
        axpy(a, &p, &mut x);
        axpy(-a, &ap, &mut r);
        if norm2(&r) <= tol * bnorm {
            break;
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    deflate(&mut x, k);
    (x, steps)
}
