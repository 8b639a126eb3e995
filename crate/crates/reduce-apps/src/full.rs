use dirlap_core::connectivity::is_strongly_connected;
use dirlap_core::vector::{center, dot, norm2, sub};
use dirlap_core::{DirectedLaplacian, Error, EulerianSolver, Result};
use serde::{Deserialize, Serialize};

use crate::patch::{inner_failure, refine, solve_patched, DominantSystem};
use crate::stationary::{compute_stationary_with, StationaryConfig};

#[derive(Clone, Debug)]
pub struct FullConfig {
    /// Perturbation `δ = eps · w_min / (c_pert · n³)`.
    pub c_pert: f64,
    /// Restart for the stationary computation; defaults to `min(1/2, eps/10)`.
    pub alpha: Option<f64>,
    /// Accuracy of every inner Eulerian solve; defaults to `eps / n`.
    pub inner_eps: Option<f64>,
    pub max_refinements: usize,
    pub stationary: StationaryConfig,
}

impl Default for FullConfig {
    fn default() -> Self {
        FullConfig { c_pert: 1.0, alpha: None, inner_eps: None, max_refinements: 100, stationary: Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub eulerian_input: bool,
    pub delta: f64,
    pub alpha: f64,
    pub inner_eps: f64,
    pub projected_input: bool,
    pub stationary_iterations: usize,
    pub refinement_iterations: usize,
    /// Relative residual after each refinement step.
    pub residuals: Vec<f64>,
    /// Final `‖Lx − b‖₂ / ‖b‖₂` against the projected demand.
    pub residual: f64,
}

pub fn solve_full(l: &DirectedLaplacian, b: &[f64], eps: f64, inner: &dyn EulerianSolver) -> Result<Vec<f64>> {
    solve_full_with(l, b, eps, inner, &FullConfig::default()).map(|r| r.0)
}

/// Solves `L x = b` for a strongly connected directed Laplacian and returns
/// `x ⊥ ker L` with `‖Lx − b‖₂ ≤ eps ‖b‖₂`.
///
/// With `v = D⁻¹π` for the approximate stationary `π`, the system
/// `L V z = b` is refined with the preconditioner `(L + δI + E) V`, applied
/// through its `(n+1)`-vertex Eulerian patch; `E` is the diagonal boost
/// that keeps every row sum nonnegative. Eulerian inputs are refined with
/// the inner solver on `L` itself.
pub fn solve_full_with(
    l: &DirectedLaplacian,
    b: &[f64],
    eps: f64,
    inner: &dyn EulerianSolver,
    cfg: &FullConfig,
) -> Result<(Vec<f64>, FullReport)> {
    let n = l.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    if let Some(i) = b.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    if n < 2 || !is_strongly_connected(l.adjacency()) {
        return Err(Error::NotStronglyConnected);
    }
    let mut bp = b.to_vec();
    center(&mut bp);
    let bnorm = norm2(&bp);
    let projected_input = norm2(&sub(b, &bp)) > 1e-12 * norm2(b).max(f64::MIN_POSITIVE);
    let inner_eps = cfg.inner_eps.unwrap_or(eps / n as f64);
    let alpha = cfg.alpha.unwrap_or((eps / 10.0).min(0.5));
    let w_min = l.adjacency().values().iter().copied().fold(f64::INFINITY, f64::min);
    let delta = eps * w_min / (cfg.c_pert * (n as f64).powi(3));
    let mut report = FullReport {
        eulerian_input: l.is_eulerian(),
        delta,
        alpha,
        inner_eps,
        projected_input,
        stationary_iterations: 0,
        refinement_iterations: 0,
        residuals: vec![],
        residual: 0.0,
    };
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], report));
    }
    let tol = 0.5 * eps;

    let (mut x, kernel) = if l.is_eulerian() {
        report.delta = 0.0;
        let r = refine(|z| l.mul(z), |r| inner.solve(l, r, inner_eps).map_err(inner_failure), &bp, tol, cfg.max_refinements)?;
        report.refinement_iterations = r.iterations;
        report.residuals = r.residuals;
        (r.solution, vec![1.0; n])
    } else {
        let st = compute_stationary_with(l, alpha, inner, &cfg.stationary)?;
        report.stationary_iterations = st.iterations;
        let v: Vec<f64> = st.distribution.iter().zip(l.out_degrees()).map(|(p, d)| p / d).collect();
        let sys = DominantSystem::boosted(l, &vec![delta; n], v.clone())?;
        let patched = sys.patched()?;
        let apply = |z: &[f64]| {
            let vz: Vec<f64> = z.iter().zip(&v).map(|(a, b)| a * b).collect();
            l.mul(&vz)
        };
        let r = refine(apply, |r| solve_patched(&patched, r, inner, inner_eps), &bp, tol, cfg.max_refinements)?;
        report.refinement_iterations = r.iterations;
        report.residuals = r.residuals;
        (r.solution.iter().zip(&v).map(|(a, b)| a * b).collect(), v)
    };
    let c = dot(&x, &kernel) / dot(&kernel, &kernel);
    for i in 0..n {
        x[i] -= c * kernel[i];
    }
    report.residual = norm2(&sub(&l.mul(&x), &bp)) / bnorm;
    if !(report.residual <= eps) {
        return Err(Error::InnerSolverFailure(format!("final residual {:e} exceeds {eps:e}", report.residual)));
    }
    Ok((x, report))
}

#[derive(Clone, Debug)]
pub struct PageRankConfig {
    /// Restart for the scaling stationary; defaults to `min(1/2, β/10)`.
    pub alpha: Option<f64>,
    pub max_refinements: usize,
    pub stationary: StationaryConfig,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig { alpha: None, max_refinements: 100, stationary: Default::default() }
    }
}

pub fn personalized_pagerank(
    l: &DirectedLaplacian,
    beta: f64,
    personalization: &[f64],
    eps: f64,
    inner: &dyn EulerianSolver,
) -> Result<Vec<f64>> {
    personalized_pagerank_with(l, beta, personalization, eps, inner, &PageRankConfig::default())
}

/// The distribution `p = β u + (1−β) P ᵀ p` for the walk `P = D⁻¹A`.
///
/// Writing `p = D y` gives the strictly column-dominant system
/// `((1−β) L + β D) y = β u`, solved by refinement with the stationary-scaled
/// Eulerian patch as preconditioner.
pub fn personalized_pagerank_with(
    l: &DirectedLaplacian,
    beta: f64,
    personalization: &[f64],
    eps: f64,
    inner: &dyn EulerianSolver,
    cfg: &PageRankConfig,
) -> Result<Vec<f64>> {
    let n = l.n();
    if personalization.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: personalization.len() });
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("restart β = {beta} must lie in (0, 1]")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    if personalization.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("personalization must be nonnegative and finite".into()));
    }
    let total: f64 = personalization.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("personalization sums to {total}, not 1")));
    }
    if beta == 1.0 {
        return Ok(personalization.to_vec());
    }
    if n < 2 || !is_strongly_connected(l.adjacency()) {
        return Err(Error::NotStronglyConnected);
    }
    let d = l.out_degrees();
    let alpha = cfg.alpha.unwrap_or((beta / 10.0).min(0.5));
    let st = compute_stationary_with(l, alpha, inner, &cfg.stationary)?;
    let v: Vec<f64> = st.distribution.iter().zip(d).map(|(p, dd)| p / dd).collect();
    let lazy = DirectedLaplacian::validate(l.adjacency().scalar_mul(1.0 - beta))?;
    let q: Vec<f64> = d.iter().map(|dd| beta * dd).collect();
    let sys = DominantSystem::boosted(&lazy, &q, v.clone())?;
    let patched = sys.patched()?;
    let apply = |z: &[f64]| {
        let vz: Vec<f64> = z.iter().zip(&v).map(|(a, b)| a * b).collect();
        let mut y = lazy.mul(&vz);
        for i in 0..n {
            y[i] += q[i] * vz[i];
        }
        y
    };
    let rhs: Vec<f64> = personalization.iter().map(|u| beta * u).collect();
    let inner_eps = (eps * beta * 1e-2).max(1e-15);
    let r = refine(apply, |r| solve_patched(&patched, r, inner, inner_eps), &rhs, inner_eps, cfg.max_refinements)?;
    let mut p: Vec<f64> = (0..n).map(|i| (d[i] * v[i] * r.solution[i]).max(0.0)).collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    Ok(p)
}
