use std::sync::{Arc, Mutex};
use std::time::Instant;

use dirlap_core::connectivity::is_strongly_connected;
use dirlap_core::seed::child_seed;
use dirlap_core::vector::{center, norm2};
use dirlap_core::{DirectedLaplacian, Error, EulerianSolver, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{build_chain_with, ChainConfig, SquareChain, CHAIN_ALPHA};
use crate::lambda::{estimate_lambda, LambdaConfig};
use crate::operator::{
    deflate, precon_richardson, unit_kernel, Budget, ChainLevel, LinearOperator, Richardson, ScaledIdentity,
    ShiftedWalk,
};

pub const REPORT_VERSION: u32 = 1;

/// How Richardson iteration counts and step sizes are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// The worst-case counts: `(8/ℓ²) ln(1/ε)` at the base with step `ℓ/4`,
    /// `ln(1/ε)` per level with inner accuracy `exp(−5Δ)/30`, and
    /// `10 ln(1/ε)` outer steps.
    Analytic,
    /// Counts derived from contraction factors measured by power iteration
    /// on each level's error operator `I − ηZM`.
    Calibrated,
}

#[derive(Clone, Debug)]
pub struct CalibrationConfig {
    /// Accuracy requested from every recursive level and from `Solve(0)`.
    pub level_target: f64,
    pub probe_iterations: usize,
    /// Measured factors `ρ` are inflated to `max(safety·ρ, ρ + margin)`.
    pub safety: f64,
    pub margin: f64,
    pub extra_outer_iterations: usize,
    /// Candidate base-case steps; `ℓ/4` is always tried as well.
    pub base_steps: Vec<f64>,
    pub max_iterations: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            level_target: 0.1,
            probe_iterations: 20,
            safety: 1.1,
            margin: 0.02,
            extra_outer_iterations: 2,
            base_steps: vec![1.0, 0.75, 0.5],
            max_iterations: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub schedule: Schedule,
    pub calibration: CalibrationConfig,
    pub lambda: LambdaConfig,
    pub chain: ChainConfig,
    /// Chain length; defaults to `⌈6 ln(1/λ̂)⌉`.
    pub depth: Option<usize>,
    /// Square-sparsifier accuracy; defaults to `exp(−5√(d ln d))/30`.
    pub chain_eps: Option<f64>,
    /// Chain failure probability; defaults to `1/n²`.
    pub p: Option<f64>,
    /// Budget constant: at most `c_budget · n · 2^{3√(d ln d)}` products.
    pub c_budget: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            schedule: Schedule::Calibrated,
            calibration: CalibrationConfig::default(),
            lambda: LambdaConfig::default(),
            chain: ChainConfig::default(),
            depth: None,
            chain_eps: None,
            p: None,
            c_budget: 1e6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub level: usize,
    /// Levels skipped by this level's preconditioner; 0 at the base.
    pub delta: usize,
    pub target: f64,
    pub step: f64,
    pub iterations: usize,
    pub contraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub version: u32,
    pub schedule: Schedule,
    pub log_base: String,
    pub n: usize,
    pub nnz: usize,
    pub eps: f64,
    pub seed: u64,
    pub rayleigh: f64,
    pub lambda_hat: f64,
    pub d: usize,
    pub eps_hat: f64,
    pub p: f64,
    pub c_sample: f64,
    pub phi_target: f64,
    pub chain_nnz: Vec<usize>,
    pub chain_sampled_pieces: Vec<usize>,
    pub levels: Vec<LevelTrace>,
    pub outer_iterations: usize,
    pub outer_contraction: Option<f64>,
    pub operator_applications: u64,
    pub budget_cap: u64,
    pub projected_input: bool,
    pub build_seconds: f64,
    pub solve_seconds: f64,
    /// `‖Lx − b‖₂ / ‖b‖₂`.
    pub residual: f64,
}

/// `⌈6 ln(1/λ̂)⌉`, or 0 when `λ̂ ≥ 1`.
pub fn chain_depth(lambda_hat: f64) -> usize {
    (6.0 * (1.0 / lambda_hat).ln()).ceil().max(0.0) as usize
}

/// `exp(−5√(d ln d))/30`.
pub fn chain_eps_hat(d: usize) -> f64 {
    let dl = if d >= 2 { d as f64 * (d as f64).ln() } else { 0.0 };
    (-5.0 * dl.sqrt()).exp() / 30.0
}

/// `min{⌈√(d log₂ d)⌉, d − i}`, falling back to `d − i` when `d < 2`.
pub fn level_delta(d: usize, i: usize) -> usize {
    if d < 2 {
        return d - i;
    }
    let df = d as f64;
    ((df * df.log2()).sqrt().ceil() as usize).min(d - i)
}

/// `min{1/4, 1.125^d · 0.9 · λ̂}`.
pub fn base_ell(d: usize, lambda_hat: f64) -> f64 {
    (1.125f64.powi(d as i32) * 0.9 * lambda_hat).min(0.25)
}

/// `c · n · 2^{3√(d ln d)}`, saturating.
pub fn budget_cap(n: usize, d: usize, c: f64) -> u64 {
    let dl = if d >= 2 { d as f64 * (d as f64).ln() } else { 0.0 };
    let cap = c * n as f64 * 2f64.powf(3.0 * dl.sqrt());
    if cap >= u64::MAX as f64 {
        u64::MAX
    } else {
        cap.ceil() as u64
    }
}

fn iterations_for(target: f64, rho: f64) -> usize {
    if target >= 1.0 {
        return 0;
    }
    if rho <= 0.0 {
        return 1;
    }
    (target.ln() / rho.ln()).ceil().max(1.0) as usize
}

/// State shared by the recursive construction of the solve operators.
pub struct SolveContext<'a> {
    chain: &'a SquareChain,
    schedule: Schedule,
    calibration: CalibrationConfig,
    budget: Arc<Budget>,
    seed: u64,
    trace: Mutex<Vec<LevelTrace>>,
}

impl<'a> SolveContext<'a> {
    pub fn new(
        chain: &'a SquareChain,
        schedule: Schedule,
        calibration: CalibrationConfig,
        budget: Arc<Budget>,
        seed: u64,
    ) -> Self {
        SolveContext { chain, schedule, calibration, budget, seed, trace: Mutex::new(Vec::new()) }
    }

    pub fn chain(&self) -> &SquareChain {
        self.chain
    }

    pub fn budget(&self) -> &Arc<Budget> {
        &self.budget
    }

    /// Level records in construction order (deepest level first).
    pub fn trace(&self) -> Vec<LevelTrace> {
        self.trace.lock().expect("trace lock").clone()
    }

    fn record(&self, t: LevelTrace) {
        self.trace.lock().expect("trace lock").push(t);
    }

    fn shifted(&self, i: usize) -> Arc<dyn LinearOperator> {
        Arc::new(ShiftedWalk::new(self.chain.walk(i).clone(), Some(self.chain.kernel().clone()), self.budget.clone()))
    }

    fn guard(&self, rho: f64) -> f64 {
        (rho * self.calibration.safety).max(rho + self.calibration.margin)
    }
}

/// Power-iteration estimate of the asymptotic contraction of
/// `E = I − ηZM` on the complement of `k`.
pub fn contraction_factor(
    m: &dyn LinearOperator,
    z: &dyn LinearOperator,
    eta: f64,
    kernel: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    deflate(&mut v, kernel);
    let mut mv = vec![0.0; n];
    let mut zmv = vec![0.0; n];
    let mut log_sum = 0.0;
    let mut counted = 0usize;
    let iterations = iterations.max(2);
    for step in 0..iterations {
        let nrm = norm2(&v);
        if !(nrm > 0.0) {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|x| *x /= nrm);
        m.apply(&v, &mut mv)?;
        z.apply(&mv, &mut zmv)?;
        for i in 0..n {
            v[i] -= eta * zmv[i];
        }
        deflate(&mut v, kernel);
        let r = norm2(&v);
        if !r.is_finite() {
            return Err(Error::Divergence(f64::INFINITY));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        if step >= iterations / 2 {
            log_sum += r.ln();
            counted += 1;
        }
    }
    Ok((log_sum / counted as f64).exp())
}

/// Base case: Richardson on `I − W_d` with preconditioner `(ℓ/4) I_im`.
pub fn base_solver(ctx: &SolveContext, lambda_hat: f64, eps: f64) -> Result<Arc<dyn LinearOperator>> {
    let d = ctx.chain.d();
    let n = ctx.chain.n();
    let kernel = ctx.chain.kernel().clone();
    let m = ctx.shifted(d);
    let ell = base_ell(d, lambda_hat);
    let analytic_n = if eps >= 1.0 { 0 } else { ((8.0 / (ell * ell)) * (1.0 / eps).ln()).ceil() as usize };
    let (step, iterations, contraction) = match ctx.schedule {
        Schedule::Analytic => (ell / 4.0, analytic_n, None),
        Schedule::Calibrated => {
            let mut best: Option<(f64, f64)> = None;
            let steps = ctx.calibration.base_steps.iter().copied().chain(std::iter::once(ell / 4.0));
            for (idx, s) in steps.enumerate() {
                let z = ScaledIdentity::new(n, s, Some(kernel.clone()));
                let rho = contraction_factor(
                    m.as_ref(),
                    &z,
                    1.0,
                    &kernel,
                    ctx.calibration.probe_iterations,
                    child_seed(ctx.seed, ((d as u64) << 8) | idx as u64),
                )?;
                if best.map_or(true, |(_, r)| rho < r) {
                    best = Some((s, rho));
                }
            }
            let (s, rho) = best.expect("at least one candidate");
            let g = ctx.guard(rho);
            let iters = if g < 1.0 { iterations_for(eps, g) } else { usize::MAX };
            if iters > analytic_n.min(ctx.calibration.max_iterations) {
                (ell / 4.0, analytic_n, Some(rho))
            } else {
                (s, iters, Some(rho))
            }
        }
    };
    ctx.record(LevelTrace { level: d, delta: 0, target: eps, step, iterations, contraction });
    let z: Arc<dyn LinearOperator> = Arc::new(ScaledIdentity::new(n, step, Some(kernel.clone())));
    Ok(Arc::new(Richardson::new(m, z, 1.0, iterations, Some(kernel))))
}

/// An `eps`-approximate pseudoinverse of `I − W_i` built from the
/// solver for level `i + Δ` and the factors `(I + W_j^{(α)})`.
pub fn solve_recursive(ctx: &SolveContext, i: usize, lambda_hat: f64, eps: f64) -> Result<Arc<dyn LinearOperator>> {
    let d = ctx.chain.d();
    if i > d {
        return Err(Error::InvalidParameter(format!("level {i} exceeds chain length {d}")));
    }
    if i == d {
        return base_solver(ctx, lambda_hat, eps);
    }
    let delta = level_delta(d, i);
    let inner_eps = match ctx.schedule {
        Schedule::Analytic => (-5.0 * delta as f64).exp() / 30.0,
        Schedule::Calibrated => ctx.calibration.level_target,
    };
    let inner = solve_recursive(ctx, i + delta, lambda_hat, inner_eps)?;
    let walks = ctx.chain.walks()[i..i + delta].to_vec();
    let zt: Arc<dyn LinearOperator> = Arc::new(ChainLevel::new(walks, ctx.chain.alpha(), inner, ctx.budget.clone()));
    let m = ctx.shifted(i);
    let kernel = ctx.chain.kernel().clone();
    let (iterations, contraction) = match ctx.schedule {
        Schedule::Analytic => (iterations_for(eps, (-1.0f64).exp()), None),
        Schedule::Calibrated => {
            let rho = contraction_factor(
                m.as_ref(),
                zt.as_ref(),
                1.0,
                &kernel,
                ctx.calibration.probe_iterations,
                child_seed(ctx.seed, ((i as u64) << 8) | 0xff),
            )?;
            let g = ctx.guard(rho);
            if g >= 1.0 {
                return Err(Error::Divergence(rho));
            }
            (iterations_for(eps, g).min(ctx.calibration.max_iterations), Some(rho))
        }
    };
    ctx.record(LevelTrace { level: i, delta, target: eps, step: 1.0, iterations, contraction });
    Ok(Arc::new(Richardson::new(m, zt, 1.0, iterations, Some(kernel))))
}

pub fn solve_eulerian(l: &DirectedLaplacian, b: &[f64], eps: f64) -> Result<Vec<f64>> {
    solve_eulerian_with(l, b, eps, &SolverConfig::default()).map(|r| r.0)
}

/// Solves `L x = b` for strongly connected Eulerian `L` and returns `x ⊥ 1`
/// together with a run report.
///
/// `λ̂` comes from inverse powering, the chain has length `d = ⌈6 ln(1/λ̂)⌉`
/// and accuracy `ε̂ = exp(−5√(d ln d))/30`, and the outer loop runs
/// preconditioned Richardson on `D^{-1/2} L D^{-1/2}` with `Solve(0)`.
pub fn solve_eulerian_with(
    l: &DirectedLaplacian,
    b: &[f64],
    eps: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
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
    l.require_eulerian()?;
    if n < 2 || !is_strongly_connected(l.adjacency()) {
        return Err(Error::NotStronglyConnected);
    }
    let t0 = Instant::now();
    let mut bp = b.to_vec();
    center(&mut bp);
    let bnorm = norm2(b);
    let projected_input = norm2(&dirlap_core::vector::sub(b, &bp)) > 1e-12 * bnorm.max(f64::MIN_POSITIVE);

    let walk = l.normalize()?;
    let kernel = Arc::new(unit_kernel(walk.sqrt_degrees()));
    let lam = estimate_lambda(walk.walk(), &kernel, &cfg.lambda, child_seed(cfg.seed, 1))?;
    let lambda_hat = lam.lambda_hat;
    let d = cfg.depth.unwrap_or_else(|| chain_depth(lambda_hat));
    let eps_hat = cfg.chain_eps.unwrap_or_else(|| chain_eps_hat(d));
    let p = cfg.p.unwrap_or_else(|| (1.0 / (n as f64 * n as f64)).min(0.5));
    let chain = build_chain_with(l, d, CHAIN_ALPHA, eps_hat, p, child_seed(cfg.seed, 2), &cfg.chain)?
        .with_lambda_hat(lambda_hat);
    let build_seconds = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let budget = Budget::new(budget_cap(n, d, cfg.c_budget));
    let ctx = SolveContext::new(&chain, cfg.schedule, cfg.calibration.clone(), budget.clone(), child_seed(cfg.seed, 3));
    let top_target = match cfg.schedule {
        Schedule::Analytic => eps_hat,
        Schedule::Calibrated => cfg.calibration.level_target,
    };
    let z0 = solve_recursive(&ctx, 0, lambda_hat, top_target)?;
    let m: Arc<dyn LinearOperator> =
        Arc::new(ShiftedWalk::new(Arc::new(walk.walk().clone()), Some(kernel.clone()), budget.clone()));
    let (outer_iterations, outer_contraction) = match cfg.schedule {
        Schedule::Analytic => ((10.0 * (1.0 / eps).ln()).ceil() as usize, None),
        Schedule::Calibrated => {
            let rho = contraction_factor(
                m.as_ref(),
                z0.as_ref(),
                1.0,
                &kernel,
                cfg.calibration.probe_iterations,
                child_seed(cfg.seed, 4),
            )?;
            let g = ctx.guard(rho);
            if g >= 1.0 {
                return Err(Error::Divergence(rho));
            }
            (iterations_for(eps, g) + cfg.calibration.extra_outer_iterations, Some(rho))
        }
    };
    let inv_sqrt: Vec<f64> = walk.sqrt_degrees().iter().map(|s| 1.0 / s).collect();
    let mut x = vec![0.0; n];
    if bnorm > 0.0 {
        let rhs: Vec<f64> = (0..n).map(|i| inv_sqrt[i] * bp[i]).collect();
        let y = precon_richardson(m.as_ref(), z0.as_ref(), &rhs, 1.0, outer_iterations)?;
        x = (0..n).map(|i| inv_sqrt[i] * y[i]).collect();
        center(&mut x);
    }
    let solve_seconds = t1.elapsed().as_secs_f64();
    let lx = l.mul(&x);
    let residual = if bnorm > 0.0 { norm2(&dirlap_core::vector::sub(&lx, b)) / bnorm } else { 0.0 };

    let mut levels = ctx.trace();
    levels.sort_by_key(|t| t.level);
    let report = SolveReport {
        version: REPORT_VERSION,
        schedule: cfg.schedule,
        log_base: "natural".into(),
        n,
        nnz: l.nnz(),
        eps,
        seed: cfg.seed,
        rayleigh: lam.rayleigh,
        lambda_hat,
        d,
        eps_hat,
        p,
        c_sample: cfg.chain.eulerian.subgraph.c_sample,
        phi_target: chain.phi_target(),
        chain_nnz: chain.stats().iter().map(|s| s.nnz).collect(),
        chain_sampled_pieces: chain.stats().iter().map(|s| s.sampled_pieces).collect(),
        levels,
        outer_iterations,
        outer_contraction,
        operator_applications: budget.used(),
        budget_cap: budget.cap(),
        projected_input,
        build_seconds,
        solve_seconds,
        residual,
    };
    Ok((x, report))
}

/// [`EulerianSolver`] backed by the chain solver.
#[derive(Clone, Debug, Default)]
pub struct ChainSolver {
    pub config: SolverConfig,
}

impl ChainSolver {
    pub fn new(config: SolverConfig) -> Self {
        ChainSolver { config }
    }
}

impl EulerianSolver for ChainSolver {
    fn solve(&self, l: &DirectedLaplacian, b: &[f64], eps: f64) -> Result<Vec<f64>> {
        solve_eulerian_with(l, b, eps, &self.config).map(|r| r.0)
    }

    fn name(&self) -> &'static str {
        "chain"
    }
}
