use dirlap_core::seed::child_seed;
use dirlap_core::vector::{dot, norm2};
use dirlap_core::{DirectedLaplacian, Error, Kind, Result, SparseGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{patch_to_degrees, sample_average_seeded, EntryDistribution};

/// Default oversampling constant in the draw count.
pub const C_SAMPLE: f64 = 16.0;

#[derive(Clone, Debug)]
pub struct SubgraphConfig {
    pub c_sample: f64,
    /// Check each sample with a power-method norm estimate and redraw on failure.
    pub verify: bool,
    pub max_resamples: usize,
    pub power_iterations: usize,
}

impl Default for SubgraphConfig {
    fn default() -> Self {
        SubgraphConfig { c_sample: C_SAMPLE, verify: true, max_resamples: 3, power_iterations: 60 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubgraphReport {
    pub s: usize,
    pub draws: usize,
    pub attempts: usize,
    pub norm_estimate: f64,
    pub patch_mass: f64,
    pub nnz_in: usize,
    pub nnz_out: usize,
}

/// `⌈c · s · ε⁻² · ln(s/p)⌉`, at least one.
pub fn draw_count(c_sample: f64, s: usize, p: f64, eps: f64) -> usize {
    let s = s as f64;
    let k = c_sample * s / (eps * eps) * (s / p).ln().max(1.0);
    if k >= usize::MAX as f64 {
        usize::MAX
    } else {
        (k.ceil() as usize).max(1)
    }
}

/// Power-method estimate of `‖R^{-1/2} (B − A) C^{-1/2}‖₂` with `R`, `C`
/// the row and column sums of `A`. Rows or columns with zero sum are
/// dropped from the scaling.
pub fn estimate_scaled_norm(a: &SparseGraph, b: &SparseGraph, iterations: usize, seed: u64) -> Result<f64> {
    let n = a.n();
    let delta = b.clone().with_kind(Kind::Matrix)?.linear_combination(1.0, &a.clone().with_kind(Kind::Matrix)?, -1.0)?;
    let inv = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 }).collect() };
    let r = inv(a.row_sums());
    let c = inv(a.col_sums());
    let m = delta.scale(&r, &c);
    if m.nnz() == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut est = 0.0f64;
    for _ in 0..iterations.max(1) {
        let nx = norm2(&x);
        if nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        m.mul_vec(&x, &mut y);
        m.mul_vec_t(&y, &mut z);
        est = est.max(dot(&x, &z).max(0.0).sqrt());
        std::mem::swap(&mut x, &mut z);
    }
    Ok(est)
}

/// Degree-preserving sparsifier of a directed Laplacian.
pub fn sparsify_subgraph(l: &DirectedLaplacian, p: f64, eps: f64, seed: u64) -> Result<DirectedLaplacian> {
    sparsify_subgraph_with(l, p, eps, seed, &SubgraphConfig::default()).map(|r| r.0)
}

/// As [`sparsify_subgraph`] with explicit configuration, also returning a
/// run report.
///
/// The adjacency `A` is sampled with `k` draws, scaled by `(1 + ε/4)⁻¹`
/// and patched back to the exact out- and in-degrees of `L`. With
/// verification enabled, a draw whose estimated normalized error exceeds
/// `ε` (or whose scaled sums overshoot a degree) is redrawn from a child
/// seed, up to `max_resamples` times.
pub fn sparsify_subgraph_with(
    l: &DirectedLaplacian,
    p: f64,
    eps: f64,
    seed: u64,
    cfg: &SubgraphConfig,
) -> Result<(DirectedLaplacian, SubgraphReport)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1)")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let a = l.adjacency();
    let mut report = SubgraphReport { nnz_in: a.nnz(), ..Default::default() };
    if a.nnz() == 0 {
        report.nnz_out = 0;
        return Ok((l.clone(), report));
    }
    let dist = EntryDistribution::build(a, seed)?;
    let k = draw_count(cfg.c_sample, dist.s(), p, eps);
    report.s = dist.s();
    report.draws = k;
    let shrink = 1.0 / (1.0 + eps / 4.0);
    for attempt in 0..=cfg.max_resamples {
        report.attempts = attempt + 1;
        let sample = sample_average_seeded(&dist, k, child_seed(seed, attempt as u64));
        let ahat = sample.scalar_mul(shrink);
        let patch = match patch_to_degrees(&ahat, l.out_degrees(), l.in_degrees(), true) {
            Ok(p) => p,
            Err(Error::TargetExceeded { .. }) if attempt < cfg.max_resamples => continue,
            Err(Error::TargetExceeded { .. }) => break,
            Err(e) => return Err(e),
        };
        report.patch_mass = patch.total_mass;
        let patched = ahat.linear_combination(1.0, &patch.to_graph(a.n(), Kind::Matrix)?, 1.0)?;
        let adj = patched.with_kind(Kind::Adjacency)?;
        if cfg.verify {
            let est = estimate_scaled_norm(a, &adj, cfg.power_iterations, child_seed(seed, 1 << 32 | attempt as u64))?;
            report.norm_estimate = est;
            if est > eps {
                continue;
            }
        }
        let out = DirectedLaplacian::validate_with_tol(adj, Some(l.tol_eul()))?;
        report.nnz_out = out.adjacency().nnz();
        return Ok((out, report));
    }
    Err(Error::OversampleExhausted(cfg.max_resamples))
}
