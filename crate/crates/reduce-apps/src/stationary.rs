use dirlap_core::connectivity::is_strongly_connected;
use dirlap_core::vector::norm1;
use dirlap_core::{DirectedLaplacian, Error, EulerianSolver, Kind, Result, SparseGraph};
use serde::{Deserialize, Serialize};

use crate::patch::{solve_patched, DominantSystem};

/// Smallest inner accuracy requested from the Eulerian solver.
pub const MIN_INNER_EPS: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct StationaryConfig {
    /// Inner accuracy `c_stat · (α/n)^q`, floored at [`MIN_INNER_EPS`].
    pub c_stat: f64,
    pub exponent: i32,
    /// Stop once the residual `‖π − πP‖₁` falls below this value.
    pub early_stop: f64,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        StationaryConfig { c_stat: 1e-3, exponent: 5, early_stop: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryResult {
    /// Stationary distribution `π` of the walk `D⁻¹A`.
    pub distribution: Vec<f64>,
    pub iterations: usize,
    /// `‖π − πP‖₁` for the walk matrix `P = D⁻¹A`.
    pub residual: f64,
    /// Restart used by each round.
    pub restarts: Vec<f64>,
    pub inner_eps: f64,
}

pub fn compute_stationary(l: &DirectedLaplacian, alpha: f64, inner: &dyn EulerianSolver) -> Result<StationaryResult> {
    compute_stationary_with(l, alpha, inner, &StationaryConfig::default())
}

/// The restart of round `t` out of `k + 1`: `α^{(t+1)/(k+1)}`, ending at `α`.
pub fn restart_schedule(alpha: f64) -> Vec<f64> {
    let k = (3.0 * (1.0 / alpha).ln()).ceil().max(0.0) as usize;
    (0..=k).map(|t| alpha.powf((t + 1) as f64 / (k + 1) as f64)).collect()
}

/// Stationary distribution through `⌈3 ln(1/α)⌉ + 1` rounds of scaled
/// restarted solves.
///
/// Round `t` sets `e = max{0, −Lx ⊘ x} + α_t d`, solves
/// `(E + L) X z = D⁻¹e / ‖D⁻¹e‖₁` through the `(n+1)`-vertex Eulerian
/// patch of `(E + L) X`, and updates `x ← X z`. The result is `Dx/‖Dx‖₁`.
pub fn compute_stationary_with(
    l: &DirectedLaplacian,
    alpha: f64,
    inner: &dyn EulerianSolver,
    cfg: &StationaryConfig,
) -> Result<StationaryResult> {
    let n = l.n();
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!("restart {alpha} must lie in (0, 1/2]")));
    }
    if n == 0 || !is_strongly_connected(l.adjacency()) {
        return Err(Error::NotStronglyConnected);
    }
    let d = l.out_degrees();
    if n == 1 {
        return Ok(StationaryResult {
            distribution: vec![1.0],
            iterations: 0,
            residual: 0.0,
            restarts: vec![],
            inner_eps: 0.0,
        });
    }
    let inner_eps = (cfg.c_stat * (alpha / n as f64).powi(cfg.exponent)).max(MIN_INNER_EPS);
    let mut x: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let mut restarts = Vec::new();
    let mut iterations = 0;
    for at in restart_schedule(alpha) {
        let q: Vec<f64> = d.iter().map(|v| at * v).collect();
        let sys = DominantSystem::boosted(l, &q, x.clone())?;
        let rhs: Vec<f64> = sys.diagonal().iter().zip(d).map(|(e, v)| e / v).collect();
        let s = norm1(&rhs);
        let rhs: Vec<f64> = rhs.iter().map(|v| v / s).collect();
        let z = solve_patched(&sys.patched()?, &rhs, inner, inner_eps)?;
        x = positive_part(&x.iter().zip(&z).map(|(a, b)| a * b).collect::<Vec<_>>())?;
        restarts.push(at);
        iterations += 1;
        if cfg.early_stop > 0.0 && walk_residual(l, &x) <= cfg.early_stop {
            break;
        }
    }
    let residual = walk_residual(l, &x);
    let mut pi: Vec<f64> = x.iter().zip(d).map(|(a, b)| a * b).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    Ok(StationaryResult { distribution: pi, iterations, residual, restarts, inner_eps })
}

/// `‖L x‖₁ / ‖D x‖₁`, which equals `‖π − πP‖₁` for `π ∝ Dx`.
pub fn walk_residual(l: &DirectedLaplacian, x: &[f64]) -> f64 {
    let dx: f64 = x.iter().zip(l.out_degrees()).map(|(a, b)| (a * b).abs()).sum();
    norm1(&l.mul(x)) / dx
}

/// Rescales and clips an iterate so that every entry is positive.
fn positive_part(x: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = x.iter().sum();
    let sign = if total < 0.0 { -1.0 } else { 1.0 };
    let max = x.iter().fold(0.0f64, |m, &v| m.max(sign * v));
    if !(max > 0.0 && max.is_finite()) {
        return Err(Error::InnerSolverFailure("stationary iterate has no positive entries".into()));
    }
    Ok(x.iter().map(|&v| (sign * v / max).max(1e-18)).collect())
}

#[derive(Clone, Debug)]
pub struct ScaleConfig {
    pub alpha: f64,
    pub stationary: StationaryConfig,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        ScaleConfig { alpha: 1e-9, stationary: StationaryConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    /// Largest `|(L x)_i| / (d_i x_i)` before repair.
    pub defect_before_repair: f64,
    /// Total weight added along tree paths by the repair.
    pub repair_weight: f64,
    pub stationary_iterations: usize,
}

pub fn eulerian_scale(l: &DirectedLaplacian, inner: &dyn EulerianSolver) -> Result<(Vec<f64>, DirectedLaplacian)> {
    eulerian_scale_with(l, inner, &ScaleConfig::default()).map(|r| (r.0, r.1))
}

/// Positive `x` with `Σx = n` such that `L·diag(x)` is Eulerian.
///
/// `x = D⁻¹π` for the approximate stationary `π`. The remaining in/out
/// imbalance of `L·diag(x)` is routed along a spanning in-tree and out-tree
/// of existing edges through vertex 0, so the returned Laplacian is
/// Eulerian with the support of `L`.
pub fn eulerian_scale_with(
    l: &DirectedLaplacian,
    inner: &dyn EulerianSolver,
    cfg: &ScaleConfig,
) -> Result<(Vec<f64>, DirectedLaplacian, ScaleReport)> {
    let n = l.n();
    if n == 0 || !is_strongly_connected(l.adjacency()) {
        return Err(Error::NotStronglyConnected);
    }
    if l.is_eulerian() {
        let report = ScaleReport { defect_before_repair: 0.0, repair_weight: 0.0, stationary_iterations: 0 };
        return Ok((vec![1.0; n], l.clone(), report));
    }
    let st = compute_stationary_with(l, cfg.alpha, inner, &cfg.stationary)?;
    let d = l.out_degrees();
    let mut x: Vec<f64> = st.distribution.iter().zip(d).map(|(p, v)| p / v).collect();
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v *= n as f64 / s);
    let scaled = l.right_scale(&x)?;
    let defect = scaled.mul(&vec![1.0; n]);
    let defect_before_repair = (0..n).map(|i| defect[i].abs() / (d[i] * x[i])).fold(0.0, f64::max);
    let (repaired, repair_weight) = repair_imbalance(&scaled)?;
    let report = ScaleReport { defect_before_repair, repair_weight, stationary_iterations: st.iterations };
    Ok((x, repaired, report))
}

/// Adds flow along existing edges so that in- and out-degrees agree.
///
/// Vertex `i` with out-degree excess `δ_i = out_i − in_i` needs `δ_i` more
/// incoming weight. Vertices with a deficit send it to the root along a
/// shortest in-tree path; the root forwards it to the vertices with an
/// excess along a shortest out-tree path.
fn repair_imbalance(l: &DirectedLaplacian) -> Result<(DirectedLaplacian, f64)> {
    let n = l.n();
    let a = l.adjacency();
    let excess: Vec<f64> = (0..n).map(|i| l.out_degrees()[i] - l.in_degrees()[i]).collect();
    let out_parent = bfs_tree(a);
    let in_parent = bfs_tree(&a.transpose());
    let mut add: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    let mut total = 0.0;
    for v in 1..n {
        let amount = excess[v];
        if amount < 0.0 {
            // Deficit: route −amount from v up to the root.
            let mut u = v;
            while u != 0 {
                let p = in_parent[u].ok_or(Error::NotStronglyConnected)?;
                *add.entry((u, p)).or_insert(0.0) += -amount;
                total += -amount;
                u = p;
            }
        } else if amount > 0.0 {
            let mut u = v;
            while u != 0 {
                let p = out_parent[u].ok_or(Error::NotStronglyConnected)?;
                *add.entry((p, u)).or_insert(0.0) += amount;
                total += amount;
                u = p;
            }
        }
    }
    let mut trip: Vec<(usize, usize, f64)> = a.iter().collect();
    trip.extend(add.into_iter().map(|((u, v), w)| (u, v, w)));
    let g = SparseGraph::from_triplets(n, Kind::Adjacency, trip)?;
    Ok((DirectedLaplacian::validate(g)?, total))
}

/// Parent of every vertex in a breadth-first tree from vertex 0 over the
/// edges of `g` (`parent[v] → v` is an edge).
fn bfs_tree(g: &SparseGraph) -> Vec<Option<usize>> {
    let n = g.n();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        let (cols, _) = g.row(u);
        for &v in cols {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    parent
}
