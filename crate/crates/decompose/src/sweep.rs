use dirlap_core::connectivity::weak_components;
use dirlap_core::vector::{dot, norm2};
use dirlap_core::{Error, Result, SparseGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `Φ(S) = w(S, V∖S) / min{vol(S), vol(V∖S)}` for a symmetric adjacency.
///
/// A side of zero volume gives `Φ = 0` when nothing is cut.
pub fn conductance(u: &SparseGraph, set: &[usize]) -> Result<f64> {
    let n = u.n();
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut inside = vec![false; n];
    for &v in set {
        if v >= n {
            return Err(Error::IndexOutOfRange { row: v, col: v, n });
        }
        inside[v] = true;
    }
    if inside.iter().all(|&b| b) {
        return Err(Error::FullSet);
    }
    let deg = u.row_sums();
    let mut cut = 0.0;
    let mut vol = 0.0;
    let total: f64 = deg.iter().sum();
    for (i, j, w) in u.iter() {
        if inside[i] {
            vol += w;
            if !inside[j] {
                cut += w;
            }
        }
    }
    let denom = vol.min(total - vol);
    Ok(if cut == 0.0 { 0.0 } else { cut / denom })
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub trials: usize,
    pub iterations: usize,
    /// Relative Rayleigh-quotient stagnation that stops a trial early.
    pub tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { trials: 4, iterations: 200, tolerance: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// The smaller-volume side of the best cut found.
    pub cut: Vec<usize>,
    pub phi: f64,
}

pub fn cheeger_sweep(u: &SparseGraph, trials: usize, seed: u64) -> SweepResult {
    cheeger_sweep_with(u, &SweepConfig { trials, ..Default::default() }, seed)
}

/// Best prefix cut over approximate Fiedler vectors of a symmetric
/// adjacency.
///
/// Each trial runs power iteration on `I + D^{-1/2} U D^{-1/2}`, deflated
/// against `D^{1/2} 1`, from a random start. Vertices are ordered by the
/// `D^{-1/2}`-scaled coordinates and every prefix is evaluated. A graph
/// disconnected on its support returns one component with `Φ = 0`; a graph
/// without edges returns an empty cut with `Φ = ∞`.
pub fn cheeger_sweep_with(u: &SparseGraph, cfg: &SweepConfig, seed: u64) -> SweepResult {
    let n = u.n();
    let deg = u.row_sums();
    let support: Vec<usize> = (0..n).filter(|&v| deg[v] > 0.0).collect();
    if support.len() < 2 {
        return SweepResult { cut: Vec::new(), phi: f64::INFINITY };
    }
    let (comp, _) = weak_components(u);
    let c0 = comp[support[0]];
    if support.iter().any(|&v| comp[v] != c0) {
        let cut: Vec<usize> = support.iter().copied().filter(|&v| comp[v] == c0).collect();
        return SweepResult { cut, phi: 0.0 };
    }
    let sq: Vec<f64> = deg.iter().map(|d| d.sqrt()).collect();
    let inv_sq: Vec<f64> = deg.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
    let normalized = u.scale(&inv_sq, &inv_sq);
    let kn = norm2(&sq);
    let k: Vec<f64> = sq.iter().map(|v| v / kn).collect();
    let deflate = |x: &mut Vec<f64>| {
        for _ in 0..2 {
            let c = dot(x, &k);
            x.iter_mut().zip(&k).for_each(|(a, b)| *a -= c * b);
        }
        for v in 0..n {
            if deg[v] == 0.0 {
                x[v] = 0.0;
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = SweepResult { cut: Vec::new(), phi: f64::INFINITY };
    let mut y = vec![0.0; n];
    for _ in 0..cfg.trials.max(1) {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        deflate(&mut x);
        let mut last = f64::NAN;
        for _ in 0..cfg.iterations {
            let nx = norm2(&x);
            if nx == 0.0 {
                break;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            normalized.mul_vec(&x, &mut y);
            for v in 0..n {
                y[v] += x[v];
            }
            let rq = dot(&x, &y);
            std::mem::swap(&mut x, &mut y);
            deflate(&mut x);
            if (rq - last).abs() <= cfg.tolerance * rq.abs() {
                break;
            }
            last = rq;
        }
        let f: Vec<f64> = (0..n).map(|v| x[v] * inv_sq[v]).collect();
        let r = sweep_order(u, &deg, &support, &f);
        if r.phi < best.phi {
            best = r;
        }
    }
    best
}

fn sweep_order(u: &SparseGraph, deg: &[f64], support: &[usize], f: &[f64]) -> SweepResult {
    let n = u.n();
    let mut order = support.to_vec();
    order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
    let total: f64 = support.iter().map(|&v| deg[v]).sum();
    let mut inside = vec![false; n];
    let mut cut = 0.0;
    let mut vol = 0.0;
    let mut best_phi = f64::INFINITY;
    let mut best_len = 0;
    for (p, &v) in order.iter().enumerate().take(order.len() - 1) {
        let (cols, vals) = u.row(v);
        let mut to_inside = 0.0;
        for (&j, &w) in cols.iter().zip(vals) {
            if inside[j] {
                to_inside += w;
            }
        }
        inside[v] = true;
        cut += deg[v] - 2.0 * to_inside;
        vol += deg[v];
        let phi = cut.max(0.0) / vol.min(total - vol);
        if phi < best_phi {
            best_phi = phi;
            best_len = p + 1;
        }
    }
    let (left, right) = order.split_at(best_len);
    let vol_left: f64 = left.iter().map(|&v| deg[v]).sum();
    let mut cut = if 2.0 * vol_left <= total { left.to_vec() } else { right.to_vec() };
    cut.sort_unstable();
    SweepResult { cut, phi: best_phi }
}
