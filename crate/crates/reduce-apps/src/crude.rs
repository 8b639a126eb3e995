use dirlap_core::connectivity::UnionFind;
use dirlap_core::vector::center;
use dirlap_core::{DirectedLaplacian, Error, EulerianSolver, Kind, Result, SparseGraph};
use serde::{Deserialize, Serialize};

use crate::patch::solve_regularized;

/// Default scale parameter `max(10⁶, n³)`.
pub fn default_scale_parameter(n: usize) -> f64 {
    (n as f64).powi(3).max(1e6)
}

/// One weight scale: the partition into connected components of the
/// symmetrized edges of weight at least `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleLevel {
    pub threshold: f64,
    /// Supernode of every vertex; this is the contraction map `C`.
    pub component: Vec<usize>,
    pub components: usize,
    /// `threshold / r²`.
    pub regularizer: f64,
}

impl ScaleLevel {
    /// `C v`: sums of `v` over each component.
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.components];
        for (i, &c) in self.component.iter().enumerate() {
            out[c] += v[i];
        }
        out
    }

    /// `Cᵀ u`: the value of each vertex's component.
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        self.component.iter().map(|&c| u[c]).collect()
    }

    /// Orthogonal projection onto `ker C`: removes every component's mean.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let sums = self.contract(v);
        let mut counts = vec![0usize; self.components];
        for &c in &self.component {
            counts[c] += 1;
        }
        v.iter().zip(&self.component).map(|(x, &c)| x - sums[c] / counts[c] as f64).collect()
    }

    /// `C L Cᵀ` as a Laplacian on the supernodes, formed from the edges
    /// between distinct components only.
    pub fn contracted(&self, l: &DirectedLaplacian) -> Result<DirectedLaplacian> {
        let trip: Vec<(usize, usize, f64)> = l
            .adjacency()
            .iter()
            .filter_map(|(u, v, w)| {
                let (cu, cv) = (self.component[u], self.component[v]);
                (cu != cv).then_some((cu, cv, w))
            })
            .collect();
        DirectedLaplacian::validate(SparseGraph::from_triplets(self.components, Kind::Adjacency, trip)?)
    }
}

/// Weight thresholds `w⁽⁰⁾ < w⁽¹⁾ < …` with their contraction maps.
///
/// `w⁽⁰⁾` is the smallest edge of a maximum spanning tree of `U_L`, and
/// `w⁽ⁱ⁺¹⁾ = 2w′` where `w′` is the smallest symmetrized weight `≥ w⁽ⁱ⁾`.
/// The ladder ends when no such weight exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleLadder {
    pub r: f64,
    pub levels: Vec<ScaleLevel>,
}

impl ScaleLadder {
    pub fn build(l: &DirectedLaplacian, r: f64) -> Result<Self> {
        let n = l.n();
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale parameter r = {r} must exceed 1")));
        }
        let edges = symmetrized_edges(l);
        if edges.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let mut desc = edges.clone();
        desc.sort_by(|a, b| b.2.total_cmp(&a.2));
        let mut uf = UnionFind::new(n);
        let mut w0 = f64::INFINITY;
        let mut joined = 0;
        for &(u, v, w) in &desc {
            if uf.union(u, v) {
                w0 = w0.min(w);
                joined += 1;
            }
        }
        if joined + 1 != n {
            return Err(Error::NotStronglyConnected);
        }
        let mut weights: Vec<f64> = edges.iter().map(|e| e.2).collect();
        weights.sort_by(f64::total_cmp);

        let mut levels = Vec::new();
        let mut w = w0;
        loop {
            levels.push(level_at(n, &desc, w, r));
            let idx = weights.partition_point(|&x| x < w);
            match weights.get(idx) {
                Some(&next) => w = 2.0 * next,
                None => break,
            }
        }
        Ok(ScaleLadder { r, levels })
    }
}

fn symmetrized_edges(l: &DirectedLaplacian) -> Vec<(usize, usize, f64)> {
    let u = l.symmetrization();
    u.iter().filter(|&(i, j, v)| i < j && v < 0.0).map(|(i, j, v)| (i, j, -v)).collect()
}

fn level_at(n: usize, desc: &[(usize, usize, f64)], w: f64, r: f64) -> ScaleLevel {
    let mut uf = UnionFind::new(n);
    for &(u, v, x) in desc {
        if x < w {
            break;
        }
        uf.union(u, v);
    }
    let (component, components) = uf.labels();
    ScaleLevel { threshold: w, component, components, regularizer: w / (r * r) }
}

#[derive(Clone, Debug, Default)]
pub struct CrudeConfig {
    /// Scale parameter; defaults to [`default_scale_parameter`].
    pub r: Option<f64>,
    /// Inner accuracy; defaults to `1/r`.
    pub inner_eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrudeReport {
    pub ladder: ScaleLadder,
    /// Levels whose contracted demand was nonzero and needed an inner solve.
    pub solved_levels: Vec<usize>,
    pub inner_eps: f64,
}

pub fn crude_solve_ill_conditioned(l: &DirectedLaplacian, b: &[f64], inner: &dyn EulerianSolver) -> Result<Vec<f64>> {
    crude_solve_with(l, b, inner, &CrudeConfig::default()).map(|r| r.0)
}

/// Returns `x` with `‖x − L†b‖_{U_L} ≤ ½‖L†b‖_{U_L}` by solving one
/// regularized contracted system `C L Cᵀ + (w/r²) I` per weight scale.
pub fn crude_solve_with(
    l: &DirectedLaplacian,
    b: &[f64],
    inner: &dyn EulerianSolver,
    cfg: &CrudeConfig,
) -> Result<(Vec<f64>, CrudeReport)> {
    let n = l.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    l.require_eulerian()?;
    let r = cfg.r.unwrap_or_else(|| default_scale_parameter(n));
    let inner_eps = cfg.inner_eps.unwrap_or(1.0 / r);
    let ladder = ScaleLadder::build(l, r)?;
    let mut bi = b.to_vec();
    center(&mut bi);
    let mut x = vec![0.0; n];
    let mut solved_levels = Vec::new();
    for (i, level) in ladder.levels.iter().enumerate() {
        let c = level.contract(&bi);
        if level.components < 2 || c.iter().all(|&v| v == 0.0) {
            bi = level.project(&bi);
            continue;
        }
        let k = level.contracted(l)?;
        let u = solve_regularized(&k, level.regularizer, &c, inner, inner_eps)?;
        let z = level.expand(&u);
        let lz = l.mul(&z);
        for j in 0..n {
            x[j] += z[j];
            bi[j] -= lz[j];
        }
        bi = level.project(&bi);
        solved_levels.push(i);
    }
    center(&mut x);
    Ok((x, CrudeReport { ladder, solved_levels, inner_eps }))
}
