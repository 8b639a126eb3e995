//! Expander-style decompositions of directed Laplacians.
//!
//! Edges are bucketed by weight scale. Within each bucket the undirected
//! graph symmetrization is split by recursive sweep cuts over approximate
//! Fiedler vectors until no sweep cut falls below the conductance target.
//! Edges inside a certified vertex group form one piece; cut edges are
//! queued for the next round.

mod sweep;

pub use sweep::{cheeger_sweep, cheeger_sweep_with, conductance, SweepConfig, SweepResult};

use dirlap_core::connectivity::weak_components;
use dirlap_core::seed::child_seed;
use dirlap_core::{DirectedLaplacian, Error, Kind, Result, SparseGraph};

/// Default `c_phi` in `phi_target = c_phi / ln²(n + 1)`.
pub const C_PHI: f64 = 0.125;

/// `c_phi / ln²(n + 1)`.
pub fn default_phi_target(n: usize) -> f64 {
    let l = ((n + 1) as f64).ln();
    C_PHI / (l * l)
}

#[derive(Clone, Debug)]
pub struct DecompositionConfig {
    /// Conductance target; `None` uses [`default_phi_target`].
    pub phi_target: Option<f64>,
    pub sweep: SweepConfig,
    /// Round limit per bucket; `None` uses `⌈log₂ nnz⌉ + 1`.
    pub max_rounds: Option<usize>,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        DecompositionConfig { phi_target: None, sweep: SweepConfig::default(), max_rounds: None }
    }
}

/// One piece `L^(i)` of a decomposition together with its cover `U^(i)`.
#[derive(Clone, Debug)]
pub struct Piece {
    pub laplacian: DirectedLaplacian,
    /// Undirected cover, stored as the Laplacian of a symmetric adjacency.
    pub cover: DirectedLaplacian,
    pub vertices: Vec<usize>,
    pub bucket: usize,
    pub round: usize,
    /// Smallest sweep conductance observed when the piece was certified.
    pub certified_phi: f64,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub pieces: Vec<Piece>,
    /// Reported spectral-gap lower bound `phi_target² / 4`.
    pub alpha: f64,
    /// Reported cover multiplicity `(#rounds) · (#buckets)`.
    pub beta: f64,
    /// `Σ_i |supp(L^(i))|`.
    pub total_support: usize,
    pub phi_target: f64,
    pub buckets: usize,
    pub nonempty_buckets: usize,
    pub rounds: usize,
    /// Fraction of the remaining edges certified in each round, per bucket.
    pub progress: Vec<Vec<f64>>,
}

impl Decomposition {
    /// `Σ_i L^(i)`.
    pub fn reassemble(&self, n: usize) -> Result<DirectedLaplacian> {
        DirectedLaplacian::sum(n, self.pieces.iter().map(|p| &p.laplacian))
    }
}

/// Bucket index `⌊log₂(w / w_min)⌋`, clamped to `b = ⌈log₂(w_max / w_min)⌉`.
pub fn weight_bucket(w: f64, wmin: f64, b: usize) -> usize {
    let t = (w / wmin).log2().floor();
    if t <= 0.0 {
        0
    } else {
        (t as usize).min(b)
    }
}

pub fn find_decomposition(l: &DirectedLaplacian, phi_target: f64, seed: u64) -> Result<Decomposition> {
    let cfg = DecompositionConfig { phi_target: Some(phi_target), ..Default::default() };
    find_decomposition_with(l, &cfg, seed)
}

pub fn find_decomposition_with(l: &DirectedLaplacian, cfg: &DecompositionConfig, seed: u64) -> Result<Decomposition> {
    let n = l.n();
    let phi_target = cfg.phi_target.unwrap_or_else(|| default_phi_target(n));
    if !(phi_target > 0.0 && phi_target < 1.0) {
        return Err(Error::InvalidParameter(format!("phi_target = {phi_target} must lie in (0, 1)")));
    }
    let a = l.adjacency();
    let mut out = Decomposition {
        pieces: Vec::new(),
        alpha: phi_target * phi_target / 4.0,
        beta: 0.0,
        total_support: 0,
        phi_target,
        buckets: 0,
        nonempty_buckets: 0,
        rounds: 0,
        progress: Vec::new(),
    };
    let Some((wmin, wmax)) = a.weight_range() else {
        return Ok(out);
    };
    let b = (wmax / wmin).log2().ceil().max(0.0) as usize;
    out.buckets = b + 1;
    let mut buckets: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); b + 1];
    for (i, j, w) in a.iter() {
        buckets[weight_bucket(w, wmin, b)].push((i, j, w));
    }
    let max_rounds = cfg
        .max_rounds
        .unwrap_or_else(|| (a.nnz() as f64).log2().ceil().max(0.0) as usize + 1);
    let mut counter = 0u64;
    for (t, edges) in buckets.into_iter().enumerate() {
        if edges.is_empty() {
            continue;
        }
        out.nonempty_buckets += 1;
        let mut remaining = edges;
        let mut progress = Vec::new();
        let mut round = 0;
        while !remaining.is_empty() {
            if round >= max_rounds {
                return Err(Error::NonterminatingDecomposition { rounds: round });
            }
            let before = remaining.len();
            let (groups, cut) = split_round(n, &remaining, phi_target, &cfg.sweep, seed, &mut counter);
            for (vertices, piece_edges, phi) in groups {
                let lap = DirectedLaplacian::validate_with_tol(
                    SparseGraph::from_triplets(n, Kind::Adjacency, piece_edges)?,
                    Some(l.tol_eul()),
                )?;
                let cover = lap.graph_symmetrization();
                out.total_support += vertices.len();
                out.pieces.push(Piece { laplacian: lap, cover, vertices, bucket: t, round, certified_phi: phi });
            }
            progress.push((before - cut.len()) as f64 / before as f64);
            remaining = cut;
            round += 1;
        }
        out.rounds = out.rounds.max(round);
        out.progress.push(progress);
    }
    out.beta = (out.rounds * out.nonempty_buckets) as f64;
    Ok(out)
}

type Group = (Vec<usize>, Vec<(usize, usize, f64)>, f64);

/// One round over a directed edge set: returns the certified groups with
/// their internal edges and the edges cut between groups.
fn split_round(
    n: usize,
    edges: &[(usize, usize, f64)],
    phi_target: f64,
    sweep: &SweepConfig,
    seed: u64,
    counter: &mut u64,
) -> (Vec<Group>, Vec<(usize, usize, f64)>) {
    // Group label per vertex; vertices start in their weak component.
    let g = SparseGraph::from_triplets(n, Kind::Adjacency, edges.iter().copied()).expect("valid edges");
    let (comp, k) = weak_components(&g);
    let mut touched = vec![false; n];
    for &(i, j, _) in edges {
        touched[i] = true;
        touched[j] = true;
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for v in 0..n {
        if touched[v] {
            members[comp[v]].push(v);
        }
    }
    let mut stack: Vec<Vec<usize>> = members.into_iter().filter(|m| m.len() >= 2).collect();
    stack.reverse();
    let mut label = vec![usize::MAX; n];
    let mut certified: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut local = vec![usize::MAX; n];
    while let Some(set) = stack.pop() {
        for (idx, &v) in set.iter().enumerate() {
            local[v] = idx;
        }
        let mut trip = Vec::new();
        for &(i, j, w) in edges {
            if local[i] != usize::MAX && local[j] != usize::MAX {
                trip.push((local[i], local[j], 0.5 * w));
                trip.push((local[j], local[i], 0.5 * w));
            }
        }
        let sub = SparseGraph::from_triplets(set.len(), Kind::Adjacency, trip).expect("valid edges");
        *counter += 1;
        let res = cheeger_sweep_with(&sub, sweep, child_seed(seed, *counter));
        for &v in &set {
            local[v] = usize::MAX;
        }
        if sub.nnz() == 0 {
            continue;
        }
        if res.phi >= phi_target {
            certified.push((set, res.phi));
            continue;
        }
        let mut inside = vec![false; set.len()];
        for &c in &res.cut {
            inside[c] = true;
        }
        let (a, b): (Vec<usize>, Vec<usize>) = (0..set.len()).partition(|&c| inside[c]);
        for side in [b, a] {
            let verts: Vec<usize> = side.iter().map(|&c| set[c]).collect();
            if verts.len() >= 2 {
                stack.push(verts);
            }
        }
    }
    for (gi, (set, _)) in certified.iter().enumerate() {
        for &v in set {
            label[v] = gi;
        }
    }
    let mut piece_edges: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); certified.len()];
    let mut cut = Vec::new();
    for &(i, j, w) in edges {
        if label[i] != usize::MAX && label[i] == label[j] {
            piece_edges[label[i]].push((i, j, w));
        } else {
            cut.push((i, j, w));
        }
    }
    let groups = certified
        .into_iter()
        .zip(piece_edges)
        .filter(|(_, e)| !e.is_empty())
        .map(|((mut set, phi), e)| {
            set.sort_unstable();
            (set, e, phi)
        })
        .collect();
    (groups, cut)
}
