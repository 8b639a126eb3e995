use dirlap_core::connectivity::is_strongly_connected;
use dirlap_core::seed::child_seed;
use dirlap_core::{DirectedLaplacian, Error, Kind, Result, SparseGraph};
use dirlap_decompose::{default_phi_target, find_decomposition_with, DecompositionConfig};
use dirlap_sampling::{draw_count, sparsify_subgraph_with, SubgraphConfig, SubgraphReport};
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct EulerianConfig {
    pub decomposition: DecompositionConfig,
    pub subgraph: SubgraphConfig,
    /// Return a piece unchanged when its draw count reaches its edge count.
    pub exact_when_dense: bool,
    /// Skip the decomposition when the draw-count bound already proves
    /// every piece would be returned unchanged. The output is identical.
    pub skip_when_exact: bool,
}

impl Default for EulerianConfig {
    fn default() -> Self {
        EulerianConfig {
            decomposition: DecompositionConfig::default(),
            subgraph: SubgraphConfig::default(),
            exact_when_dense: true,
            skip_when_exact: true,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EulerianReport {
    pub skipped_decomposition: bool,
    pub pieces: usize,
    pub sampled_pieces: usize,
    pub phi_target: f64,
    /// Cover gap bound `phi_target² / 4`.
    pub alpha: f64,
    pub beta: f64,
    /// Per-piece accuracy `eps · alpha / (2 beta)`.
    pub piece_eps: f64,
    /// Per-piece failure probability `p / n²`.
    pub piece_p: f64,
    pub nnz_in: usize,
    pub nnz_out: usize,
    pub subgraph: Vec<SubgraphReport>,
}

pub fn sparsify_eulerian(l: &DirectedLaplacian, p: f64, eps: f64, seed: u64) -> Result<DirectedLaplacian> {
    sparsify_eulerian_with(l, p, eps, seed, &EulerianConfig::default()).map(|r| r.0)
}

/// Decomposes `L`, sparsifies every piece with accuracy `eps·α/(2β)` and
/// failure probability `p/n²`, and sums the results.
pub fn sparsify_eulerian_with(
    l: &DirectedLaplacian,
    p: f64,
    eps: f64,
    seed: u64,
    cfg: &EulerianConfig,
) -> Result<(DirectedLaplacian, EulerianReport)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, 1)")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    l.require_eulerian()?;
    if !is_strongly_connected(l.adjacency()) {
        return Err(Error::NotStronglyConnected);
    }
    let n = l.n();
    let a = l.adjacency();
    let phi_target = cfg.decomposition.phi_target.unwrap_or_else(|| default_phi_target(n));
    let alpha = phi_target * phi_target / 4.0;
    let piece_p = p / (n as f64 * n as f64);
    let mut report = EulerianReport {
        phi_target,
        alpha,
        piece_p,
        nnz_in: a.nnz(),
        ..Default::default()
    };

    if cfg.skip_when_exact && cfg.exact_when_dense && a.nnz() > 0 {
        // Every piece has support s ≥ 2 and at most nnz(L) edges, so a
        // lower bound on the draw count covering nnz(L) settles all pieces.
        let (wmin, wmax) = a.weight_range().expect("nonempty");
        let buckets = (wmax / wmin).log2().ceil().max(0.0) as usize + 1;
        let rounds = cfg
            .decomposition
            .max_rounds
            .unwrap_or_else(|| (a.nnz() as f64).log2().ceil().max(0.0) as usize + 1);
        let beta_max = (buckets * rounds) as f64;
        let eps_min = eps * alpha / (2.0 * beta_max);
        if draw_count(cfg.subgraph.c_sample, 2, piece_p, eps_min) >= a.nnz() {
            report.skipped_decomposition = true;
            report.beta = beta_max;
            report.piece_eps = eps_min;
            report.nnz_out = a.nnz();
            return Ok((l.clone(), report));
        }
    }

    let dec = find_decomposition_with(l, &cfg.decomposition, child_seed(seed, 0))?;
    let beta = dec.beta.max(1.0);
    let piece_eps = eps * dec.alpha / (2.0 * beta);
    report.alpha = dec.alpha;
    report.beta = beta;
    report.piece_eps = piece_eps;
    report.pieces = dec.pieces.len();
    let results: Vec<Result<(DirectedLaplacian, Option<SubgraphReport>)>> = dec
        .pieces
        .par_iter()
        .enumerate()
        .map(|(idx, piece)| {
            let lp = &piece.laplacian;
            let s = lp.out_degrees().iter().filter(|&&d| d > 0.0).count()
                + lp.in_degrees().iter().filter(|&&d| d > 0.0).count();
            let k = draw_count(cfg.subgraph.c_sample, s, piece_p, piece_eps);
            if cfg.exact_when_dense && k >= lp.adjacency().nnz() {
                return Ok((lp.clone(), None));
            }
            let (out, rep) = sparsify_subgraph_with(lp, piece_p, piece_eps, child_seed(seed, 1 + idx as u64), &cfg.subgraph)?;
            Ok((out, Some(rep)))
        })
        .collect();
    let mut trip = Vec::new();
    for r in results {
        let (piece, rep) = r?;
        if let Some(rep) = rep {
            report.sampled_pieces += 1;
            report.subgraph.push(rep);
        }
        trip.extend(piece.adjacency().iter());
    }
    let out = DirectedLaplacian::validate_with_tol(SparseGraph::from_triplets(n, Kind::Adjacency, trip)?, Some(l.tol_eul()))?;
    report.nnz_out = out.adjacency().nnz();
    Ok((out, report))
}
