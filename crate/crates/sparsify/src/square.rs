use dirlap_core::connectivity::is_strongly_connected;
use dirlap_core::seed::child_seed;
use dirlap_core::{DirectedLaplacian, Error, Kind, Result, RowAccumulator, SparseGraph};
use dirlap_sampling::draw_count;
use rayon::prelude::*;

use crate::eulerian::{sparsify_eulerian_with, EulerianConfig, EulerianReport};
use crate::product::{sparsify_product_with, ProductConfig};

/// Per-vertex pieces with at most this many row plus column entries are
/// emitted exactly.
pub const EXACT_PIECE_SUPPORT: usize = 64;

#[derive(Clone, Debug)]
pub struct SquareConfig {
    pub exact_support: usize,
    pub product: ProductConfig,
    pub eulerian: EulerianConfig,
}

impl Default for SquareConfig {
    fn default() -> Self {
        SquareConfig { exact_support: EXACT_PIECE_SUPPORT, product: ProductConfig::default(), eulerian: EulerianConfig::default() }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SquareReport {
    pub exact_pieces: usize,
    pub sampled_pieces: usize,
    pub max_product_attempts: usize,
    /// `nnz` of the summed per-vertex sparsifiers.
    pub nnz_products: usize,
    pub nnz_out: usize,
    /// Always false: the square is only ever assembled from sparse rows.
    pub materialized_square: bool,
    pub eulerian: EulerianReport,
}

fn check_balanced(w: &SparseGraph) -> Result<Vec<f64>> {
    let rs = w.row_sums();
    let cs = w.col_sums();
    let scale = rs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..w.n() {
        let defect = (rs[i] - cs[i]).abs();
        if defect > 1e-10 * scale {
            return Err(Error::RowColMismatch { index: i, defect });
        }
    }
    for (i, j, v) in w.iter() {
        if v < 0.0 {
            return Err(Error::NegativeWeight { row: i, col: j, weight: v });
        }
    }
    Ok(rs)
}

/// Sparse rows of `Σ_{i ∈ keep} W_{:,i} W_{i,:} / D_ii` without diagonal,
/// returned transposed as an adjacency (edge `b -> a` carries entry `(a, b)`).
fn exact_products(w: &SparseGraph, d: &[f64], keep: &[bool]) -> SparseGraph {
    let n = w.n();
    let mut acc = RowAccumulator::new(n, Kind::Matrix);
    for a in 0..n {
        let (cols, vals) = w.row(a);
        for (&i, &wai) in cols.iter().zip(vals) {
            if !keep[i] {
                continue;
            }
            let f = wai / d[i];
            let (c2, v2) = w.row(i);
            for (&b, &wib) in c2.iter().zip(v2) {
                if b != a {
                    acc.add(b, f * wib);
                }
            }
        }
        acc.finish_row();
    }
    acc.build().transpose()
}

/// `M = D − W D⁻¹ W` assembled exactly from sparse rows.
pub fn square_laplacian_exact(w: &SparseGraph) -> Result<DirectedLaplacian> {
    let d = check_balanced(w)?;
    if let Some(i) = d.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroDegreeVertex(i));
    }
    let keep = vec![true; w.n()];
    let adj = exact_products(w, &d, &keep).with_kind(Kind::Adjacency)?;
    let tol = 2e-10 * d.iter().fold(0.0f64, |m, &v| m.max(v));
    DirectedLaplacian::validate_with_tol(adj, Some(tol))
}

pub fn sparsify_square(w: &SparseGraph, p: f64, eps: f64, seed: u64) -> Result<SparseGraph> {
    sparsify_square_with(w, p, eps, seed, &SquareConfig::default()).map(|r| r.0)
}

/// Sparsifies `M = D − W D⁻¹ W` for `D = diag(W1)` and returns
/// `W̃ = D − M̃`.
///
/// `M` splits as `Σ_i diag(W_{i,:}) − W_{:,i} W_{i,:} / D_ii`. Each piece is
/// sparsified with `sparsify_product(W_{:,i}, W_{i,:}, p/2n, ε/6)`, or
/// emitted exactly when small, and the sum is passed through
/// `sparsify_eulerian(·, p/2, ε/3)`.
pub fn sparsify_square_with(
    w: &SparseGraph,
    p: f64,
    eps: f64,
    seed: u64,
    cfg: &SquareConfig,
) -> Result<(SparseGraph, SquareReport)> {
    let n = w.n();
    let d = check_balanced(w)?;
    if let Some(i) = d.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroDegreeVertex(i));
    }
    if !is_strongly_connected(&w.without_diagonal()) {
        return Err(Error::NotStronglyConnected);
    }
    let wt = w.transpose();
    let p_piece = p / (2.0 * n as f64);
    let eps_piece = eps / 6.0;
    let mut keep = vec![false; n];
    let mut sampled = Vec::new();
    for i in 0..n {
        let sx = wt.row_nnz(i);
        let sy = w.row_nnz(i);
        let s = sx + sy;
        let entries = sx * sy;
        let dense_enough = cfg.product.exact_when_dense && draw_count(cfg.product.c_sample, s, p_piece, eps_piece) >= entries;
        if s <= cfg.exact_support || sx <= 1 || sy <= 1 || dense_enough {
            keep[i] = true;
        } else {
            sampled.push(i);
        }
    }
    let mut report = SquareReport { exact_pieces: n - sampled.len(), sampled_pieces: sampled.len(), ..Default::default() };
    let exact = exact_products(w, &d, &keep);

    let pieces: Vec<Result<(Vec<(usize, usize, f64)>, usize)>> = sampled
        .par_iter()
        .map(|&i| {
            let (xc, xv) = wt.row(i);
            let (yc, yv) = w.row(i);
            let mut support: Vec<usize> = xc.iter().chain(yc).copied().collect();
            support.sort_unstable();
            support.dedup();
            let mut x = vec![0.0; support.len()];
            let mut y = vec![0.0; support.len()];
            for (&c, &v) in xc.iter().zip(xv) {
                x[support.binary_search(&c).expect("in support")] = v;
            }
            for (&c, &v) in yc.iter().zip(yv) {
                y[support.binary_search(&c).expect("in support")] = v;
            }
            let (lp, rep) = sparsify_product_with(&x, &y, p_piece, eps_piece, child_seed(seed, i as u64), &cfg.product)?;
            let trip = lp.adjacency().iter().map(|(a, b, v)| (support[a], support[b], v)).collect();
            Ok((trip, rep.attempts))
        })
        .collect();
    let mut trip: Vec<(usize, usize, f64)> = exact.iter().collect();
    for r in pieces {
        let (t, attempts) = r?;
        report.max_product_attempts = report.max_product_attempts.max(attempts);
        trip.extend(t);
    }
    let adj = SparseGraph::from_triplets(n, Kind::Adjacency, trip)?;
    report.nnz_products = adj.nnz();
    let tol = 2e-10 * d.iter().fold(0.0f64, |m, &v| m.max(v));
    let mhat = DirectedLaplacian::validate_with_tol(adj, Some(tol))?;
    let (mt, erep) = sparsify_eulerian_with(&mhat, p / 2.0, eps / 3.0, child_seed(seed, u64::MAX), &cfg.eulerian)?;
    report.eulerian = erep;

    // W̃ = D − M̃: off-diagonal (a, b) is the edge b -> a of M̃, the diagonal
    // is whatever degree M̃ leaves.
    let od = mt.out_degrees();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (b, a, v) in mt.adjacency().iter() {
        rows[a].push((b, v));
    }
    for a in 0..n {
        let diag = d[a] - od[a];
        if diag > 1e-14 * d[a] {
            rows[a].push((a, diag));
        }
    }
    let out = SparseGraph::from_rows(n, Kind::Matrix, rows)?;
    report.nnz_out = out.nnz();
    Ok((out, report))
}
