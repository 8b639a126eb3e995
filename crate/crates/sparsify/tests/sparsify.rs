use dirlap_core::{DirectedLaplacian, Kind, SparseGraph};
use dirlap_oracle::{
    approx_norm, dense_allocations, dense_square_laplacian, generalized_eigs, generators, laplacian, relative_norm,
    sym_eigen, sym_part, to_dense, DVec, Dense,
};
use dirlap_decompose::DecompositionConfig;
use dirlap_sampling::SubgraphConfig;
use dirlap_sparsify::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn degrees_match(a: &DirectedLaplacian, b: &DirectedLaplacian, rel: f64) -> bool {
    let scale = a.out_degrees().iter().cloned().fold(0.0, f64::max);
    (0..a.n()).all(|i| {
        (a.out_degrees()[i] - b.out_degrees()[i]).abs() <= rel * scale
            && (a.in_degrees()[i] - b.in_degrees()[i]).abs() <= rel * scale
    })
}

fn norm_vs(l: &DirectedLaplacian, lt: &DirectedLaplacian) -> f64 {
    approx_norm(&laplacian(l).unwrap(), &laplacian(lt).unwrap()).unwrap().norm
}

#[test]
fn sparse_input_keeps_degrees_and_norm() {
    let l = generators::random_eulerian(20, 5, 4, 0.5, 2.0, 4);
    let out = sparsify_eulerian(&l, 0.1, 0.25, 9).unwrap();
    assert!(degrees_match(&l, &out, 1e-10));
    assert!(out.is_eulerian());
    assert!(norm_vs(&l, &out) <= 0.25);
}

#[test]
fn bidirected_k30_fidelity() {
    let l = generators::complete(30);
    let mut good = 0;
    for seed in 0..100 {
        let out = sparsify_eulerian(&l, 0.1, 0.25, seed).unwrap();
        assert!(degrees_match(&l, &out, 1e-10));
        assert!(out.adjacency().nnz() <= l.adjacency().nnz());
        if norm_vs(&l, &out) <= 0.25 {
            good += 1;
        }
    }
    assert!(good >= 95);
}

#[test]
#[ignore = "the draw count c·s·ε⁻²·ln(s/p) exceeds the edge count of K30 by orders of magnitude, so pieces are returned whole and nnz cannot drop below nnz(L) at this size"]
fn bidirected_k30_reduces_nnz() {
    let l = generators::complete(30);
    let out = sparsify_eulerian(&l, 0.1, 0.25, 1).unwrap();
    assert!(out.adjacency().nnz() < l.adjacency().nnz());
}

#[test]
fn symmetrization_sandwich() {
    for seed in 0..10 {
        let l = generators::random_eulerian(40, 60, 6, 0.2, 5.0, seed);
        let eps = 0.25;
        let out = sparsify_eulerian(&l, 0.1, eps, seed).unwrap();
        let u = sym_part(&laplacian(&l).unwrap());
        let ut = sym_part(&laplacian(&out).unwrap());
        let (lo, hi) = generalized_eigs(&ut, &u).unwrap();
        assert!(lo >= 1.0 - eps - 1e-9 && hi <= 1.0 + eps + 1e-9, "{lo} {hi}");
    }
}

#[test]
fn rejects_non_eulerian_and_disconnected() {
    let two = DirectedLaplacian::validate(
        SparseGraph::from_triplets(2, Kind::Adjacency, vec![(0, 1, 2.0), (1, 0, 1.0)]).unwrap(),
    )
    .unwrap();
    assert!(matches!(sparsify_eulerian(&two, 0.1, 0.2, 0), Err(dirlap_core::Error::NotEulerian { .. })));
    let pair = DirectedLaplacian::validate(
        SparseGraph::from_triplets(4, Kind::Adjacency, vec![(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)])
            .unwrap(),
    )
    .unwrap();
    assert!(matches!(sparsify_eulerian(&pair, 0.1, 0.2, 0), Err(dirlap_core::Error::NotStronglyConnected)));
}

#[test]
fn skipping_decomposition_is_output_identical() {
    let l = generators::random_eulerian(25, 20, 5, 0.5, 8.0, 31);
    let skip = EulerianConfig::default();
    let full = EulerianConfig { skip_when_exact: false, ..Default::default() };
    let (a, ra) = sparsify_eulerian_with(&l, 0.1, 0.25, 3, &skip).unwrap();
    let (b, rb) = sparsify_eulerian_with(&l, 0.1, 0.25, 3, &full).unwrap();
    assert!(ra.skipped_decomposition && !rb.skipped_decomposition);
    assert_eq!(rb.sampled_pieces, 0);
    assert!(rb.pieces >= 1);
    assert_eq!(a, b);
}

#[test]
fn forced_sampling_keeps_degrees() {
    let l = generators::complete(12);
    let cfg = EulerianConfig {
        skip_when_exact: false,
        exact_when_dense: false,
        decomposition: DecompositionConfig { phi_target: Some(0.4), ..Default::default() },
        subgraph: SubgraphConfig { verify: false, ..Default::default() },
    };
    for seed in 0..3 {
        let (out, rep) = sparsify_eulerian_with(&l, 0.1, 0.9, seed, &cfg).unwrap();
        assert!(rep.sampled_pieces >= 1);
        assert!(out.is_eulerian());
        assert!(degrees_match(&l, &out, 1e-10));
        assert!(norm_vs(&l, &out).is_finite());
    }
}

/// `diag(y) − xyᵀ/r` including the canceling diagonal products, as the
/// undirected symmetrization of the product graph with self-loops.
fn product_gap(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let r: f64 = x.iter().sum();
    let mut adj = Dense::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            adj[(i, j)] = 0.5 * (x[i] * y[j] + x[j] * y[i]) / r;
        }
    }
    let deg: Vec<f64> = (0..n).map(|i| adj.row(i).sum()).collect();
    let idx: Vec<usize> = (0..n).filter(|&i| deg[i] > 0.0).collect();
    let m = idx.len();
    let mut norm = Dense::identity(m, m);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            norm[(a, b)] -= adj[(i, j)] / (deg[i] * deg[j]).sqrt();
        }
    }
    sym_eigen(&norm).0[1]
}

#[test]
fn product_gap_closed_form() {
    assert!((product_gap(&[1.0, 1.0], &[1.0, 1.0]) - 1.0).abs() < 1e-12);
}

#[test]
fn product_gap_is_at_least_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let n = rng.random_range(2..12);
        let mut x: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.8 { rng.random::<f64>() } else { 0.0 }).collect();
        let mut y: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.8 { rng.random::<f64>() } else { 0.0 }).collect();
        x[0] += 0.1;
        y[n - 1] += 0.1;
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        y.iter_mut().for_each(|v| *v *= sx / sy);
        let trimmed: Vec<usize> = (0..n).filter(|&i| x[i] + y[i] > 0.0).collect();
        let xt: Vec<f64> = trimmed.iter().map(|&i| x[i]).collect();
        let yt: Vec<f64> = trimmed.iter().map(|&i| y[i]).collect();
        assert!(product_gap(&xt, &yt) >= 1.0 - 1e-9);
    }
}

#[test]
fn product_single_support_is_exact() {
    let y = [0.5, 1.0, 1.5, 0.0];
    let x = [3.0, 0.0, 0.0, 0.0];
    let (l, rep) = sparsify_product_with(&x, &y, 0.1, 0.2, 1, &ProductConfig::default()).unwrap();
    assert!(rep.exact);
    assert_eq!(l, product_laplacian(&x, &y).unwrap());
    // Vertex 0 is both the only row and a column, so its own product cancels.
    assert_eq!(l.adjacency().nnz(), 2);
}

#[test]
fn product_norm_mismatch() {
    assert!(matches!(
        sparsify_product(&[1.0, 1.0], &[1.0, 2.0], 0.1, 0.2, 0),
        Err(dirlap_core::Error::NormMismatch { .. })
    ));
}

#[test]
fn product_sampling_fidelity() {
    let cfg = ProductConfig { exact_when_dense: false, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for seed in 0..20 {
        let mut x: Vec<f64> = (0..6).map(|_| rng.random_range(0.1..1.0)).collect();
        let mut y: Vec<f64> = (0..6).map(|_| rng.random_range(0.1..1.0)).collect();
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        x.iter_mut().for_each(|v| *v /= sx);
        y.iter_mut().for_each(|v| *v /= sy);
        let exact = product_laplacian(&x, &y).unwrap();
        let (lt, rep) = sparsify_product_with(&x, &y, 0.1, 0.5, seed, &cfg).unwrap();
        assert!(!rep.exact);
        assert!(degrees_match(&exact, &lt, 1e-10));
        let le = laplacian(&exact).unwrap();
        let s = laplacian(&exact.graph_symmetrization()).unwrap();
        let n = relative_norm(&s, &(laplacian(&lt).unwrap() - &le), dirlap_oracle::spectral_norm(&le)).unwrap();
        assert!(n.norm <= 0.5, "seed {seed}: {}", n.norm);
        assert!((n.norm - n.rayleigh).abs() <= 1e-9 * n.norm.max(1.0));
    }
}

fn lazy(w: &SparseGraph, alpha: f64) -> SparseGraph {
    let d = w.row_sums();
    SparseGraph::diagonal_matrix(&d).linear_combination(alpha, w, 1.0 - alpha).unwrap()
}

fn eulerian_w(n: usize, seed: u64) -> SparseGraph {
    generators::random_eulerian(n, 2 * n, 5, 0.5, 2.0, seed).adjacency().clone().with_kind(Kind::Matrix).unwrap()
}

fn square_norm(w: &SparseGraph, wt: &SparseGraph) -> f64 {
    let m = dense_square_laplacian(w).unwrap();
    let d = Dense::from_diagonal(&DVec::from_vec(w.row_sums()));
    let mt = d - to_dense(wt).unwrap();
    approx_norm(&m, &mt).unwrap().norm
}

#[test]
fn c3_square_is_reverse_cycle() {
    let w = generators::cycle(3).adjacency().clone().with_kind(Kind::Matrix).unwrap();
    let (wt, rep) = sparsify_square_with(&w, 0.1, 0.3, 1, &SquareConfig::default()).unwrap();
    assert_eq!(rep.sampled_pieces, 0);
    // W² for the cycle permutation is the reverse step.
    let expect = SparseGraph::from_triplets(3, Kind::Matrix, vec![(0, 2, 1.0), (1, 0, 1.0), (2, 1, 1.0)]).unwrap();
    assert_eq!(wt, expect);
}

#[test]
fn lazy_square_keeps_diagonal() {
    let w = lazy(&eulerian_w(10, 3), 0.25);
    let wt = sparsify_square(&w, 0.1, 0.3, 4).unwrap();
    assert!(wt.diagonal().iter().all(|&v| v > 0.0));
    assert!(square_norm(&w, &wt) <= 0.3);
}

#[test]
fn random_square_fidelity_without_materializing() {
    let before = dense_allocations();
    let mut outs = Vec::new();
    for seed in 0..100 {
        let w = eulerian_w(15, seed);
        outs.push((w.clone(), sparsify_square(&w, 0.1, 0.3, seed).unwrap()));
    }
    assert_eq!(dense_allocations(), before, "square pipeline allocated dense matrices");
    let good = outs.iter().filter(|(w, wt)| square_norm(w, wt) <= 0.3).count();
    assert!(good >= 95);
}

#[test]
fn per_vertex_pieces_sum_to_square() {
    for seed in 0..5 {
        let w = lazy(&eulerian_w(30, seed), 0.25);
        let n = w.n();
        let wt = w.transpose();
        let mut sum = Dense::zeros(n, n);
        for i in 0..n {
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            for (&c, &v) in wt.row(i).0.iter().zip(wt.row(i).1) {
                x[c] = v;
            }
            for (&c, &v) in w.row(i).0.iter().zip(w.row(i).1) {
                y[c] = v;
            }
            sum += laplacian(&product_laplacian(&x, &y).unwrap()).unwrap();
        }
        let m = dense_square_laplacian(&w).unwrap();
        assert!((&sum - &m).norm() <= 1e-12 * m.norm());
        let exact = laplacian(&square_laplacian_exact(&w).unwrap()).unwrap();
        assert!((&exact - &m).norm() <= 1e-12 * m.norm());
    }
}

#[test]
fn forced_square_sampling_conserves_degrees() {
    let cfg = SquareConfig {
        exact_support: 0,
        product: ProductConfig { exact_when_dense: false, ..Default::default() },
        ..Default::default()
    };
    for seed in 0..5 {
        let w = lazy(&eulerian_w(20, 40 + seed), 0.25);
        let (wt, rep) = sparsify_square_with(&w, 0.1, 0.3, seed, &cfg).unwrap();
        assert!(rep.sampled_pieces > 0);
        assert!(!rep.materialized_square);
        let d = w.row_sums();
        let scale = d.iter().cloned().fold(0.0, f64::max);
        for (a, b) in wt.row_sums().iter().zip(&d) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
        for (a, b) in wt.col_sums().iter().zip(&d) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
        assert!(square_norm(&w, &wt) <= 0.3);
    }
}

#[test]
fn square_rejects_unbalanced() {
    let w = SparseGraph::from_triplets(2, Kind::Matrix, vec![(0, 1, 2.0), (1, 0, 1.0)]).unwrap();
    assert!(matches!(sparsify_square(&w, 0.1, 0.3, 0), Err(dirlap_core::Error::RowColMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn square_pipeline_conserves_degrees(n in 3usize..25, seed in any::<u64>(), lazy_a in 0.0f64..0.5) {
        let w = lazy(&eulerian_w(n, seed), lazy_a);
        let wt = sparsify_square(&w, 0.1, 0.3, seed).unwrap();
        let d = w.row_sums();
        let scale = d.iter().cloned().fold(0.0, f64::max);
        for (a, b) in wt.row_sums().iter().zip(&d) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
        for (a, b) in wt.col_sums().iter().zip(&d) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn eulerian_output_degrees_exact(n in 3usize..30, extra in 0usize..40, seed in any::<u64>()) {
        let l = generators::random_eulerian(n, extra, 5, 0.1, 10.0, seed);
        let out = sparsify_eulerian(&l, 0.1, 0.25, seed).unwrap();
        prop_assert!(degrees_match(&l, &out, 1e-10));
        prop_assert!(out.adjacency().nnz() <= l.adjacency().nnz());
    }
}
