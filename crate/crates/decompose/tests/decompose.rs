use dirlap_core::{DirectedLaplacian, Kind, SparseGraph};
use dirlap_decompose::*;
use dirlap_oracle::{generators, laplacian, psd_leq, spectral_gap, sym_part, to_dense, Dense};
use proptest::prelude::*;

fn undirected(n: usize, edges: &[(usize, usize)]) -> SparseGraph {
    let t = edges.iter().flat_map(|&(a, b)| [(a, b, 1.0), (b, a, 1.0)]);
    SparseGraph::from_triplets(n, Kind::Adjacency, t).unwrap()
}

/// Minimum conductance over every nonempty proper subset of `vertices`
/// in the symmetric adjacency `u`.
fn brute_force_phi(u: &SparseGraph, vertices: &[usize]) -> f64 {
    let k = vertices.len();
    assert!(k <= 16);
    let mut local = vec![usize::MAX; u.n()];
    for (idx, &v) in vertices.iter().enumerate() {
        local[v] = idx;
    }
    let trip: Vec<_> = u
        .iter()
        .filter(|&(i, j, _)| local[i] != usize::MAX && local[j] != usize::MAX)
        .map(|(i, j, w)| (local[i], local[j], w))
        .collect();
    let sub = SparseGraph::from_triplets(k, Kind::Adjacency, trip).unwrap();
    let mut best = f64::INFINITY;
    // Fixing the last vertex outside the set enumerates each cut once.
    for mask in 1u32..(1 << (k - 1)) {
        let set: Vec<usize> = (0..k).filter(|&b| mask >> b & 1 == 1).collect();
        best = best.min(conductance(&sub, &set).unwrap());
    }
    best
}

fn k_clique_edges(off: usize, k: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            e.push((off + i, off + j));
        }
    }
    e
}

#[test]
fn barbell_separates_cliques() {
    let mut e = k_clique_edges(0, 5);
    e.extend(k_clique_edges(5, 5));
    e.push((0, 5));
    let g = undirected(10, &e);
    let r = cheeger_sweep(&g, 4, 3);
    let truth = brute_force_phi(&g, &(0..10).collect::<Vec<_>>());
    assert!((truth - 1.0 / 21.0).abs() < 1e-15);
    assert!((r.phi - truth).abs() < 1e-15, "sweep {} brute {truth}", r.phi);
    assert!(r.cut == vec![0, 1, 2, 3, 4] || r.cut == vec![5, 6, 7, 8, 9]);
}

#[test]
fn k8_is_an_expander() {
    let g = undirected(8, &k_clique_edges(0, 8));
    let truth = brute_force_phi(&g, &(0..8).collect::<Vec<_>>());
    assert!(truth >= 0.5);
    let r = cheeger_sweep(&g, 4, 9);
    assert!(r.phi >= truth - 1e-15);
}

#[test]
fn directed_k8_single_piece() {
    let l = generators::complete(8);
    let d = find_decomposition(&l, default_phi_target(8), 1).unwrap();
    assert_eq!(d.pieces.len(), 1);
    assert!(d.beta <= 2.0);
    assert_eq!(d.pieces[0].laplacian, l);
}

#[test]
fn directed_c16_reassembles() {
    let l = generators::cycle(16);
    for target in [default_phi_target(16), 0.2, 0.4] {
        let d = find_decomposition(&l, target, 5).unwrap();
        assert_eq!(d.reassemble(16).unwrap().adjacency(), l.adjacency());
    }
}

#[test]
fn two_weight_scales_bucket_count() {
    let mut t: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6, 1.0)).collect();
    t.extend((0..6).map(|i| ((i + 1) % 6, i, 1024.0)));
    let l = DirectedLaplacian::validate(SparseGraph::from_triplets(6, Kind::Adjacency, t).unwrap()).unwrap();
    let d = find_decomposition(&l, 0.05, 2).unwrap();
    assert_eq!(d.buckets, 11);
    assert_eq!(d.nonempty_buckets, 2);
    let mut seen: Vec<usize> = d.pieces.iter().map(|p| p.bucket).collect();
    seen.dedup();
    assert_eq!(seen, vec![0, 10]);
}

#[test]
fn round_limit_reports_nontermination() {
    let l = generators::bidirected_path(12);
    let cfg = DecompositionConfig { phi_target: Some(0.9), max_rounds: Some(1), ..Default::default() };
    assert!(matches!(
        find_decomposition_with(&l, &cfg, 0),
        Err(dirlap_core::Error::NonterminatingDecomposition { rounds: 1 })
    ));
}

fn check_contract(l: &DirectedLaplacian, d: &Decomposition, brute: bool) -> Result<(), TestCaseError> {
    let n = l.n();
    let back = d.reassemble(n).unwrap();
    let scale = l.adjacency().weight_range().map_or(1.0, |r| r.1);
    for (i, j, w) in l.adjacency().iter() {
        prop_assert!((back.adjacency().get(i, j) - w).abs() <= 1e-12 * scale);
    }
    prop_assert_eq!(back.adjacency().nnz(), l.adjacency().nnz());
    let mut sum_cover = Dense::zeros(n, n);
    for p in &d.pieces {
        let s = p.laplacian.graph_symmetrization();
        for &v in &p.vertices {
            prop_assert!(s.out_degrees()[v] <= p.cover.out_degrees()[v] * (1.0 + 1e-12));
        }
        let cover = laplacian(&p.cover).unwrap();
        if p.vertices.len() <= 60 {
            prop_assert!(spectral_gap(&cover) >= d.alpha, "gap below alpha");
        }
        if brute && p.vertices.len() <= 12 && p.vertices.len() >= 2 {
            let phi = brute_force_phi(p.cover.adjacency(), &p.vertices);
            prop_assert!(phi >= d.phi_target, "piece phi {} < target {}", phi, d.phi_target);
        }
        sum_cover += cover;
    }
    if l.is_eulerian() {
        let ul = sym_part(&laplacian(l).unwrap());
        prop_assert!(psd_leq(&sum_cover, &(ul * d.beta)));
    }
    for bucket in &d.progress {
        for &f in bucket {
            prop_assert!(f >= 0.25, "round certified only {}", f);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn contract_default_target(n in 3usize..40, extra in 0usize..40, seed in any::<u64>()) {
        let l = generators::random_eulerian(n, extra, 6, 0.1, 50.0, seed);
        let d = find_decomposition_with(&l, &DecompositionConfig::default(), seed).unwrap();
        check_contract(&l, &d, false)?;
    }

    #[test]
    fn contract_high_target_small_n(n in 3usize..12, extra in 0usize..12, seed in any::<u64>()) {
        let l = generators::random_eulerian(n, extra, 4, 1.0, 1.5, seed);
        let d = find_decomposition(&l, 0.15, seed).unwrap();
        check_contract(&l, &d, true)?;
    }

    #[test]
    fn contract_non_eulerian(n in 3usize..20, seed in any::<u64>()) {
        let l = generators::random_strongly_connected(n, 0.2, 0.5, 4.0, seed);
        let d = find_decomposition_with(&l, &DecompositionConfig::default(), seed).unwrap();
        check_contract(&l, &d, false)?;
    }
}

#[test]
fn dense_cover_matches_symmetrization_for_eulerian() {
    let l = generators::random_eulerian(25, 30, 5, 0.5, 3.0, 77);
    let d = find_decomposition_with(&l, &DecompositionConfig::default(), 77).unwrap();
    let mut sum = Dense::zeros(25, 25);
    for p in &d.pieces {
        sum += laplacian(&p.cover).unwrap();
    }
    let ul = to_dense(&l.symmetrization()).unwrap();
    assert!((sum - ul).norm() < 1e-12);
}
