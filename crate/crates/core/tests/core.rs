use std::io::BufReader;

use dirlap_core::connectivity::is_strongly_connected;
use dirlap_core::io::{read_mtx, read_vector, write_mtx, write_vector};
use dirlap_core::vector::{dot, norm2};
use dirlap_core::{DirectedLaplacian, Kind, SparseGraph};
use proptest::prelude::*;

/// Sum of weighted directed cycles over `n` vertices.
fn eulerian(n: usize, cycles: &[(Vec<usize>, f64)]) -> DirectedLaplacian {
    let mut trip = Vec::new();
    for (verts, w) in cycles {
        let mut c: Vec<usize> = verts.iter().map(|v| v % n).collect();
        c.dedup();
        if c.len() > 1 && c[0] == *c.last().unwrap() {
            c.pop();
        }
        if c.len() < 2 {
            continue;
        }
        for k in 0..c.len() {
            let (a, b) = (c[k], c[(k + 1) % c.len()]);
            if a != b {
                trip.push((a, b, *w));
            }
        }
    }
    DirectedLaplacian::validate(SparseGraph::from_triplets(n, Kind::Adjacency, trip).unwrap()).unwrap()
}

/// A Hamiltonian cycle `0 -> 1 -> … -> 0` plus arbitrary extra edges.
fn strongly_connected(n: usize, extra: &[(usize, usize, f64)]) -> DirectedLaplacian {
    let mut trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    trip.extend(extra.iter().map(|&(a, b, w)| (a % n, b % n, w)).filter(|e| e.0 != e.1));
    DirectedLaplacian::validate(SparseGraph::from_triplets(n, Kind::Adjacency, trip).unwrap()).unwrap()
}

fn cycles() -> impl Strategy<Value = (usize, Vec<(Vec<usize>, f64)>)> {
    (2usize..30).prop_flat_map(|n| {
        (Just(n), prop::collection::vec((prop::collection::vec(0..n, 2..8), 0.01f64..100.0), 1..12))
    })
}

fn extras() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (2usize..30).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n, 0.01f64..100.0), 0..60)))
}

fn quad(m: &SparseGraph, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    m.mul_vec(x, &mut y);
    dot(x, &y)
}

fn energy(l: &DirectedLaplacian, x: &[f64]) -> f64 {
    l.adjacency().iter().map(|(i, j, w)| 0.5 * w * (x[i] - x[j]).powi(2)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn mtx_round_trip_is_identity((n, extra) in extras()) {
        let g = strongly_connected(n, &extra).adjacency().clone();
        let mut buf = Vec::new();
        write_mtx(&g, &mut buf).unwrap();
        let back = read_mtx(BufReader::new(&buf[..]), Kind::Adjacency).unwrap();
        prop_assert_eq!(&back, &g);
        let mut again = Vec::new();
        write_mtx(&back, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn vector_round_trip_is_identity(v in prop::collection::vec(-1e300f64..1e300, 0..50)) {
        let mut buf = Vec::new();
        write_vector(&v, "x", &mut buf).unwrap();
        prop_assert_eq!(read_vector(BufReader::new(&buf[..])).unwrap(), v);
    }

    #[test]
    fn columns_of_laplacian_sum_to_zero((n, extra) in extras()) {
        let l = strongly_connected(n, &extra);
        let m = l.to_matrix();
        let scale = l.out_degrees().iter().cloned().fold(0.0, f64::max);
        for s in m.col_sums() {
            prop_assert!(s.abs() <= 1e-12 * scale);
        }
        let mut y = vec![0.0; n];
        l.apply_t(&vec![1.0; n], &mut y);
        prop_assert!(norm2(&y) <= 1e-12 * scale * (n as f64).sqrt());
    }

    #[test]
    fn eulerian_flag_matches_defect((n, cyc) in cycles(), which in 0usize..100, bump in prop_oneof![Just(0.0), 1e-16f64..1e-14, 1e-3f64..10.0]) {
        let base = eulerian(n, &cyc);
        prop_assume!(base.adjacency().nnz() > 0);
        prop_assert!(base.is_eulerian());
        let k = which % base.adjacency().nnz();
        let trip: Vec<_> = base.adjacency().iter().enumerate()
            .map(|(e, (i, j, w))| (i, j, if e == k { w + bump } else { w }))
            .collect();
        let l = DirectedLaplacian::validate(SparseGraph::from_triplets(n, Kind::Adjacency, trip).unwrap()).unwrap();
        let (_, defect) = l.eulerian_defect();
        prop_assert_eq!(l.is_eulerian(), defect <= l.tol_eul());
        prop_assert_eq!(l.require_eulerian().is_ok(), l.is_eulerian());
    }

    #[test]
    fn symmetrization_is_psd_with_constant_kernel((n, mut cyc) in cycles(), x in prop::collection::vec(-10f64..10.0, 30)) {
        cyc.push(((0..n).collect(), 1.0));
        let l = eulerian(n, &cyc);
        prop_assert!(is_strongly_connected(l.adjacency()));
        let u = l.symmetrization();
        let x = &x[..n];
        let q = quad(&u, x);
        let e = energy(&l, x);
        prop_assert!((q - e).abs() <= 1e-9 * e.max(1.0));
        prop_assert!(q >= -1e-9);
        let mut y = vec![0.0; n];
        u.mul_vec(&vec![1.0; n], &mut y);
        prop_assert!(norm2(&y) <= 1e-10 * l.out_degrees().iter().sum::<f64>());
        // The energy vanishes only on constants: a connected graph with a
        // nonconstant potential has at least one edge with a drop.
        let spread = x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
        if spread > 1e-6 {
            prop_assert!(e > 0.0);
        }
    }

    #[test]
    fn normalized_walk_is_a_contraction_fixing_sqrt_degrees((n, cyc) in cycles()) {
        let l = eulerian(n, &cyc);
        prop_assume!(l.out_degrees().iter().all(|&d| d > 0.0));
        let nw = l.normalize().unwrap();
        let w = nw.walk();
        let s = nw.kernel_vector();
        let mut ws = vec![0.0; n];
        w.mul_vec(&s, &mut ws);
        let mut wts = vec![0.0; n];
        w.mul_vec_t(&s, &mut wts);
        for i in 0..n {
            prop_assert!((ws[i] - s[i]).abs() <= 1e-10 * s[i]);
            prop_assert!((wts[i] - s[i]).abs() <= 1e-10 * s[i]);
        }
        // Power iteration on ŴᵀŴ from a generic start.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 37) % 11) as f64).collect();
        let mut sigma = 0.0;
        for _ in 0..300 {
            let nv = norm2(&v);
            v.iter_mut().for_each(|a| *a /= nv);
            let mut t = vec![0.0; n];
            w.mul_vec(&v, &mut t);
            sigma = norm2(&t);
            let mut u = vec![0.0; n];
            w.mul_vec_t(&t, &mut u);
            v = u;
        }
        prop_assert!(sigma <= 1.0 + 1e-10, "{}", sigma);
        let back = nw.reconstruct();
        let lm = l.to_matrix();
        let diff = back.linear_combination(1.0, &lm, -1.0).unwrap();
        let scale = l.out_degrees().iter().cloned().fold(0.0, f64::max);
        prop_assert!(diff.values().iter().all(|d| d.abs() <= 1e-12 * scale));
    }
}

#[test]
fn mtx_rejects_malformed_input() {
    let bad = [
        "1 1 1\n1 1 1\n",
        "%%MatrixMarket matrix coordinate real symmetric\n2 2 0\n",
        "%%MatrixMarket matrix coordinate real general\n2 3 0\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 x\n",
    ];
    for text in bad {
        assert!(read_mtx(BufReader::new(text.as_bytes()), Kind::Adjacency).is_err(), "{text}");
    }
}

#[test]
fn validation_rejects_self_loops_and_non_finite_weights() {
    let g = SparseGraph::from_triplets(2, Kind::Matrix, vec![(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
    assert!(DirectedLaplacian::validate(g).is_err());
    assert!(SparseGraph::from_triplets(2, Kind::Matrix, vec![(0, 1, f64::INFINITY)]).is_err());
    assert!(SparseGraph::from_triplets(2, Kind::Adjacency, vec![(0, 1, -1.0)]).is_err());
}
