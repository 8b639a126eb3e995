use dirlap_core::{DirectedLaplacian, Error, Kind, SparseGraph};
use dirlap_oracle::inequalities::{run_trials, SUITE};
use dirlap_oracle::*;
use proptest::prelude::*;

fn graph(n: usize, edges: Vec<(usize, usize, f64)>) -> DirectedLaplacian {
    DirectedLaplacian::validate(SparseGraph::from_triplets(n, Kind::Adjacency, edges).unwrap()).unwrap()
}

fn directed_cycle(n: usize) -> DirectedLaplacian {
    generators::cycle(n)
}

/// Undirected cycle with half weights, so its symmetrization equals the
/// directed cycle's.
fn half_undirected_cycle(n: usize) -> DirectedLaplacian {
    let mut e = Vec::new();
    for i in 0..n {
        e.push((i, (i + 1) % n, 0.5));
        e.push(((i + 1) % n, i, 0.5));
    }
    graph(n, e)
}

#[test]
fn inequality_suite_two_hundred_trials() {
    for (k, (name, check)) in SUITE.iter().enumerate() {
        if let Err(e) = run_trials(*check, 200, 1000 + k as u64) {
            panic!("{name}: {e}");
        }
    }
}

#[test]
fn pinv_projector_identity_on_c3() {
    let l = laplacian(&directed_cycle(3)).unwrap();
    let p = dense_pinv(&l).unwrap() * &l;
    let want = Dense::identity(3, 3) - Dense::from_element(3, 3, 1.0 / 3.0);
    assert!((p - want).abs().max() <= 1e-12);
}

fn assert_penrose(m: &Dense, tol: f64) {
    let p = dense_pinv(m).unwrap();
    let scale = spectral_norm(m);
    assert!((m * &p * m - m).abs().max() <= tol * scale, "M M⁺ M ≠ M");
    assert!((&p * m * &p - &p).abs().max() <= tol * spectral_norm(&p), "M⁺ M M⁺ ≠ M⁺");
    let mp = m * &p;
    let pm = &p * m;
    assert!((&mp - mp.transpose()).abs().max() <= tol && (&pm - pm.transpose()).abs().max() <= tol);
}

#[test]
fn pinv_of_rank_deficient_three_vertex_laplacian() {
    // The bidiagonal SVD returns wrong singular vectors on this matrix.
    let l = generators::random_eulerian(3, 41, 6, 0.5, 2.0, 143);
    assert_penrose(&laplacian(&l).unwrap(), 1e-12);
}

#[test]
fn pinv_of_rectangular_and_empty() {
    let m = Dense::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
    assert_penrose(&m, 1e-12);
    assert_eq!(dense_pinv(&Dense::zeros(0, 0)).unwrap().shape(), (0, 0));
    let sv = singular_values(&Dense::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -4.0]));
    assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
}

#[test]
fn pinv_respects_dimension_cap() {
    let m = Dense::zeros(DIMENSION_CAP + 1, DIMENSION_CAP + 1);
    assert!(matches!(dense_pinv(&m), Err(Error::DimensionCap { .. })));
}

#[test]
fn directed_vs_undirected_cycle_is_cot_pi_over_n() {
    // Both are circulant: on frequency θ the skew part gives sin θ against
    // 1 − cos θ, so the norm is cot(π/n) ≈ n/π.
    for n in [4usize, 8, 16, 32] {
        let v = approx_norm_laplacians(&half_undirected_cycle(n), &directed_cycle(n)).unwrap();
        let want = 1.0 / (std::f64::consts::PI / n as f64).tan();
        assert!((v - want).abs() <= 1e-9 * want, "n = {n}: {v} vs {want}");
    }
}

#[test]
#[ignore = "the norm is exactly cot(π/n), which grows linearly; only its square, the preconditioning loss, grows like n²"]
fn directed_vs_undirected_cycle_grows_quadratically() {
    let vals: Vec<f64> = [4usize, 8, 16]
        .iter()
        .map(|&n| approx_norm_laplacians(&half_undirected_cycle(n), &directed_cycle(n)).unwrap())
        .collect();
    for w in vals.windows(2) {
        let r = w[1] / w[0];
        assert!(r > 3.0 && r < 5.0, "{vals:?}");
    }
}

#[test]
fn approx_norm_forms_agree() {
    for seed in 0..10 {
        let a = generators::random_eulerian(15, 10, 5, 0.5, 2.0, seed);
        let b = generators::random_eulerian(15, 10, 5, 0.5, 2.0, seed + 100);
        let r = approx_norm(&laplacian(&a).unwrap(), &laplacian(&b).unwrap()).unwrap();
        assert!(!r.kernel_violation);
        assert!((r.norm - r.rayleigh).abs() <= 1e-9 * r.norm.max(1.0), "{} {}", r.norm, r.rayleigh);
    }
}

#[test]
fn approx_norm_rejects_indefinite_symmetrization() {
    let a = Dense::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
    assert!(matches!(approx_norm(&a, &a), Err(Error::NotPsdSymmetrization(_))));
}

#[test]
fn generalized_eigs_kernel_mismatch() {
    let b = laplacian(&generators::cycle(4)).unwrap();
    let b = sym_part(&b);
    let a = Dense::identity(4, 4);
    assert!(matches!(generalized_eigs(&a, &b), Err(Error::KernelMismatch(_))));
}

#[test]
fn stationary_rejects_disconnected_and_cap() {
    let dag = graph(3, vec![(0, 1, 1.0), (1, 2, 1.0)]);
    assert!(matches!(exact_stationary(&dag), Err(Error::NotStronglyConnected)));
    let big = generators::cycle(DIMENSION_CAP + 1);
    assert!(matches!(exact_stationary(&big), Err(Error::DimensionCap { .. })));
}

#[test]
fn star_stationary_matches_power_iteration() {
    let l = generators::star(2);
    let pi = exact_stationary(&l).unwrap();
    let d = l.out_degrees();
    let mut p = vec![1.0, 0.0, 0.0];
    for _ in 0..2000 {
        // Lazy walk to avoid the period-2 oscillation.
        let mut next: Vec<f64> = p.iter().map(|v| 0.5 * v).collect();
        for (i, j, w) in l.adjacency().iter() {
            next[j] += 0.5 * p[i] * w / d[i];
        }
        p = next;
    }
    for i in 0..3 {
        assert!((pi[i] - p[i]).abs() <= 1e-12);
    }
    assert!((pi[0] - 0.5).abs() <= 1e-12 && (pi[1] - 0.25).abs() <= 1e-12);
}

#[test]
fn dense_solver_handle_solves() {
    let l = generators::random_eulerian(12, 6, 4, 0.5, 2.0, 1);
    let mut b: Vec<f64> = (0..12).map(|i| i as f64).collect();
    dirlap_core::vector::center(&mut b);
    let x = dirlap_core::EulerianSolver::solve(&DenseEulerianSolver, &l, &b, 1e-6).unwrap();
    let r = dirlap_core::vector::sub(&l.mul(&x), &b);
    assert!(dirlap_core::vector::norm2(&r) <= 1e-10);
    assert!(x.iter().sum::<f64>().abs() <= 1e-10);
}

#[test]
fn square_laplacian_kernel() {
    let l = generators::random_eulerian(10, 5, 4, 0.5, 2.0, 3);
    let w = l.adjacency().transpose();
    let m = dense_square_laplacian(&w).unwrap();
    let ones = vec![1.0; 10];
    assert!(mat_vec(&m, &ones).iter().all(|v| v.abs() <= 1e-12));
    assert!(mat_vec(&m.transpose(), &ones).iter().all(|v| v.abs() <= 1e-12));
}

#[test]
fn dense_allocations_are_counted() {
    let before = dense_allocations();
    let _ = laplacian(&generators::cycle(5)).unwrap();
    assert!(dense_allocations() > before);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn edge_energy_matches_quadratic_form(n in 2usize..25, seed in 0u64..1000) {
        let l = generators::random_eulerian(n, n, 5, 0.1, 10.0, seed);
        let x: Vec<f64> = (0..n).map(|i| ((i as u64 * 31 + seed) % 17) as f64 - 8.0).collect();
        let u = sym_part(&laplacian(&l).unwrap());
        let dense = u_norm(&x, &u).powi(2);
        prop_assert!((edge_energy(&l, &x) - dense).abs() <= 1e-9 * dense.max(1.0));
    }

    #[test]
    fn bilinear_and_sum_forms_of_the_norm(n in 2usize..20, seed in 0u64..1000) {
        // ‖U^{†/2} Δ U^{†/2}‖ bounds xᵀΔy / √(xᵀUx · yᵀUy) and 2xᵀΔy / (xᵀUx + yᵀUy).
        let a = laplacian(&generators::random_eulerian(n, n, 4, 0.5, 2.0, seed)).unwrap();
        let b = laplacian(&generators::random_eulerian(n, n, 4, 0.5, 2.0, seed + 1)).unwrap();
        let u = sym_part(&a);
        let delta = &b - &a;
        let norm = approx_norm(&a, &b).unwrap().norm;
        let mut x: Vec<f64> = (0..n).map(|i| ((i as u64 * 7 + seed) % 5) as f64 - 2.0).collect();
        let mut y: Vec<f64> = (0..n).map(|i| ((i as u64 * 3 + seed) % 7) as f64 - 3.0).collect();
        dirlap_core::vector::center(&mut x);
        dirlap_core::vector::center(&mut y);
        let (ux, uy) = (u_norm(&x, &u), u_norm(&y, &u));
        prop_assume!(ux > 1e-9 && uy > 1e-9);
        let q: f64 = x.iter().zip(mat_vec(&delta, &y)).map(|(a, b)| a * b).sum();
        prop_assert!(q <= norm * ux * uy * (1.0 + 1e-9));
        prop_assert!(2.0 * q <= norm * (ux * ux + uy * uy) * (1.0 + 1e-9));
    }

    #[test]
    fn pinv_satisfies_penrose_on_laplacians(n in 2usize..30, extra in 0usize..60, seed in 0u64..1000) {
        let l = generators::random_eulerian(n, extra, 6, 0.5, 2.0, seed);
        assert_penrose(&laplacian(&l).unwrap(), 1e-10);
    }

    #[test]
    fn exact_stationary_is_invariant(n in 2usize..30, seed in 0u64..1000) {
        let l = generators::random_strongly_connected(n, 0.2, 0.2, 5.0, seed);
        let pi = exact_stationary(&l).unwrap();
        prop_assert!(pi.iter().all(|&p| p > 0.0));
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let d = l.out_degrees();
        let mut moved = vec![0.0; n];
        for (i, j, w) in l.adjacency().iter() {
            moved[j] += pi[i] * w / d[i];
        }
        for i in 0..n {
            prop_assert!((moved[i] - pi[i]).abs() <= 1e-12);
        }
    }
}
