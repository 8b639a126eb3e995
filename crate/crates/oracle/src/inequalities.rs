//! Randomized checks of the dense matrix inequalities the spectral
//! arguments rest on. Each check draws one instance with `n ≤ 30` and
//! returns a description of the first violated inequality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{
    generators, harmonic_symmetrization, laplacian, lambda_star, pinv_sqrt, psd_leq, psd_sqrt, spectral_norm,
    sym_part, to_dense, u_operator_norm, Dense,
};

pub type Check = fn(&mut ChaCha8Rng) -> Result<(), String>;

/// The seven checks with stable names.
pub const SUITE: [(&str, Check); 7] = [
    ("perturbed_gram_bounds", perturbed_gram_bounds),
    ("diagonal_scaling_norm_bound", diagonal_scaling_norm_bound),
    ("squaring_symmetrization_bounds", squaring_symmetrization_bounds),
    ("lazy_square_sandwich", lazy_square_sandwich),
    ("lazy_square_gap_improvement", lazy_square_gap_improvement),
    ("harmonic_dominates_symmetrization", harmonic_dominates_symmetrization),
    ("psd_order_norm_monotone", psd_order_norm_monotone),
];

/// Runs `trials` independent instances of `check`, each from its own seed.
pub fn run_trials(check: Check, trials: usize, seed: u64) -> Result<(), String> {
    for t in 0..trials {
        let s = dirlap_core::seed::child_seed(seed, t as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        check(&mut rng).map_err(|e| format!("trial {t} (seed {s}): {e}"))?;
    }
    Ok(())
}

const NORM_SLACK: f64 = 1e-10;

/// `A ⪯ B` with tolerance `1e−8 · max(1, ‖A‖, ‖B‖)`, for comparisons whose
/// sides contain the identity.
fn psd_leq_unit(a: &Dense, b: &Dense) -> bool {
    let scale = spectral_norm(a).max(spectral_norm(b)).max(1.0);
    crate::sym_eigen(&(b - a)).0[0] >= -1e-8 * scale
}

fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + NORM_SLACK) + 1e-12
}

fn random_dense(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Dense {
    Dense::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn eulerian(rng: &mut ChaCha8Rng, n: usize) -> dirlap_core::DirectedLaplacian {
    let extra = rng.random_range(0..=2 * n);
    generators::random_eulerian(n, extra, 6, 0.1, 10.0, rng.random())
}

/// `D^{-1/2} Aᵀ D^{-1/2}` of a random Eulerian graph.
fn eulerian_walk(rng: &mut ChaCha8Rng, n: usize) -> Dense {
    let l = eulerian(rng, n);
    to_dense(l.normalize().expect("positive degrees").walk()).expect("under cap")
}

/// A matrix with `‖M‖₂ ≤ 1`: half scaled random, half Eulerian walks.
fn contraction(rng: &mut ChaCha8Rng, n: usize) -> Dense {
    if rng.random_bool(0.5) {
        let m = random_dense(rng, n, n);
        let s = if rng.random_bool(0.3) { 1.0 } else { rng.random_range(0.3..1.0) };
        &m * (s / spectral_norm(&m))
    } else {
        eulerian_walk(rng, n)
    }
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> Dense {
    let k = rng.random_range(1..=n);
    let g = random_dense(rng, n, k);
    &g * g.transpose()
}

fn inf_norm(m: &Dense) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn one_norm(m: &Dense) -> f64 {
    inf_norm(&m.transpose())
}

fn diag(v: &[f64]) -> Dense {
    Dense::from_diagonal(&crate::DVec::from_column_slice(v))
}

/// For `‖A − B‖₂ ≤ ε` and `c > 0`:
/// `(1−c)BᵀB − ε²/c·I ⪯ AᵀA ⪯ (1+c)BᵀB + (1+1/c)ε²I`.
pub fn perturbed_gram_bounds(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=30);
    let b = random_dense(rng, n, n);
    let e = random_dense(rng, n, n);
    let eps = rng.random_range(0.01..2.0);
    let a = &b + &e * (eps * rng.random_range(0.1..1.0) / spectral_norm(&e));
    let eps = spectral_norm(&(&a - &b));
    let c = rng.random_range(0.05..4.0);
    let id = Dense::identity(n, n);
    let ata = a.transpose() * &a;
    let btb = b.transpose() * &b;
    let lower = &btb * (1.0 - c) - &id * (eps * eps / c);
    let upper = &btb * (1.0 + c) + &id * ((1.0 + 1.0 / c) * eps * eps);
    if !psd_leq_unit(&lower, &ata) {
        return Err(format!("lower bound fails at n = {n}, c = {c}, eps = {eps}"));
    }
    if !psd_leq_unit(&ata, &upper) {
        return Err(format!("upper bound fails at n = {n}, c = {c}, eps = {eps}"));
    }
    Ok(())
}

/// For nonnegative diagonals `A`, `B` and `α, β ∈ [0, 1]`:
/// `‖AMB‖₂² ≤ ‖A^{2α}MB^{2β}‖∞ · ‖A^{2(1−α)}MB^{2(1−β)}‖₁`, and
/// `‖D₁^{-1/2}MD₂^{-1/2}‖₂ ≤ max{‖D₁⁻¹M‖∞, ‖D₂⁻¹Mᵀ‖∞}` for positive diagonals.
pub fn diagonal_scaling_norm_bound(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let r = rng.random_range(1..=30);
    let c = rng.random_range(1..=30);
    let m = if rng.random_bool(0.5) {
        random_dense(rng, r, c).map(f64::abs)
    } else {
        random_dense(rng, r, c)
    };
    let a: Vec<f64> = (0..r).map(|_| rng.random_range(0.0..3.0)).collect();
    let b: Vec<f64> = (0..c).map(|_| rng.random_range(0.0..3.0)).collect();
    let (al, be) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
    let pw = |v: &[f64], p: f64| diag(&v.iter().map(|x| if p == 0.0 { 1.0 } else { x.powf(p) }).collect::<Vec<_>>());
    let lhs = spectral_norm(&(diag(&a) * &m * diag(&b)));
    let rhs = (inf_norm(&(pw(&a, 2.0 * al) * &m * pw(&b, 2.0 * be)))
        * one_norm(&(pw(&a, 2.0 * (1.0 - al)) * &m * pw(&b, 2.0 * (1.0 - be)))))
    .sqrt();
    if !le(lhs, rhs) {
        return Err(format!("weighted bound {lhs} > {rhs} at α = {al}, β = {be}"));
    }
    let d1: Vec<f64> = (0..r).map(|_| rng.random_range(0.1..3.0)).collect();
    let d2: Vec<f64> = (0..c).map(|_| rng.random_range(0.1..3.0)).collect();
    let inv = |v: &[f64], p: f64| diag(&v.iter().map(|x| x.powf(-p)).collect::<Vec<_>>());
    let lhs = spectral_norm(&(inv(&d1, 0.5) * &m * inv(&d2, 0.5)));
    let rhs = inf_norm(&(inv(&d1, 1.0) * &m)).max(inf_norm(&(inv(&d2, 1.0) * m.transpose())));
    if !le(lhs, rhs) {
        return Err(format!("degree bound {lhs} > {rhs}"));
    }
    Ok(())
}

/// For `‖M‖₂ ≤ 1`: symmetric `M` gives `0 ⪯ I − M² ⪯ 2(I − M)`, and any `M`
/// gives `0 ⪯ I − U_{M²} ⪯ 2(I − U_M²) ⪯ 4(I − U_M)`.
pub fn squaring_symmetrization_bounds(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=30);
    let id = Dense::identity(n, n);
    let zero = Dense::zeros(n, n);
    let s = sym_part(&contraction(rng, n));
    let s = &s * (1.0 / spectral_norm(&s).max(1.0));
    let a = &id - &s * &s;
    if !psd_leq_unit(&zero, &a) || !psd_leq_unit(&a, &((&id - &s) * 2.0)) {
        return Err(format!("symmetric squaring bound fails at n = {n}"));
    }
    let m = contraction(rng, n);
    let u = sym_part(&m);
    let a = &id - sym_part(&(&m * &m));
    let b = (&id - &u * &u) * 2.0;
    let c = (&id - &u) * 4.0;
    if !psd_leq_unit(&zero, &a) {
        return Err(format!("I − U_(M²) is not PSD at n = {n}"));
    }
    if !psd_leq_unit(&a, &b) || !psd_leq_unit(&b, &c) {
        return Err(format!("asymmetric squaring chain fails at n = {n}"));
    }
    Ok(())
}

/// For `‖M‖₂ ≤ 1`, `N = αI + (1−α)M` and `L_i = I − U_{N^i}`:
/// `2αL₁ ⪯ L₂ ⪯ (4 − 2α)L₁`, here at `α = 1/4`.
pub fn lazy_square_sandwich(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=30);
    let alpha = 0.25;
    let id = Dense::identity(n, n);
    let m = contraction(rng, n);
    let nn = &id * alpha + &m * (1.0 - alpha);
    let l1 = &id - sym_part(&nn);
    let l2 = &id - sym_part(&(&nn * &nn));
    if !psd_leq_unit(&(&l1 * (2.0 * alpha)), &l2) {
        return Err(format!("lower sandwich fails at n = {n}"));
    }
    if !psd_leq_unit(&l2, &(&l1 * (4.0 - 2.0 * alpha))) {
        return Err(format!("upper sandwich fails at n = {n}"));
    }
    Ok(())
}

/// For `‖M‖₂ ≤ 1` with `ker M = ker Mᵀ`, `α ∈ (0, 1/4]` and
/// `N = αI + (1−α)M`: `λ*(I − U_{N²}) ≥ min{α, (1+α)λ*(I − U_M)}`.
pub fn lazy_square_gap_improvement(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=30);
    let id = Dense::identity(n, n);
    let m = match rng.random_range(0..3) {
        0 => {
            let g = random_dense(rng, n, n);
            &g * (rng.random_range(0.5..=1.0) / spectral_norm(&g))
        }
        1 => {
            // Symmetric walk of an undirected graph: kernels agree.
            let w = eulerian_walk(rng, n);
            sym_part(&w)
        }
        _ => {
            let w = eulerian_walk(rng, n);
            let smin = *crate::singular_values(&w).last().expect("n ≥ 2");
            if smin < 1e-8 {
                sym_part(&w)
            } else {
                w
            }
        }
    };
    let alpha = rng.random_range(1e-3..=0.25);
    let nn = &id * alpha + &m * (1.0 - alpha);
    let before = lambda_star(&(&id - sym_part(&m)));
    let after = lambda_star(&(&id - sym_part(&(&nn * &nn))));
    let bound = alpha.min((1.0 + alpha) * before);
    if after < bound * (1.0 - 1e-8) - 1e-12 {
        return Err(format!("λ* after {after} < bound {bound} (before {before}, α = {alpha}, n = {n})"));
    }
    Ok(())
}

/// For an Eulerian Laplacian `L`: `U_L ⪯ Lᵀ U_L† L`, and every `A` with the
/// kernels of `L` has `‖A‖_{U→U} ≤ ‖U^{†/2} L A U^{†/2}‖₂`.
pub fn harmonic_dominates_symmetrization(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=30);
    let l = laplacian(&eulerian(rng, n)).expect("under cap");
    let u = sym_part(&l);
    let h = harmonic_symmetrization(&l).expect("under cap");
    if !psd_leq(&u, &h) {
        return Err(format!("U_L ⋠ LᵀU_L†L at n = {n}"));
    }
    let proj = Dense::identity(n, n) - Dense::from_element(n, n, 1.0 / n as f64);
    let a = &proj * random_dense(rng, n, n) * &proj;
    let lhs = u_operator_norm(&a, &u);
    let ph = pinv_sqrt(&u);
    let rhs = spectral_norm(&(&ph * &l * &a * &ph));
    if !le(lhs, rhs) {
        return Err(format!("operator norm {lhs} > {rhs} at n = {n}"));
    }
    Ok(())
}

/// For PSD `A ⪯ B`: `‖A^{1/2}M‖₂ ≤ ‖B^{1/2}M‖₂` and `‖MA^{1/2}‖₂ ≤ ‖MB^{1/2}‖₂`.
pub fn psd_order_norm_monotone(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(1..=30);
    let a = random_psd(rng, n);
    let b = &a + random_psd(rng, n) * rng.random_range(0.0..1.0);
    let m = random_dense(rng, n, n);
    let (sa, sb) = (psd_sqrt(&a), psd_sqrt(&b));
    let (l1, r1) = (spectral_norm(&(&sa * &m)), spectral_norm(&(&sb * &m)));
    let (l2, r2) = (spectral_norm(&(&m * &sa)), spectral_norm(&(&m * &sb)));
    if !le(l1, r1) || !le(l2, r2) {
        return Err(format!("monotonicity fails at n = {n}: {l1} vs {r1}, {l2} vs {r2}"));
    }
    Ok(())
}
