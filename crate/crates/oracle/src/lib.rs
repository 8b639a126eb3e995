//! Dense reference computations.
//!
//! Everything here is `O(n³)` and exists to certify the sparse, randomized
//! code paths at desk scale: pseudoinverses, spectral norms, generalized
//! eigenvalues, the asymmetric approximation norm and exact stationary
//! distributions. Nothing in this crate sits on a production solve path.

pub mod generators;
pub mod inequalities;

use std::sync::atomic::{AtomicUsize, Ordering};

use dirlap_core::connectivity::is_strongly_connected;
use dirlap_core::{DirectedLaplacian, Error, EulerianSolver, Result, SparseGraph};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Dense = DMatrix<f64>;
pub type DVec = DVector<f64>;

/// Largest dimension the oracle accepts by default.
pub const DIMENSION_CAP: usize = 600;

/// Relative eigenvalue cutoff separating kernel from image.
pub const KERNEL_CUTOFF: f64 = 1e-10;

static DENSE_ALLOCATIONS: AtomicUsize = AtomicUsize::new(0);

/// Number of dense matrices materialized from sparse inputs so far.
pub fn dense_allocations() -> usize {
    DENSE_ALLOCATIONS.load(Ordering::Relaxed)
}

fn check_cap(n: usize) -> Result<()> {
    if n > DIMENSION_CAP {
        Err(Error::DimensionCap { n, cap: DIMENSION_CAP })
    } else {
        Ok(())
    }
}

pub fn to_dense(g: &SparseGraph) -> Result<Dense> {
    check_cap(g.n())?;
    DENSE_ALLOCATIONS.fetch_add(1, Ordering::Relaxed);
    let mut m = Dense::zeros(g.n(), g.n());
    for (i, j, w) in g.iter() {
        m[(i, j)] += w;
    }
    Ok(m)
}

/// The matrix `D − Aᵀ`.
pub fn laplacian(l: &DirectedLaplacian) -> Result<Dense> {
    to_dense(&l.to_matrix())
}

pub fn sym_part(m: &Dense) -> Dense {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues ascending with matching eigenvector columns.
pub fn sym_eigen(m: &Dense) -> (Vec<f64>, Dense) {
    let n = m.nrows();
    let e = SymmetricEigen::new(sym_part(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vecs = Dense::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &e.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// `[[0, M], [Mᵀ, 0]]`, whose eigenpairs are `±σ_k` with vectors
/// `(u_k, ±v_k)/√2`. Its symmetric eigensolver is used in place of the
/// bidiagonal SVD, which returns wrong singular vectors on some
/// rank-deficient inputs.
fn jordan_wielandt(m: &Dense) -> (Vec<f64>, Dense) {
    let (r, c) = m.shape();
    let mut j = Dense::zeros(r + c, r + c);
    j.view_mut((0, r), (r, c)).copy_from(m);
    j.view_mut((r, 0), (c, r)).copy_from(&m.transpose());
    sym_eigen(&j)
}

/// Singular values in descending order.
pub fn singular_values(m: &Dense) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    let (vals, _) = jordan_wielandt(m);
    vals.iter().rev().take(k).map(|v| v.max(0.0)).collect()
}

pub fn spectral_norm(m: &Dense) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    singular_values(m)[0]
}

/// Moore–Penrose pseudoinverse with relative cutoff `1e−12 · σ_max`.
pub fn dense_pinv(m: &Dense) -> Result<Dense> {
    let (r, c) = m.shape();
    check_cap(r.max(c))?;
    let mut out = Dense::zeros(c, r);
    if r == 0 || c == 0 {
        return Ok(out);
    }
    let (vals, vecs) = jordan_wielandt(m);
    let cut = 1e-12 * vals[vals.len() - 1].max(0.0);
    for (k, &s) in vals.iter().enumerate() {
        if s > cut {
            let u = vecs.view((0, k), (r, 1));
            let v = vecs.view((r, k), (c, 1));
            out += (v * u.transpose()) * (2.0 / s);
        }
    }
    Ok(out)
}

/// Image/kernel split of a symmetric PSD matrix.
pub struct PsdSplit {
    pub values: Vec<f64>,
    pub image: Dense,
    pub kernel: Dense,
    pub min_eig: f64,
    pub max_eig: f64,
}

pub fn psd_split(u: &Dense) -> PsdSplit {
    let (vals, vecs) = sym_eigen(u);
    let n = vals.len();
    let max_abs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = KERNEL_CUTOFF * max_abs.max(f64::MIN_POSITIVE);
    let img: Vec<usize> = (0..n).filter(|&i| vals[i] > cut).collect();
    let ker: Vec<usize> = (0..n).filter(|&i| vals[i] <= cut).collect();
    let pick = |ix: &[usize]| {
        let mut m = Dense::zeros(n, ix.len());
        for (k, &i) in ix.iter().enumerate() {
            m.set_column(k, &vecs.column(i));
        }
        m
    };
    PsdSplit {
        values: img.iter().map(|&i| vals[i]).collect(),
        image: pick(&img),
        kernel: pick(&ker),
        min_eig: vals.first().copied().unwrap_or(0.0),
        max_eig: vals.last().copied().unwrap_or(0.0),
    }
}

/// `U^{†/2}`.
pub fn pinv_sqrt(u: &Dense) -> Dense {
    let s = psd_split(u);
    let mut scaled = s.image.clone();
    for (k, v) in s.values.iter().enumerate() {
        let mut c = scaled.column_mut(k);
        c /= v.sqrt();
    }
    &scaled * s.image.transpose()
}

/// `U^{1/2}` of a PSD matrix.
pub fn psd_sqrt(u: &Dense) -> Dense {
    let s = psd_split(u);
    let mut scaled = s.image.clone();
    for (k, v) in s.values.iter().enumerate() {
        let mut c = scaled.column_mut(k);
        c *= v.sqrt();
    }
    &scaled * s.image.transpose()
}

/// Both evaluations of the asymmetric approximation norm.
#[derive(Clone, Copy, Debug)]
pub struct ApproxNorm {
    /// `‖U_A^{†/2}(Ã − A)U_A^{†/2}‖₂`, or `+∞` on kernel violation.
    pub norm: f64,
    /// `max xᵀ(Ã−A)y / √(xᵀUx · yᵀUy)` evaluated through a Cholesky basis.
    pub rayleigh: f64,
    pub kernel_violation: bool,
}

/// `‖U_A^{†/2}(Ã − A)U_A^{†/2}‖₂` for square matrices `A`, `Ã`.
pub fn approx_norm(a: &Dense, atil: &Dense) -> Result<ApproxNorm> {
    relative_norm(&sym_part(a), &(atil - a), spectral_norm(a))
}

/// `‖U^{†/2} Δ U^{†/2}‖₂` for a symmetric PSD `U`, with both evaluations.
/// `reference` sets the scale of the kernel test `‖Δ K‖ ≤ 1e−9 · max(‖Δ‖, reference)`.
pub fn relative_norm(u: &Dense, delta: &Dense, reference: f64) -> Result<ApproxNorm> {
    check_cap(u.nrows())?;
    let split = psd_split(u);
    let scale = split.max_eig.abs().max(f64::MIN_POSITIVE);
    if split.min_eig < -1e-10 * scale {
        return Err(Error::NotPsdSymmetrization(split.min_eig));
    }
    let dnorm = spectral_norm(delta);
    if dnorm == 0.0 {
        return Ok(ApproxNorm { norm: 0.0, rayleigh: 0.0, kernel_violation: false });
    }
    if split.kernel.ncols() > 0 {
        let ref_norm = dnorm.max(reference);
        let right = spectral_norm(&(delta * &split.kernel));
        let left = spectral_norm(&(delta.transpose() * &split.kernel));
        if right.max(left) > 1e-9 * ref_norm {
            return Ok(ApproxNorm { norm: f64::INFINITY, rayleigh: f64::INFINITY, kernel_violation: true });
        }
    }
    let v = &split.image;
    let mut inv_sqrt = Dense::zeros(v.ncols(), v.ncols());
    for (k, val) in split.values.iter().enumerate() {
        inv_sqrt[(k, k)] = 1.0 / val.sqrt();
    }
    let core = v.transpose() * delta * v;
    let norm = spectral_norm(&(&inv_sqrt * &core * &inv_sqrt));
    let gram = v.transpose() * u * v;
    let rayleigh = match nalgebra::Cholesky::new(sym_part(&gram)) {
        Some(ch) => {
            let l = ch.l();
            let linv = l.clone().try_inverse().unwrap_or_else(|| Dense::zeros(l.nrows(), l.ncols()));
            spectral_norm(&(&linv * &core * linv.transpose()))
        }
        None => norm,
    };
    Ok(ApproxNorm { norm, rayleigh, kernel_violation: false })
}

/// Approximation norm of Laplacians `L̃` against `L`.
pub fn approx_norm_laplacians(l: &DirectedLaplacian, ltil: &DirectedLaplacian) -> Result<f64> {
    Ok(approx_norm(&laplacian(l)?, &laplacian(ltil)?)?.norm)
}

/// Extreme eigenvalues of `B^{†/2} A B^{†/2}` on the image of `B`.
pub fn generalized_eigs(a: &Dense, b: &Dense) -> Result<(f64, f64)> {
    check_cap(a.nrows())?;
    let a = sym_part(a);
    let split = psd_split(b);
    if split.kernel.ncols() > 0 {
        let anorm = spectral_norm(&a).max(f64::MIN_POSITIVE);
        let r = spectral_norm(&(&a * &split.kernel));
        if r > 1e-8 * anorm {
            return Err(Error::KernelMismatch(r / anorm));
        }
    }
    let v = &split.image;
    if v.ncols() == 0 {
        return Ok((0.0, 0.0));
    }
    let mut inv_sqrt = Dense::zeros(v.ncols(), v.ncols());
    for (k, val) in split.values.iter().enumerate() {
        inv_sqrt[(k, k)] = 1.0 / val.sqrt();
    }
    let c = &inv_sqrt * (v.transpose() * &a * v) * &inv_sqrt;
    let (vals, _) = sym_eigen(&c);
    Ok((vals[0], *vals.last().expect("nonempty")))
}

/// `A ⪯ B` up to `−1e−8 · max(‖A‖, ‖B‖)`.
pub fn psd_leq(a: &Dense, b: &Dense) -> bool {
    psd_leq_margin(a, b) >= 0.0
}

/// Smallest eigenvalue of `B − A` plus the tolerance; nonnegative means `A ⪯ B`.
pub fn psd_leq_margin(a: &Dense, b: &Dense) -> f64 {
    let scale = spectral_norm(&sym_part(a)).max(spectral_norm(&sym_part(b)));
    let (vals, _) = sym_eigen(&(b - a));
    vals[0] + 1e-8 * scale
}

/// Smallest nonzero eigenvalue of a symmetric PSD matrix.
pub fn lambda_star(u: &Dense) -> f64 {
    psd_split(u).values.first().copied().unwrap_or(0.0)
}

/// Spectral gap of an undirected Laplacian: `λ₂(D^{-1/2} U D^{-1/2})`
/// over the vertices in its support.
pub fn spectral_gap(u: &Dense) -> f64 {
    let support: Vec<usize> = (0..u.nrows()).filter(|&i| u[(i, i)] > 0.0).collect();
    if support.len() < 2 {
        return f64::INFINITY;
    }
    let k = support.len();
    let mut m = Dense::zeros(k, k);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            m[(a, b)] = u[(i, j)] / (u[(i, i)] * u[(j, j)]).sqrt();
        }
    }
    let (vals, _) = sym_eigen(&m);
    vals[1]
}

/// `‖x‖_U = √(xᵀUx)`.
pub fn u_norm(x: &[f64], u: &Dense) -> f64 {
    let v = DVector::from_column_slice(x);
    (v.dot(&(u * &v))).max(0.0).sqrt()
}

/// `xᵀ U_L x` summed edge by edge as `Σ ½A_ij (x_i − x_j)²`, which stays
/// accurate when edge weights span many orders of magnitude.
pub fn edge_energy(l: &DirectedLaplacian, x: &[f64]) -> f64 {
    l.adjacency().iter().map(|(i, j, w)| 0.5 * w * (x[i] - x[j]) * (x[i] - x[j])).sum()
}

/// Potential drops `x_i − x_{i+1}` of `x = L†b` for the bidirected path
/// (`cycle = false`, `n − 1` weights) or cycle (`n` weights) whose edge
/// `{i, i+1}` has weight `weights[i]`, computed from edge flows.
pub fn bidirected_potential_drops(weights: &[f64], b: &[f64], cycle: bool) -> Vec<f64> {
    let mut flow = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for i in 0..weights.len() {
        acc += b[i];
        flow.push(acc);
    }
    if cycle {
        let num: f64 = flow.iter().zip(weights).map(|(f, w)| f / w).sum();
        let den: f64 = weights.iter().map(|w| 1.0 / w).sum();
        let c = -num / den;
        flow.iter_mut().for_each(|f| *f += c);
    }
    flow.iter().zip(weights).map(|(f, w)| f / w).collect()
}

/// `‖x − L†b‖_{U_L} / ‖L†b‖_{U_L}` for the bidirected path or cycle of
/// [`bidirected_potential_drops`], summed edge by edge.
pub fn drop_error(weights: &[f64], drops: &[f64], x: &[f64], cycle: bool) -> f64 {
    let n = x.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (&w, &d)) in weights.iter().zip(drops).enumerate() {
        let j = if cycle { (i + 1) % n } else { i + 1 };
        let e = x[i] - x[j] - d;
        num += w * e * e;
        den += w * d * d;
    }
    (num / den).sqrt()
}

/// Operator norm `‖M‖_{U→U} = ‖U^{1/2} M U^{†/2}‖₂`.
pub fn u_operator_norm(m: &Dense, u: &Dense) -> f64 {
    spectral_norm(&(psd_sqrt(u) * m * pinv_sqrt(u)))
}

/// The harmonic symmetrization `Lᵀ U_L† L` of a square matrix `L`.
pub fn harmonic_symmetrization(l: &Dense) -> Result<Dense> {
    let upinv = dense_pinv(&sym_part(l))?;
    Ok(sym_part(&(l.transpose() * upinv * l)))
}

/// Orthogonal projector onto the image of a symmetric PSD matrix.
pub fn image_projector(u: &Dense) -> Dense {
    let s = psd_split(u);
    &s.image * s.image.transpose()
}

/// Stationary distribution of the random walk of `L` via a bordered
/// dense solve of `L x = 0`, `Σ d_i x_i = 1`.
pub fn exact_stationary(l: &DirectedLaplacian) -> Result<Vec<f64>> {
    let n = l.n();
    check_cap(n)?;
    if !is_strongly_connected(l.adjacency()) {
        return Err(Error::NotStronglyConnected);
    }
    let mut m = laplacian(l)?;
    let d = l.out_degrees();
    for j in 0..n {
        m[(n - 1, j)] = d[j];
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InnerSolverFailure("singular stationary system".into()))?;
    let mut pi: Vec<f64> = (0..n).map(|i| d[i] * x[i]).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= s);
    Ok(pi)
}

/// `L† b` for a matrix whose left and right kernels are `span(1)`, through
/// the nonsingular bordered system `[[L, 1], [1ᵀ, 0]]`.
pub fn solve_bordered(l: &Dense, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.nrows();
    let mut m = Dense::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(l);
    for i in 0..n {
        m[(i, n)] = 1.0;
        m[(n, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    for i in 0..n {
        rhs[i] = b[i];
    }
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InnerSolverFailure("singular bordered system".into()))?;
    Ok((0..n).map(|i| x[i]).collect())
}

/// Exact dense Eulerian solver, a reference implementation of the solver
/// handle used by the reductions.
#[derive(Clone, Copy, Debug, Default)]
pub struct DenseEulerianSolver;

impl EulerianSolver for DenseEulerianSolver {
    fn solve(&self, l: &DirectedLaplacian, b: &[f64], _eps: f64) -> Result<Vec<f64>> {
        if b.len() != l.n() {
            return Err(Error::DimensionMismatch { expected: l.n(), got: b.len() });
        }
        let mut b = b.to_vec();
        dirlap_core::vector::center(&mut b);
        solve_bordered(&laplacian(l)?, &b)
    }

    fn name(&self) -> &'static str {
        "dense"
    }
}

/// `D − W D^{-1} W` for `D = diag(W1)`, formed densely.
pub fn dense_square_laplacian(w: &SparseGraph) -> Result<Dense> {
    let wd = to_dense(w)?;
    let d: Vec<f64> = w.row_sums();
    let n = w.n();
    let mut dinv = Dense::zeros(n, n);
    let mut dm = Dense::zeros(n, n);
    for i in 0..n {
        dinv[(i, i)] = if d[i] > 0.0 { 1.0 / d[i] } else { 0.0 };
        dm[(i, i)] = d[i];
    }
    Ok(dm - &wd * dinv * &wd)
}

pub fn mat_vec(m: &Dense, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).iter().copied().collect()
}
