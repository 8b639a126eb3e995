use dirlap_core::vector::norm2;
use dirlap_core::{DirectedLaplacian, Error, EulerianSolver, Kind, Result, SparseGraph};

/// The matrix `(L + G) X` for a directed Laplacian `L`, a nonnegative
/// diagonal `G` and a positive scaling `X`, chosen so that every row and
/// column sum is nonnegative.
#[derive(Clone, Debug)]
pub struct DominantSystem<'a> {
    l: &'a DirectedLaplacian,
    g: Vec<f64>,
    x: Vec<f64>,
}

impl<'a> DominantSystem<'a> {
    /// `(L + diag(q) + E) X` with `e = max{0, −((L + diag q) x) ⊘ x}`, the
    /// smallest diagonal boost making all row sums nonnegative.
    pub fn boosted(l: &'a DirectedLaplacian, q: &[f64], x: Vec<f64>) -> Result<Self> {
        let n = l.n();
        if q.len() != n || x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.len().min(x.len()) });
        }
        if let Some(i) = x.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("scaling entry {i} is {}", x[i])));
        }
        let lx = l.mul(&x);
        let g = (0..n).map(|i| q[i] + (-(lx[i] + q[i] * x[i]) / x[i]).max(0.0)).collect();
        Ok(DominantSystem { l, g, x })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// The diagonal `G`, including the boost.
    pub fn diagonal(&self) -> &[f64] {
        &self.g
    }

    pub fn scaling(&self) -> &[f64] {
        &self.x
    }

    /// `(L + G) X z`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let xz: Vec<f64> = z.iter().zip(&self.x).map(|(a, b)| a * b).collect();
        let mut y = self.l.mul(&xz);
        for i in 0..y.len() {
            y[i] += self.g[i] * xz[i];
        }
        y
    }

    /// The `(n+1)`-vertex Eulerian Laplacian obtained by appending a vertex
    /// that absorbs each row surplus and supplies each column deficit.
    ///
    /// Edges `j → i` of `L` get weight `A_ji x_j`; vertex `j` sends `g_j x_j`
    /// to the new vertex, which sends back the row sum `((L + G) x)_i`.
    pub fn patched(&self) -> Result<DirectedLaplacian> {
        let n = self.n();
        let a = self.l.adjacency();
        let ones = vec![1.0; n];
        let row_sums = self.apply(&ones);
        let mut trip = Vec::with_capacity(a.nnz() + 2 * n);
        for (j, i, w) in a.iter() {
            trip.push((j, i, w * self.x[j]));
        }
        for j in 0..n {
            let c = self.g[j] * self.x[j];
            if c > 0.0 {
                trip.push((j, n, c));
            }
            let r = row_sums[j].max(0.0);
            if r > 0.0 {
                trip.push((n, j, r));
            }
        }
        DirectedLaplacian::validate(SparseGraph::from_triplets(n + 1, Kind::Adjacency, trip)?)
    }
}

/// Solves `(M + ρI) u = c` for an Eulerian `M` through the `(k+1)`-vertex
/// patch joining every vertex to a new one by edges of weight `ρ` in both
/// directions.
pub fn solve_regularized(
    m: &DirectedLaplacian,
    rho: f64,
    c: &[f64],
    inner: &dyn EulerianSolver,
    eps: f64,
) -> Result<Vec<f64>> {
    let k = m.n();
    let mut trip: Vec<(usize, usize, f64)> = m.adjacency().iter().collect();
    for i in 0..k {
        trip.push((i, k, rho));
        trip.push((k, i, rho));
    }
    let p = DirectedLaplacian::validate(SparseGraph::from_triplets(k + 1, Kind::Adjacency, trip)?)?;
    solve_patched(&p, c, inner, eps)
}

/// Given a patched Laplacian `P = [[M, −r], [−cᵀ, Σr]]` with `M1 = r`,
/// returns the solution of `M z = b`, read off `P [y; t] = [b; −Σb]` as
/// `z = y − t·1`.
pub fn solve_patched(p: &DirectedLaplacian, b: &[f64], inner: &dyn EulerianSolver, eps: f64) -> Result<Vec<f64>> {
    let n = b.len();
    if p.n() != n + 1 {
        return Err(Error::DimensionMismatch { expected: p.n() - 1, got: n });
    }
    let mut rhs = b.to_vec();
    rhs.push(-b.iter().sum::<f64>());
    let y = inner.solve(p, &rhs, eps).map_err(inner_failure)?;
    let t = y[n];
    Ok(y[..n].iter().map(|v| v - t).collect())
}

pub(crate) fn inner_failure(e: Error) -> Error {
    match e {
        Error::InnerSolverFailure(_) => e,
        other => Error::InnerSolverFailure(other.to_string()),
    }
}

/// Outcome of [`refine`].
#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖b − A z‖₂ / ‖b‖₂` after each iteration.
    pub residuals: Vec<f64>,
}

/// Preconditioned iterative refinement `z ← z + P⁻¹(b − A z)` until
/// `‖b − A z‖₂ ≤ tol ‖b‖₂`.
pub fn refine<A, P>(apply: A, precondition: P, b: &[f64], tol: f64, max_iterations: usize) -> Result<Refinement>
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = b.len();
    let bnorm = norm2(b);
    let mut z = vec![0.0; n];
    let mut residuals = Vec::new();
    if bnorm == 0.0 {
        return Ok(Refinement { solution: z, iterations: 0, residuals });
    }
    let mut r = b.to_vec();
    for it in 1..=max_iterations {
        let dz = precondition(&r)?;
        for i in 0..n {
            z[i] += dz[i];
        }
        let az = apply(&z);
        for i in 0..n {
            r[i] = b[i] - az[i];
        }
        let rel = norm2(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::Divergence(rel));
        }
        residuals.push(rel);
        if rel <= tol {
            return Ok(Refinement { solution: z, iterations: it, residuals });
        }
        if it >= 3 && rel >= residuals[it - 3] {
            return Err(Error::InnerSolverFailure(format!("refinement stalled at residual {rel:e}")));
        }
    }
    Err(Error::InnerSolverFailure(format!(
        "refinement reached {max_iterations} iterations at residual {:e}",
        residuals.last().copied().unwrap_or(f64::NAN)
    )))
}
