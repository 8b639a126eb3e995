use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dirlap_core::vector::{axpy, dot};
use dirlap_core::{Error, Result, SparseGraph};

/// An implicit matrix: a routine applying a linear map to a vector.
///
/// Operators declare a unit kernel vector `k` when they annihilate it and
/// keep their outputs orthogonal to it.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// `y = Op x`.
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;

    fn kernel(&self) -> Option<&[f64]>;

    /// Sparse matrix-vector products performed by one application.
    fn cost(&self) -> u64;

    fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y)?;
        Ok(y)
    }
}

/// Shared counter of sparse matrix-vector products with a hard cap.
#[derive(Debug)]
pub struct Budget {
    used: AtomicU64,
    cap: u64,
}

impl Budget {
    pub fn new(cap: u64) -> Arc<Self> {
        Arc::new(Budget { used: AtomicU64::new(0), cap })
    }

    pub fn unlimited() -> Arc<Self> {
        Self::new(u64::MAX)
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn charge(&self, amount: u64) -> Result<()> {
        let used = self.used.fetch_add(amount, Ordering::Relaxed).saturating_add(amount);
        if used > self.cap {
            return Err(Error::RecursionBudgetExceeded { used, cap: self.cap });
        }
        Ok(())
    }
}

/// Removes the component of `v` along the unit vector `k`.
pub fn deflate(v: &mut [f64], k: &[f64]) {
    let c = dot(v, k);
    axpy(-c, k, v);
}

/// Unit vector along `D^{1/2} 1`.
pub fn unit_kernel(sqrt_degrees: &[f64]) -> Vec<f64> {
    let nrm = dot(sqrt_degrees, sqrt_degrees).sqrt();
    sqrt_degrees.iter().map(|s| s / nrm).collect()
}

/// `I − W` for a sparse walk matrix `W`.
pub struct ShiftedWalk {
    walk: Arc<SparseGraph>,
    kernel: Option<Arc<Vec<f64>>>,
    budget: Arc<Budget>,
}

impl ShiftedWalk {
    pub fn new(walk: Arc<SparseGraph>, kernel: Option<Arc<Vec<f64>>>, budget: Arc<Budget>) -> Self {
        ShiftedWalk { walk, kernel, budget }
    }
}

impl LinearOperator for ShiftedWalk {
    fn dim(&self) -> usize {
        self.walk.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.budget.charge(1)?;
        self.walk.mul_vec(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi - *yi;
        }
        Ok(())
    }

    fn kernel(&self) -> Option<&[f64]> {
        self.kernel.as_deref().map(|v| v.as_slice())
    }

    fn cost(&self) -> u64 {
        1
    }
}

/// `scale · I`, restricted to the complement of the kernel when one is given.
pub struct ScaledIdentity {
    n: usize,
    scale: f64,
    kernel: Option<Arc<Vec<f64>>>,
}

impl ScaledIdentity {
    pub fn new(n: usize, scale: f64, kernel: Option<Arc<Vec<f64>>>) -> Self {
        ScaledIdentity { n, scale, kernel }
    }
}

impl LinearOperator for ScaledIdentity {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = self.scale * xi;
        }
        if let Some(k) = &self.kernel {
            deflate(y, k);
        }
        Ok(())
    }

    fn kernel(&self) -> Option<&[f64]> {
        self.kernel.as_deref().map(|v| v.as_slice())
    }

    fn cost(&self) -> u64 {
        0
    }
}

/// `(1−α)^Δ · Z · (I + W_{i+Δ−1}^{(α)}) ⋯ (I + W_i^{(α)})` with
/// `W^{(α)} = αI + (1−α)W`.
pub struct ChainLevel {
    walks: Vec<Arc<SparseGraph>>,
    alpha: f64,
    inner: Arc<dyn LinearOperator>,
    budget: Arc<Budget>,
}

impl ChainLevel {
    /// `walks` lists `W_i, …, W_{i+Δ−1}` in application order.
    pub fn new(walks: Vec<Arc<SparseGraph>>, alpha: f64, inner: Arc<dyn LinearOperator>, budget: Arc<Budget>) -> Self {
        ChainLevel { walks, alpha, inner, budget }
    }
}

impl LinearOperator for ChainLevel {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = x.len();
        let mut u = x.to_vec();
        let mut wu = vec![0.0; n];
        for w in &self.walks {
            self.budget.charge(1)?;
            w.mul_vec(&u, &mut wu);
            for (ui, wi) in u.iter_mut().zip(&wu) {
                *ui = (1.0 + self.alpha) * *ui + (1.0 - self.alpha) * wi;
            }
        }
        self.inner.apply(&u, y)?;
        let s = (1.0 - self.alpha).powi(self.walks.len() as i32);
        y.iter_mut().for_each(|v| *v *= s);
        Ok(())
    }

    fn kernel(&self) -> Option<&[f64]> {
        self.inner.kernel()
    }

    fn cost(&self) -> u64 {
        self.walks.len() as u64 + self.inner.cost()
    }
}

/// The operator `b ↦ x_N` of preconditioned Richardson iteration
/// `x_{k+1} = x_k + η Z(b − M x_k)`, `x_0 = 0`.
///
/// When a kernel is declared, `b` is projected off it once per application.
pub struct Richardson {
    m: Arc<dyn LinearOperator>,
    z: Arc<dyn LinearOperator>,
    eta: f64,
    iterations: usize,
    kernel: Option<Arc<Vec<f64>>>,
}

impl Richardson {
    pub fn new(
        m: Arc<dyn LinearOperator>,
        z: Arc<dyn LinearOperator>,
        eta: f64,
        iterations: usize,
        kernel: Option<Arc<Vec<f64>>>,
    ) -> Self {
        Richardson { m, z, eta, iterations, kernel }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

impl LinearOperator for Richardson {
    fn dim(&self) -> usize {
        self.m.dim()
    }

    fn apply(&self, b: &[f64], y: &mut [f64]) -> Result<()> {
        let mut b = b.to_vec();
        if let Some(k) = &self.kernel {
            deflate(&mut b, k);
        }
        let x = precon_richardson(self.m.as_ref(), self.z.as_ref(), &b, self.eta, self.iterations)?;
        y.copy_from_slice(&x);
        Ok(())
    }

    fn kernel(&self) -> Option<&[f64]> {
        self.kernel.as_deref().map(|v| v.as_slice())
    }

    fn cost(&self) -> u64 {
        if self.iterations == 0 {
            return 0;
        }
        // The first iterate skips the product with M since x_0 = 0.
        self.iterations as u64 * self.z.cost() + (self.iterations as u64 - 1) * self.m.cost()
    }
}

/// Runs `N` steps of `x_{k+1} = x_k + η Z(b − M x_k)` from `x_0 = 0`.
/// The caller supplies `b` in the image of `M`.
pub fn precon_richardson(
    m: &dyn LinearOperator,
    z: &dyn LinearOperator,
    b: &[f64],
    eta: f64,
    iterations: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    if n != m.dim() || n != z.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: n });
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut zr = vec![0.0; n];
    let mut mx = vec![0.0; n];
    for step in 0..iterations {
        if step > 0 {
            m.apply(&x, &mut mx)?;
            for i in 0..n {
                r[i] = b[i] - mx[i];
            }
        }
        z.apply(&r, &mut zr)?;
        axpy(eta, &zr, &mut x);
    }
    Ok(x)
}
