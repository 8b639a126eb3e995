use crate::error::Result;
use crate::laplacian::DirectedLaplacian;

/// A routine that approximately solves `L x = b` for Eulerian `L` and
/// `b ⊥ 1`, returning `x` with `‖x − L†b‖_{U_L} ≤ eps ‖L†b‖_{U_L}`.
pub trait EulerianSolver: Send + Sync {
    fn solve(&self, l: &DirectedLaplacian, b: &[f64], eps: f64) -> Result<Vec<f64>>;

    fn name(&self) -> &'static str;
}
