#![allow(dead_code)]

use std::sync::Arc;

use dirlap_core::{DirectedLaplacian, Result};
use dirlap_oracle::{image_projector, sym_part, to_dense, u_operator_norm, Dense};
use dirlap_solver::{LinearOperator, SquareChain};

/// A dense matrix as a [`LinearOperator`].
pub struct DenseOp {
    pub m: Dense,
    pub kernel: Option<Vec<f64>>,
}

impl DenseOp {
    pub fn new(m: Dense, kernel: Option<Vec<f64>>) -> Arc<Self> {
        Arc::new(DenseOp { m, kernel })
    }
}

impl LinearOperator for DenseOp {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y.copy_from_slice(&dirlap_oracle::mat_vec(&self.m, x));
        Ok(())
    }

    fn kernel(&self) -> Option<&[f64]> {
        self.kernel.as_deref()
    }

    fn cost(&self) -> u64 {
        1
    }
}

/// Applies `op` to every basis vector.
pub fn materialize(op: &dyn LinearOperator) -> Dense {
    let n = op.dim();
    let mut out = Dense::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = op.apply_vec(&e).unwrap();
        for i in 0..n {
            out[(i, j)] = col[i];
        }
        e[j] = 0.0;
    }
    out
}

/// `‖I_im − Z M‖_{U→U}`: the approximate-pseudoinverse error of `Z` for `M`.
pub fn pinv_error(z: &Dense, m: &Dense, u: &Dense) -> f64 {
    let p = image_projector(u);
    u_operator_norm(&(p - z * m), u)
}

/// `I − W_i` of a chain as a dense matrix.
pub fn shifted(chain: &SquareChain, i: usize) -> Dense {
    let n = chain.n();
    Dense::identity(n, n) - to_dense(chain.walk(i)).unwrap()
}

/// `I + W_i^{(α)}`.
pub fn lazy_plus_identity(chain: &SquareChain, i: usize) -> Dense {
    let n = chain.n();
    let a = chain.alpha();
    Dense::identity(n, n) * (1.0 + a) + to_dense(chain.walk(i)).unwrap() * (1.0 - a)
}

/// `D^{-1/2} L D^{-1/2}`.
pub fn normalized(l: &DirectedLaplacian) -> Dense {
    let w = l.normalize().unwrap();
    let n = l.n();
    Dense::identity(n, n) - to_dense(w.walk()).unwrap()
}

pub fn u_of(m: &Dense) -> Dense {
    sym_part(m)
}
