//! Sparse directed graphs and their Laplacians.
//!
//! A directed Laplacian is `L = D − Aᵀ` where `A[i][j]` is the weight of
//! edge `i -> j` and `D` holds out-degrees, so `1ᵀL = 0`. It is Eulerian
//! when in- and out-degrees agree, i.e. `L1 = 0` as well.
//!
//! | Item | Purpose |
//! |------|---------|
//! | [`SparseGraph`] | canonical CSR storage for adjacencies and matrices |
//! | [`DirectedLaplacian`] | validated `D − Aᵀ`, symmetrizations, normalization |
//! | [`NormalizedWalk`] | `Ŵ = D^{-1/2}AᵀD^{-1/2}` |
//! | [`io`] | Matrix Market and vector files |

pub mod connectivity;
pub mod error;
pub mod graph;
pub mod io;
pub mod laplacian;
pub mod seed;
pub mod solve;
pub mod vector;

pub use error::{Error, ErrorClass, Result};
pub use graph::{Kind, RowAccumulator, SparseGraph};
pub use laplacian::{DirectedLaplacian, NormalizedWalk};
pub use solve::EulerianSolver;
pub use vector::project_orthogonal;
