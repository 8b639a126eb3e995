//! Eulerian sparsification and implicit square sparsification.
//!
//! [`sparsify_eulerian`] decomposes an Eulerian Laplacian into covered
//! pieces and sparsifies each piece with the subgraph sparsifier.
//! [`sparsify_product`] sparsifies the rank-one Laplacian
//! `diag(y) − xyᵀ/r` without forming it, and [`sparsify_square`] chains the
//! two to sparsify `D − W D⁻¹ W` vertex by vertex.

mod eulerian;
mod product;
mod square;

pub use eulerian::{sparsify_eulerian, sparsify_eulerian_with, EulerianConfig, EulerianReport};
pub use product::{product_laplacian, sparsify_product, sparsify_product_with, ProductConfig, ProductReport};
pub use square::{
    sparsify_square, sparsify_square_with, square_laplacian_exact, SquareConfig, SquareReport, EXACT_PIECE_SUPPORT,
};
