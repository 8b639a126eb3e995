use crate::error::{Error, Result};
use crate::graph::{Kind, SparseGraph};

/// Default Eulerian tolerance factor: `tol_eul = EULER_TOL · Tr(D) / n`.
pub const EULER_TOL: f64 = 1e-12;

/// `L = D − Aᵀ` where `D` holds out-degrees, so `1ᵀL = 0` by construction.
///
/// The adjacency is stored as given (`A[i][j]` is the edge `i -> j`).
#[derive(Clone, Debug, PartialEq)]
pub struct DirectedLaplacian {
    adjacency: SparseGraph,
    out_degrees: Vec<f64>,
    in_degrees: Vec<f64>,
    eulerian: bool,
    tol_eul: f64,
}

impl DirectedLaplacian {
    /// Validates an adjacency graph and computes its Laplacian data.
    pub fn validate(g: SparseGraph) -> Result<Self> {
        Self::validate_with_tol(g, None)
    }

    /// As [`validate`](Self::validate) with an explicit Eulerian tolerance.
    pub fn validate_with_tol(g: SparseGraph, tol_eul: Option<f64>) -> Result<Self> {
        let g = if g.kind() == Kind::Adjacency { g } else { g.with_kind(Kind::Adjacency)? };
        for (i, j, w) in g.iter() {
            if !w.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
        }
        let out_degrees = g.row_sums();
        let in_degrees = g.col_sums();
        let n = g.n();
        let trace: f64 = out_degrees.iter().sum();
        let tol = tol_eul.unwrap_or(if n > 0 { EULER_TOL * trace / n as f64 } else { 0.0 });
        let eulerian = out_degrees.iter().zip(&in_degrees).all(|(o, i)| (o - i).abs() <= tol);
        Ok(DirectedLaplacian { adjacency: g, out_degrees, in_degrees, eulerian, tol_eul: tol })
    }

    /// Reads `L = D − W` for a matrix `W` whose columns sum to the diagonal
    /// `D`; the diagonal of `W` cancels and is discarded.
    pub fn from_degree_minus_matrix(w: &SparseGraph) -> Result<Self> {
        Self::validate(w.without_diagonal().transpose().with_kind(Kind::Adjacency)?)
    }

    /// Builds from a dense-free description of `L` as a matrix: off-diagonal
    /// entries must be nonpositive and columns must sum to zero.
    pub fn from_matrix(l: &SparseGraph) -> Result<Self> {
        let mut trip = Vec::with_capacity(l.nnz());
        for (i, j, v) in l.iter() {
            if i != j {
                if v > 0.0 {
                    return Err(Error::NegativeWeight { row: j, col: i, weight: -v });
                }
                trip.push((j, i, -v));
            }
        }
        Self::validate(SparseGraph::from_triplets(l.n(), Kind::Adjacency, trip)?)
    }

    pub fn n(&self) -> usize {
        self.adjacency.n()
    }

    pub fn adjacency(&self) -> &SparseGraph {
        &self.adjacency
    }

    pub fn out_degrees(&self) -> &[f64] {
        &self.out_degrees
    }

    pub fn in_degrees(&self) -> &[f64] {
        &self.in_degrees
    }

    pub fn is_eulerian(&self) -> bool {
        self.eulerian
    }

    pub fn tol_eul(&self) -> f64 {
        self.tol_eul
    }

    /// Worst `|(L1)_i|` and its row.
    pub fn eulerian_defect(&self) -> (usize, f64) {
        self.out_degrees
            .iter()
            .zip(&self.in_degrees)
            .map(|(o, i)| (o - i).abs())
            .enumerate()
            .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best })
    }

    pub fn require_eulerian(&self) -> Result<()> {
        if self.eulerian {
            Ok(())
        } else {
            let (row, defect) = self.eulerian_defect();
            Err(Error::NotEulerian { row, defect })
        }
    }

    /// Nonzeros of the matrix `D − Aᵀ`.
    pub fn nnz(&self) -> usize {
        self.adjacency.nnz() + self.out_degrees.iter().filter(|&&d| d != 0.0).count()
    }

    /// Vertices touched by at least one edge.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.out_degrees[i] != 0.0 || self.in_degrees[i] != 0.0)
            .collect()
    }

    /// `y = L x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.adjacency.mul_vec_t(x, y);
        for i in 0..self.n() {
            y[i] = self.out_degrees[i] * x[i] - y[i];
        }
    }

    /// `y = Lᵀ x`.
    pub fn apply_t(&self, x: &[f64], y: &mut [f64]) {
        self.adjacency.mul_vec(x, y);
        for i in 0..self.n() {
            y[i] = self.out_degrees[i] * x[i] - y[i];
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.apply(x, &mut y);
        y
    }

    /// The matrix `D − Aᵀ` in canonical sparse form.
    pub fn to_matrix(&self) -> SparseGraph {
        let t = self.adjacency.transpose();
        let rows = (0..self.n())
            .map(|i| {
                let (c, v) = t.row(i);
                let mut r: Vec<(usize, f64)> = c.iter().zip(v).map(|(&j, &w)| (j, -w)).collect();
                r.push((i, self.out_degrees[i]));
                r
            })
            .collect();
        SparseGraph::from_rows(self.n(), Kind::Matrix, rows).expect("valid entries")
    }

    /// `U_L = ½(L + Lᵀ)`.
    pub fn symmetrization(&self) -> SparseGraph {
        let half_sum = self
            .adjacency
            .linear_combination(0.5, &self.adjacency.transpose(), 0.5)
            .expect("same dimension");
        let rows = (0..self.n())
            .map(|i| {
                let (c, v) = half_sum.row(i);
                let mut r: Vec<(usize, f64)> = c.iter().zip(v).map(|(&j, &w)| (j, -w)).collect();
                r.push((i, self.out_degrees[i]));
                r
            })
            .collect();
        SparseGraph::from_rows(self.n(), Kind::Matrix, rows).expect("valid entries")
    }

    /// `S_L = diag(U_A 1) − U_A`: each directed edge becomes an undirected
    /// edge of half its weight. The result is returned as a Laplacian of
    /// the symmetric adjacency `U_A`.
    pub fn graph_symmetrization(&self) -> DirectedLaplacian {
        let ua = self
            .adjacency
            .linear_combination(0.5, &self.adjacency.transpose(), 0.5)
            .expect("same dimension")
            .with_kind(Kind::Adjacency)
            .expect("nonnegative");
        DirectedLaplacian::validate(ua).expect("symmetric adjacency is valid")
    }

    /// `L = D^{1/2}(I − Ŵ)D^{1/2}` with `Ŵ = D^{-1/2}AᵀD^{-1/2}`.
    pub fn normalize(&self) -> Result<NormalizedWalk> {
        if let Some(i) = self.out_degrees.iter().position(|&d| d <= 0.0) {
            return Err(Error::ZeroDegreeVertex(i));
        }
        let inv_sqrt: Vec<f64> = self.out_degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
        let walk = self.adjacency.transpose().scale(&inv_sqrt, &inv_sqrt).with_kind(Kind::Matrix)?;
        Ok(NormalizedWalk::new(self.out_degrees.clone(), walk))
    }

    /// `L · diag(x)`: edge `j -> i` is scaled by `x_j`.
    pub fn right_scale(&self, x: &[f64]) -> Result<DirectedLaplacian> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.len() });
        }
        let ones = vec![1.0; self.n()];
        Self::validate(self.adjacency.scale(x, &ones))
    }

    pub fn sum<'a, I>(n: usize, parts: I) -> Result<DirectedLaplacian>
    where
        I: IntoIterator<Item = &'a DirectedLaplacian>,
    {
        let mut trip = Vec::new();
        for p in parts {
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.n() });
            }
            trip.extend(p.adjacency.iter());
        }
        Self::validate(SparseGraph::from_triplets(n, Kind::Adjacency, trip)?)
    }
}

/// `Ŵ = D^{-1/2} Aᵀ D^{-1/2}` together with the degrees it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedWalk {
    degrees: Vec<f64>,
    sqrt_degrees: Vec<f64>,
    walk: SparseGraph,
}

impl NormalizedWalk {
    pub fn new(degrees: Vec<f64>, walk: SparseGraph) -> Self {
        let sqrt_degrees = degrees.iter().map(|d| d.sqrt()).collect();
        NormalizedWalk { degrees, sqrt_degrees, walk }
    }

    pub fn n(&self) -> usize {
        self.walk.n()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn sqrt_degrees(&self) -> &[f64] {
        &self.sqrt_degrees
    }

    pub fn walk(&self) -> &SparseGraph {
        &self.walk
    }

    /// `D^{1/2} 1`, the common left and right kernel of `I − Ŵ` in the
    /// Eulerian case.
    pub fn kernel_vector(&self) -> Vec<f64> {
        self.sqrt_degrees.clone()
    }

    /// `D^{1/2}(I − Ŵ)D^{1/2}` as a sparse matrix.
    pub fn reconstruct(&self) -> SparseGraph {
        let s = &self.sqrt_degrees;
        let scaled = self.walk.scale(s, s);
        SparseGraph::diagonal_matrix(&self.degrees)
            .linear_combination(1.0, &scaled, -1.0)
            .expect("same dimension")
    }
}
