use crate::error::{Error, Result};

/// How the entries of a [`SparseGraph`] are to be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    /// Entry `(i, j, w)` is a directed edge `i -> j` of weight `w > 0`.
    Adjacency,
    /// Entry `(i, j, v)` is the matrix coefficient `M[i][j]`.
    Matrix,
}

/// Compressed sparse rows in canonical order: rows ascending, columns
/// ascending within a row, no duplicates, no explicit zeros.
///
/// This is the single storage type for adjacency matrices, walk matrices
/// and general sparse operators.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseGraph {
    n: usize,
    kind: Kind,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseGraph {
    pub fn empty(n: usize, kind: Kind) -> Self {
        SparseGraph { n, kind, row_ptr: vec![0; n + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        SparseGraph {
            n,
            kind: Kind::Matrix,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn diagonal_matrix(d: &[f64]) -> Self {
        Self::from_rows(
            d.len(),
            Kind::Matrix,
            d.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect(),
        )
        .expect("diagonal entries are in range")
    }

    /// Builds a canonical graph from arbitrary triplets. Duplicates are
    /// summed, exact zeros dropped. Adjacency inputs must be nonnegative.
    pub fn from_triplets<I>(n: usize, kind: Kind, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, w) in triplets {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { row: i, col: j, n });
            }
            rows[i].push((j, w));
        }
        Self::from_rows(n, kind, rows)
    }

    /// Builds a canonical graph from per-row entry lists in any order.
    pub fn from_rows(n: usize, kind: Kind, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rows.len() });
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                if j >= n {
                    return Err(Error::IndexOutOfRange { row: i, col: j, n });
                }
                let mut w = 0.0;
                while k < row.len() && row[k].0 == j {
                    let v = row[k].1;
                    if !v.is_finite() {
                        return Err(Error::NonFinite { row: i, col: j });
                    }
                    if kind == Kind::Adjacency && v < 0.0 {
                        return Err(Error::NegativeWeight { row: i, col: j, weight: v });
                    }
                    w += v;
                    k += 1;
                }
                if w != 0.0 {
                    cols.push(j);
                    vals.push(w);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(SparseGraph { n, kind, row_ptr, cols, vals })
    }

    /// Assembles from rows that are already sorted, deduplicated and free
    /// of zeros. Used by kernels that produce canonical rows directly.
    pub(crate) fn from_canonical_rows(
        n: usize,
        kind: Kind,
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_ptr.len(), n + 1);
        SparseGraph { n, kind, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn with_kind(mut self, kind: Kind) -> Result<Self> {
        if kind == Kind::Adjacency {
            for (i, j, w) in self.iter() {
                if w < 0.0 {
                    return Err(Error::NegativeWeight { row: i, col: j, weight: w });
                }
            }
        }
        self.kind = kind;
        Ok(self)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &w)| (i, j, w))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn transpose(&self) -> SparseGraph {
        let mut counts = vec![0usize; self.n + 1];
        for &j in &self.cols {
            counts[j + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for (i, j, w) in self.iter() {
            let p = next[j];
            cols[p] = i;
            vals[p] = w;
            next[j] += 1;
        }
        SparseGraph { n: self.n, kind: self.kind, row_ptr: counts, cols, vals }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for (_, j, w) in self.iter() {
            s[j] += w;
        }
        s
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &w)| w * x[j]).sum();
        }
    }

    /// `y = Mᵀ x`.
    pub fn mul_vec_t(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let (c, v) = self.row(i);
            for (&j, &w) in c.iter().zip(v) {
                y[j] += w * xi;
            }
        }
    }

    /// `diag(r) · M · diag(c)`.
    pub fn scale(&self, r: &[f64], c: &[f64]) -> SparseGraph {
        let mut out = self.clone();
        for i in 0..self.n {
            let (a, b) = (out.row_ptr[i], out.row_ptr[i + 1]);
            for k in a..b {
                out.vals[k] *= r[i] * c[out.cols[k]];
            }
        }
        out.drop_zeros();
        out
    }

    pub fn scalar_mul(&self, s: f64) -> SparseGraph {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out.drop_zeros();
        out
    }

    /// `a · self + b · other`.
    pub fn linear_combination(&self, a: f64, other: &SparseGraph, b: f64) -> Result<SparseGraph> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let rows = (0..self.n)
            .map(|i| {
                let (c1, v1) = self.row(i);
                let (c2, v2) = other.row(i);
                c1.iter()
                    .zip(v1)
                    .map(|(&j, &w)| (j, a * w))
                    .chain(c2.iter().zip(v2).map(|(&j, &w)| (j, b * w)))
                    .collect()
            })
            .collect();
        SparseGraph::from_rows(self.n, self.kind, rows)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn without_diagonal(&self) -> SparseGraph {
        let rows = (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).filter(|(&j, _)| j != i).map(|(&j, &w)| (j, w)).collect()
            })
            .collect();
        SparseGraph::from_rows(self.n, self.kind, rows).expect("entries already valid")
    }

    /// Smallest and largest stored absolute values.
    pub fn weight_range(&self) -> Option<(f64, f64)> {
        let mut it = self.vals.iter().map(|v| v.abs());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Sum of |entries|.
    pub fn total_weight(&self) -> f64 {
        self.vals.iter().map(|v| v.abs()).sum()
    }

    fn drop_zeros(&mut self) {
        if self.vals.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::with_capacity(self.nnz());
        let mut vals = Vec::with_capacity(self.nnz());
        row_ptr.push(0);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &w) in c.iter().zip(v) {
                if w != 0.0 {
                    cols.push(j);
                    vals.push(w);
                }
            }
            row_ptr.push(cols.len());
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }
}

/// Row-at-a-time assembly with a dense scatter accumulator.
///
/// Rows must be finished in ascending order. Each finished row is emitted
/// in canonical order.
pub struct RowAccumulator {
    n: usize,
    kind: Kind,
    acc: Vec<f64>,
    mark: Vec<bool>,
    touched: Vec<usize>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl RowAccumulator {
    pub fn new(n: usize, kind: Kind) -> Self {
        RowAccumulator {
            n,
            kind,
            acc: vec![0.0; n],
            mark: vec![false; n],
            touched: Vec::new(),
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, j: usize, w: f64) {
        if !self.mark[j] {
            self.mark[j] = true;
            self.touched.push(j);
        }
        self.acc[j] += w;
    }

    pub fn finish_row(&mut self) {
        self.touched.sort_unstable();
        for &j in &self.touched {
            let w = self.acc[j];
            if w != 0.0 {
                self.cols.push(j);
                self.vals.push(w);
            }
            self.acc[j] = 0.0;
            self.mark[j] = false;
        }
        self.touched.clear();
        self.row_ptr.push(self.cols.len());
    }

    pub fn rows_done(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn build(mut self) -> SparseGraph {
        while self.rows_done() < self.n {
            self.finish_row();
        }
        SparseGraph::from_canonical_rows(self.n, self.kind, self.row_ptr, self.cols, self.vals)
    }
}
