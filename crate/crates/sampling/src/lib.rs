//! Entrywise matrix sampling, degree-repair patching and the subgraph
//! sparsifier.
//!
//! [`EntryDistribution`] draws entries of a nonnegative matrix with
//! probability `p_ij = (A_ij / s)(1/r_i + 1/c_j)`. [`sample_average`] turns
//! `k` draws into an unbiased estimate of the matrix, [`patch_to_degrees`]
//! restores exact row and column sums, and [`sparsify_subgraph`] composes
//! the three into a degree-preserving sparsifier of a directed Laplacian.

mod patch;
mod subgraph;

pub use patch::{patch_to_degrees, PatchMatrix};
pub use subgraph::{
    draw_count, estimate_scaled_norm, sparsify_subgraph, sparsify_subgraph_with, SubgraphConfig, SubgraphReport,
    C_SAMPLE,
};

use dirlap_core::{Error, Result, SparseGraph};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sampling distribution over the nonzero entries of a nonnegative matrix.
#[derive(Clone, Debug)]
pub struct EntryDistribution {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
    probs: Vec<f64>,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
    s: usize,
    table: WeightedIndex<f64>,
    seed: u64,
}

impl EntryDistribution {
    /// Builds the distribution for `A`; rows and columns without entries
    /// are outside the support and do not count towards `s`.
    pub fn build(a: &SparseGraph, seed: u64) -> Result<Self> {
        if a.nnz() == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut rows = Vec::with_capacity(a.nnz());
        let mut cols = Vec::with_capacity(a.nnz());
        let mut values = Vec::with_capacity(a.nnz());
        for (i, j, w) in a.iter() {
            if w < 0.0 {
                return Err(Error::NegativeWeight { row: i, col: j, weight: w });
            }
            rows.push(i);
            cols.push(j);
            values.push(w);
        }
        let row_sums = a.row_sums();
        let col_sums = a.col_sums();
        let s = row_sums.iter().filter(|&&r| r > 0.0).count() + col_sums.iter().filter(|&&c| c > 0.0).count();
        let sf = s as f64;
        let probs: Vec<f64> = (0..values.len())
            .map(|k| values[k] / sf * (1.0 / row_sums[rows[k]] + 1.0 / col_sums[cols[k]]))
            .collect();
        let table = WeightedIndex::new(&probs).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(EntryDistribution { n: a.n(), rows, cols, values, probs, row_sums, col_sums, s, table, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nonzero rows plus nonzero columns.
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(row, col, value, probability)` of the `k`-th entry in canonical order.
    pub fn entry(&self, k: usize) -> (usize, usize, f64, f64) {
        (self.rows[k], self.cols[k], self.values[k], self.probs[k])
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of entry `(i, j)`, zero outside the support.
    pub fn probability(&self, i: usize, j: usize) -> f64 {
        let lo = self.rows.partition_point(|&r| r < i);
        let hi = self.rows.partition_point(|&r| r <= i);
        match self.cols[lo..hi].binary_search(&j) {
            Ok(k) => self.probs[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    /// Index of one random entry.
    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.table.sample(rng)
    }
}

/// `Ã = (1/k) Σ_t (A_{i_t j_t} / p_{i_t j_t}) e_{i_t} e_{j_t}ᵀ` over `k`
/// independent draws seeded from the distribution's seed.
pub fn sample_average(dist: &EntryDistribution, k: usize) -> SparseGraph {
    sample_average_seeded(dist, k, dist.seed)
}

pub(crate) fn sample_average_seeded(dist: &EntryDistribution, k: usize, seed: u64) -> SparseGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; dist.len()];
    for _ in 0..k {
        counts[dist.draw(&mut rng)] += 1;
    }
    let kf = k.max(1) as f64;
    let trip = counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(e, &c)| {
        let (i, j, v, p) = dist.entry(e);
        (i, j, c as f64 * (v / p) / kf)
    });
    // Entries are already canonical and values positive.
    SparseGraph::from_triplets(dist.n, dirlap_core::Kind::Matrix, trip).expect("entries from a valid matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use dirlap_core::Kind;

    #[test]
    fn permutation_distribution() {
        let a = SparseGraph::from_triplets(2, Kind::Matrix, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let d = EntryDistribution::build(&a, 0).unwrap();
        assert_eq!(d.s(), 4);
        assert_eq!(d.probability(0, 1), 0.5);
        assert_eq!(d.probability(1, 0), 0.5);
        assert_eq!(d.probability(0, 0), 0.0);
    }

    #[test]
    fn single_entry_is_exact() {
        let a = SparseGraph::from_triplets(3, Kind::Matrix, vec![(0, 0, 5.0)]).unwrap();
        let d = EntryDistribution::build(&a, 3).unwrap();
        assert_eq!(d.probability(0, 0), 1.0);
        for k in [1, 7, 100] {
            assert_eq!(sample_average(&d, k), a);
        }
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            EntryDistribution::build(&SparseGraph::empty(3, Kind::Matrix), 0),
            Err(Error::EmptyMatrix)
        ));
    }
}
