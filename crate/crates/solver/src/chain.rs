use std::sync::Arc;

use dirlap_core::seed::child_seed;
use dirlap_core::vector::norm_inf;
use dirlap_core::{DirectedLaplacian, Error, Kind, Result, SparseGraph};
use dirlap_sparsify::{sparsify_eulerian_with, sparsify_square_with, EulerianConfig, SquareConfig};
use serde::{Deserialize, Serialize};

use crate::operator::unit_kernel;

/// Laziness of every chain level.
pub const CHAIN_ALPHA: f64 = 0.25;
/// Accuracy of the initial sparsifier `L_0`.
pub const INITIAL_EPS: f64 = 1.0 / 20.0;
/// Largest tolerated kernel residual `‖(I − W_i) k‖∞` of a chain level.
pub const KERNEL_DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Default)]
pub struct ChainConfig {
    pub eulerian: EulerianConfig,
    pub square: SquareConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub nnz: usize,
    pub kernel_drift: f64,
    /// Per-vertex pieces sampled by the square sparsifier (0 for `W_0`).
    pub sampled_pieces: usize,
}

/// Walks `W_0 … W_d` sharing the degrees `D`, where `I − W_{i+1}`
/// approximates `I − (W_i^{(α)})²` and every `I − W_i` has kernel
/// `span(D^{1/2} 1)`.
#[derive(Clone, Debug)]
pub struct SquareChain {
    degrees: Vec<f64>,
    sqrt_degrees: Vec<f64>,
    kernel: Arc<Vec<f64>>,
    walks: Vec<Arc<SparseGraph>>,
    alpha: f64,
    eps_hat: f64,
    lambda_hat: Option<f64>,
    phi_target: f64,
    stats: Vec<LevelStats>,
}

impl SquareChain {
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn sqrt_degrees(&self) -> &[f64] {
        &self.sqrt_degrees
    }

    /// Unit vector along `D^{1/2} 1`.
    pub fn kernel(&self) -> &Arc<Vec<f64>> {
        &self.kernel
    }

    /// Chain length `d`; there are `d + 1` walks.
    pub fn d(&self) -> usize {
        self.walks.len() - 1
    }

    pub fn walk(&self, i: usize) -> &Arc<SparseGraph> {
        &self.walks[i]
    }

    pub fn walks(&self) -> &[Arc<SparseGraph>] {
        &self.walks
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eps_hat(&self) -> f64 {
        self.eps_hat
    }

    pub fn lambda_hat(&self) -> Option<f64> {
        self.lambda_hat
    }

    pub fn with_lambda_hat(mut self, lambda_hat: f64) -> Self {
        self.lambda_hat = Some(lambda_hat);
        self
    }

    /// Conductance target used when sparsifying `L_0`.
    pub fn phi_target(&self) -> f64 {
        self.phi_target
    }

    pub fn stats(&self) -> &[LevelStats] {
        &self.stats
    }

    pub fn total_nnz(&self) -> usize {
        self.stats.iter().map(|s| s.nnz).sum()
    }
}

pub fn build_chain(l: &DirectedLaplacian, d: usize, alpha: f64, eps: f64, p: f64, seed: u64) -> Result<SquareChain> {
    build_chain_with(l, d, alpha, eps, p, seed, &ChainConfig::default())
}

/// Builds a square-sparsifier chain of length `d`.
///
/// `W_0` comes from `sparsify_eulerian(L, p/(d+1), 1/20)`; each
/// `W_{i+1} = D^{-1/2} A_{i+1} D^{-1/2}` with
/// `A_{i+1} = sparsify_square(D^{1/2} W_i^{(α)} D^{1/2}, p/(d+1), eps)`.
pub fn build_chain_with(
    l: &DirectedLaplacian,
    d: usize,
    alpha: f64,
    eps: f64,
    p: f64,
    seed: u64,
    cfg: &ChainConfig,
) -> Result<SquareChain> {
    if alpha != CHAIN_ALPHA {
        return Err(Error::InvalidParameter(format!("chain laziness must be {CHAIN_ALPHA}, got {alpha}")));
    }
    if !(eps > 0.0 && eps < 1.0) || !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} and p = {p} must lie in (0, 1)")));
    }
    let level_p = p / (d as f64 + 1.0);
    let degrees = l.out_degrees().to_vec();
    if let Some(i) = degrees.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroDegreeVertex(i));
    }
    let sqrt_degrees: Vec<f64> = degrees.iter().map(|v| v.sqrt()).collect();
    let inv_sqrt: Vec<f64> = sqrt_degrees.iter().map(|v| 1.0 / v).collect();
    let kernel = Arc::new(unit_kernel(&sqrt_degrees));

    let (l0, erep) = sparsify_eulerian_with(l, level_p, INITIAL_EPS, child_seed(seed, 0), &cfg.eulerian)?;
    let w0 = l0.adjacency().transpose().scale(&inv_sqrt, &inv_sqrt).with_kind(Kind::Matrix)?;
    let drift = kernel_drift(&w0, &kernel);
    check_drift(0, drift)?;
    let mut stats = vec![LevelStats { nnz: w0.nnz(), kernel_drift: drift, sampled_pieces: 0 }];
    let mut walks = vec![Arc::new(w0)];

    for i in 0..d {
        let lazy = lazy_scaled(&walks[i], &sqrt_degrees, &degrees, alpha)?;
        let (a_next, rep) = sparsify_square_with(&lazy, level_p, eps, child_seed(seed, i as u64 + 1), &cfg.square)?;
        let w = a_next.scale(&inv_sqrt, &inv_sqrt);
        let drift = kernel_drift(&w, &kernel);
        check_drift(i + 1, drift)?;
        stats.push(LevelStats { nnz: w.nnz(), kernel_drift: drift, sampled_pieces: rep.sampled_pieces });
        walks.push(Arc::new(w));
    }
    let n = degrees.len();
    let eps_hat = if d == 0 { INITIAL_EPS } else { eps };
    debug_assert_eq!(walks[0].n(), n);
    Ok(SquareChain { degrees, sqrt_degrees, kernel, walks, alpha, eps_hat, lambda_hat: None, phi_target: erep.phi_target, stats })
}

/// `D^{1/2} (αI + (1−α)W) D^{1/2}`.
fn lazy_scaled(w: &SparseGraph, sqrt_degrees: &[f64], degrees: &[f64], alpha: f64) -> Result<SparseGraph> {
    w.scale(sqrt_degrees, sqrt_degrees)
        .linear_combination(1.0 - alpha, &SparseGraph::diagonal_matrix(degrees), alpha)
}

/// `max(‖(I − W)k‖∞, ‖(I − W)ᵀk‖∞)`.
fn kernel_drift(w: &SparseGraph, k: &[f64]) -> f64 {
    let n = k.len();
    let mut y = vec![0.0; n];
    w.mul_vec(k, &mut y);
    let right: Vec<f64> = (0..n).map(|i| k[i] - y[i]).collect();
    w.mul_vec_t(k, &mut y);
    let left: Vec<f64> = (0..n).map(|i| k[i] - y[i]).collect();
    norm_inf(&right).max(norm_inf(&left))
}

fn check_drift(level: usize, drift: f64) -> Result<()> {
    if !(drift <= KERNEL_DRIFT_TOL) {
        return Err(Error::ChainKernelDrift { level, drift });
    }
    Ok(())
}
