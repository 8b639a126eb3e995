use dirlap_core::seed::child_seed;
use dirlap_core::vector::{dot, norm2};
use dirlap_core::{DirectedLaplacian, Error, Kind, Result, SparseGraph};
use dirlap_sampling::{draw_count, patch_to_degrees, C_SAMPLE};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct ProductConfig {
    pub c_sample: f64,
    /// Return the exact product when the draw count reaches its entry count.
    pub exact_when_dense: bool,
    pub verify: bool,
    pub max_resamples: usize,
    pub power_iterations: usize,
}

impl Default for ProductConfig {
    fn default() -> Self {
        ProductConfig { c_sample: C_SAMPLE, exact_when_dense: true, verify: true, max_resamples: 3, power_iterations: 60 }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProductReport {
    pub exact: bool,
    pub s: usize,
    pub draws: usize,
    pub attempts: usize,
    pub norm_estimate: f64,
    pub nnz_out: usize,
}

fn check_norms(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    for (i, &v) in x.iter().chain(y).enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row: i % x.len(), col: i % x.len() });
        }
        if v < 0.0 {
            return Err(Error::NegativeWeight { row: i % x.len(), col: i % x.len(), weight: v });
        }
    }
    let rx: f64 = x.iter().sum();
    let ry: f64 = y.iter().sum();
    if !(rx > 0.0) || (rx - ry).abs() > 1e-10 * rx.max(ry) {
        return Err(Error::NormMismatch { x: rx, y: ry });
    }
    Ok(0.5 * (rx + ry))
}

/// The Laplacian of `diag(y) − xyᵀ/r` with `r = ‖x‖₁ = ‖y‖₁`: edge
/// `j -> i` carries `x_i y_j / r` for `i ≠ j`. The diagonal products cancel.
pub fn product_laplacian(x: &[f64], y: &[f64]) -> Result<DirectedLaplacian> {
    let r = check_norms(x, y)?;
    let n = x.len();
    let xs: Vec<usize> = (0..n).filter(|&i| x[i] > 0.0).collect();
    let ys: Vec<usize> = (0..n).filter(|&j| y[j] > 0.0).collect();
    let mut trip = Vec::with_capacity(xs.len() * ys.len());
    for &j in &ys {
        for &i in &xs {
            if i != j {
                trip.push((j, i, x[i] * y[j] / r));
            }
        }
    }
    DirectedLaplacian::validate(SparseGraph::from_triplets(n, Kind::Adjacency, trip)?)
}

pub fn sparsify_product(x: &[f64], y: &[f64], p: f64, eps: f64, seed: u64) -> Result<DirectedLaplacian> {
    sparsify_product_with(x, y, p, eps, seed, &ProductConfig::default()).map(|r| r.0)
}

/// Samples the product Laplacian `diag(y) − xyᵀ/r` without forming it.
///
/// Writing `M_ij = x_i y_j / r` (`i ≠ j`) for the transposed adjacency, the
/// entry distribution `p_ij = (1/s)[x_i/(r − x_j) + y_j/(r − y_i)]` is drawn
/// in two stages: a uniform choice among the `s` nonzero rows and columns,
/// then a partner `j ≠ i` with probability `∝ y_j` for a row, or `i ≠ j`
/// with probability `∝ x_i` for a column. The average is scaled by
/// `(1 + ε/4)⁻¹` and patched back to the exact degrees.
pub fn sparsify_product_with(
    x: &[f64],
    y: &[f64],
    p: f64,
    eps: f64,
    seed: u64,
    cfg: &ProductConfig,
) -> Result<(DirectedLaplacian, ProductReport)> {
    let r = check_norms(x, y)?;
    let n = x.len();
    let xs: Vec<usize> = (0..n).filter(|&i| x[i] > 0.0).collect();
    let ys: Vec<usize> = (0..n).filter(|&j| y[j] > 0.0).collect();
    let s = xs.len() + ys.len();
    let mut report = ProductReport { s, ..Default::default() };
    let entries = xs.len() * ys.len() - xs.iter().filter(|&&i| y[i] > 0.0).count();
    let k = draw_count(cfg.c_sample, s, p, eps);
    report.draws = k;
    if xs.len() <= 1 || ys.len() <= 1 || (cfg.exact_when_dense && k >= entries) {
        let l = product_laplacian(x, y)?;
        report.exact = true;
        report.nnz_out = l.adjacency().nnz();
        return Ok((l, report));
    }
    let xi = WeightedIndex::new(xs.iter().map(|&i| x[i])).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let yj = WeightedIndex::new(ys.iter().map(|&j| y[j])).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    // Row sums of M (in-degrees) and column sums (out-degrees).
    let row_t: Vec<f64> = (0..n).map(|i| x[i] * (r - y[i]) / r).collect();
    let col_t: Vec<f64> = (0..n).map(|j| y[j] * (r - x[j]) / r).collect();
    let shrink = 1.0 / (1.0 + eps / 4.0);
    for attempt in 0..=cfg.max_resamples {
        report.attempts = attempt + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, attempt as u64));
        let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(k);
        for _ in 0..k {
            let side = rng.random_range(0..s);
            let (i, j) = if side < xs.len() {
                let i = xs[side];
                let j = loop {
                    let j = ys[yj.sample(&mut rng)];
                    if j != i {
                        break j;
                    }
                };
                (i, j)
            } else {
                let j = ys[side - xs.len()];
                let i = loop {
                    let i = xs[xi.sample(&mut rng)];
                    if i != j {
                        break i;
                    }
                };
                (i, j)
            };
            let pij = (x[i] / (r - x[j]) + y[j] / (r - y[i])) / s as f64;
            trip.push((i, j, x[i] * y[j] / r / pij / k as f64 * shrink));
        }
        let ahat = SparseGraph::from_triplets(n, Kind::Matrix, trip)?;
        let patch = match patch_to_degrees(&ahat, &row_t, &col_t, true) {
            Ok(p) => p,
            Err(Error::TargetExceeded { .. }) => continue,
            Err(e) => return Err(e),
        };
        let m = ahat.linear_combination(1.0, &patch.to_graph(n, Kind::Matrix)?, 1.0)?;
        if cfg.verify {
            let est = implicit_scaled_norm(x, y, r, &m, &row_t, &col_t, cfg.power_iterations, child_seed(seed, 1 << 40 | attempt as u64));
            report.norm_estimate = est;
            if est > eps {
                continue;
            }
        }
        let l = DirectedLaplacian::validate(m.transpose().with_kind(Kind::Adjacency)?)?;
        report.nnz_out = l.adjacency().nnz();
        return Ok((l, report));
    }
    Err(Error::OversampleExhausted(cfg.max_resamples))
}

/// Power-method estimate of `‖R^{-1/2}(M̃ − M)C^{-1/2}‖₂` with `M` applied
/// as a rank-one product minus its diagonal.
#[allow(clippy::too_many_arguments)]
fn implicit_scaled_norm(
    x: &[f64],
    y: &[f64],
    r: f64,
    mt: &SparseGraph,
    row_t: &[f64],
    col_t: &[f64],
    iterations: usize,
    seed: u64,
) -> f64 {
    let n = x.len();
    let inv = |v: &[f64]| -> Vec<f64> { v.iter().map(|&t| if t > 0.0 { 1.0 / t.sqrt() } else { 0.0 }).collect() };
    let (ri, ci) = (inv(row_t), inv(col_t));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut tmp = vec![0.0; n];
    let mut est = 0.0f64;
    for _ in 0..iterations.max(1) {
        let nv = norm2(&v);
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|a| *a /= nv);
        // u = R^{-1/2} (M̃ − M) C^{-1/2} v
        let w: Vec<f64> = (0..n).map(|j| ci[j] * v[j]).collect();
        mt.mul_vec(&w, &mut tmp);
        let yw = dot(y, &w);
        let u: Vec<f64> = (0..n).map(|i| ri[i] * (tmp[i] - (x[i] * yw - x[i] * y[i] * w[i]) / r)).collect();
        // z = C^{-1/2} (M̃ − M)ᵀ R^{-1/2} u
        let w2: Vec<f64> = (0..n).map(|i| ri[i] * u[i]).collect();
        mt.mul_vec_t(&w2, &mut tmp);
        let xw = dot(x, &w2);
        let z: Vec<f64> = (0..n).map(|j| ci[j] * (tmp[j] - (y[j] * xw - x[j] * y[j] * w2[j]) / r)).collect();
        est = est.max(dot(&v, &z).max(0.0).sqrt());
        v = z;
    }
    est
}
