//! Seeded test-instance families.

use dirlap_core::{DirectedLaplacian, Kind, SparseGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn build(n: usize, trip: Vec<(usize, usize, f64)>) -> DirectedLaplacian {
    DirectedLaplacian::validate(SparseGraph::from_triplets(n, Kind::Adjacency, trip).expect("valid triplets"))
        .expect("valid graph")
}

/// Directed cycle `0 -> 1 -> ... -> n-1 -> 0` with unit weights.
pub fn cycle(n: usize) -> DirectedLaplacian {
    build(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect())
}

/// Directed path `0 -> 1 -> ... -> n-1` (not Eulerian).
pub fn path(n: usize) -> DirectedLaplacian {
    build(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0)).collect())
}

/// Undirected path as a symmetric directed graph.
pub fn bidirected_path(n: usize) -> DirectedLaplacian {
    let mut t = Vec::new();
    for i in 0..n.saturating_sub(1) {
        t.push((i, i + 1, 1.0));
        t.push((i + 1, i, 1.0));
    }
    build(n, t)
}

/// Complete directed graph with unit weights.
pub fn complete(n: usize) -> DirectedLaplacian {
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                t.push((i, j, 1.0));
            }
        }
    }
    build(n, t)
}

/// Two complete digraphs of size `k` joined by a directed 2-cycle of
/// weight `bridge` between vertex `0` and vertex `k`.
pub fn barbell(k: usize, bridge: f64) -> DirectedLaplacian {
    let mut t = Vec::new();
    for off in [0, k] {
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    t.push((off + i, off + j, 1.0));
                }
            }
        }
    }
    t.push((0, k, bridge));
    t.push((k, 0, bridge));
    build(2 * k, t)
}

/// Random Eulerian digraph: a Hamiltonian cycle plus `extra` random
/// directed cycles of length 2..=`max_len`, weights uniform in `[lo, hi]`.
pub fn random_eulerian(n: usize, extra: usize, max_len: usize, lo: f64, hi: f64, seed: u64) -> DirectedLaplacian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let w = rng.random_range(lo..=hi);
    for i in 0..n {
        t.push((perm[i], perm[(i + 1) % n], w));
    }
    let max_len = max_len.clamp(2, n.max(2));
    for _ in 0..extra {
        let len = rng.random_range(2..=max_len);
        perm.shuffle(&mut rng);
        let w = rng.random_range(lo..=hi);
        for i in 0..len {
            t.push((perm[i], perm[(i + 1) % len], w));
        }
    }
    build(n, t)
}

/// Eulerian digraph with roughly `p · n²` edges, built from random
/// directed triangles and 2-cycles over a Hamiltonian cycle.
pub fn dense_eulerian(n: usize, p: f64, seed: u64) -> DirectedLaplacian {
    let target = (p * (n * n) as f64 / 3.0).ceil() as usize;
    random_eulerian(n, target, 3, 0.5, 2.0, seed)
}

/// Random strongly connected digraph (not Eulerian in general): a
/// Hamiltonian cycle plus independent random arcs, weights in `[lo, hi]`.
pub fn random_strongly_connected(n: usize, p: f64, lo: f64, hi: f64, seed: u64) -> DirectedLaplacian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    for i in 0..n {
        t.push((perm[i], perm[(i + 1) % n], rng.random_range(lo..=hi)));
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                t.push((i, j, rng.random_range(lo..=hi)));
            }
        }
    }
    build(n, t)
}

/// Eulerian digraph whose weights span two scales: a unit-weight cycle and
/// random cycles of weight `big`.
pub fn two_scale_eulerian(n: usize, extra: usize, big: f64, seed: u64) -> DirectedLaplacian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..extra {
        perm.shuffle(&mut rng);
        let len = rng.random_range(2..=3.min(n));
        for i in 0..len {
            t.push((perm[i], perm[(i + 1) % len], big));
        }
    }
    build(n, t)
}

/// Bidirected path whose `i`-th edge `{i, i+1}` has weight `weights[i]` in
/// both directions.
pub fn weighted_bidirected_path(weights: &[f64]) -> DirectedLaplacian {
    let mut t = Vec::new();
    for (i, &w) in weights.iter().enumerate() {
        t.push((i, i + 1, w));
        t.push((i + 1, i, w));
    }
    build(weights.len() + 1, t)
}

/// Bidirected cycle whose edge `{i, i+1 mod n}` has weight `weights[i]`.
pub fn weighted_bidirected_cycle(weights: &[f64]) -> DirectedLaplacian {
    let n = weights.len();
    let mut t = Vec::new();
    for (i, &w) in weights.iter().enumerate() {
        t.push((i, (i + 1) % n, w));
        t.push(((i + 1) % n, i, w));
    }
    build(n, t)
}

/// Out-star with return arcs: `0 -> i` and `i -> 0` for `i = 1..k`, unit
/// weights.
pub fn star(k: usize) -> DirectedLaplacian {
    let mut t = Vec::new();
    for i in 1..=k {
        t.push((0, i, 1.0));
        t.push((i, 0, 1.0));
    }
    build(k + 1, t)
}

/// Directed two-cycle `0 -> 1` with weight `a` and `1 -> 0` with weight `b`.
pub fn two_cycle(a: f64, b: f64) -> DirectedLaplacian {
    build(2, vec![(0, 1, a), (1, 0, b)])
}
