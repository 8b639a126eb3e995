//! Reachability structure of sparse graphs.

use crate::graph::SparseGraph;

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    /// Component label per element, numbered by first appearance.
    pub fn labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut map = vec![usize::MAX; n];
        let mut labels = vec![0; n];
        let mut k = 0;
        for i in 0..n {
            let r = self.find(i);
            if map[r] == usize::MAX {
                map[r] = k;
                k += 1;
            }
            labels[i] = map[r];
        }
        (labels, k)
    }
}

/// Connected components ignoring edge direction.
pub fn weak_components(g: &SparseGraph) -> (Vec<usize>, usize) {
    let mut uf = UnionFind::new(g.n());
    for (i, j, _) in g.iter() {
        uf.union(i, j);
    }
    uf.labels()
}

/// Strongly connected component label per vertex (Kosaraju, iterative).
pub fn strong_components(g: &SparseGraph) -> (Vec<usize>, usize) {
    let n = g.n();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            let (cols, _) = g.row(v);
            if *k < cols.len() {
                let u = cols[*k];
                *k += 1;
                if !seen[u] {
                    seen[u] = true;
                    stack.push((u, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let t = g.transpose();
    let mut label = vec![usize::MAX; n];
    let mut k = 0;
    for &s in order.iter().rev() {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = k;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &u in t.row(v).0 {
                if label[u] == usize::MAX {
                    label[u] = k;
                    stack.push(u);
                }
            }
        }
        k += 1;
    }
    (label, k)
}

pub fn is_strongly_connected(g: &SparseGraph) -> bool {
    g.n() <= 1 || strong_components(g).1 == 1
}
