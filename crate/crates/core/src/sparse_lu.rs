//! Direct solver for the shifted systems `(I + γA) x = b`.
//!
//! The matrix is reordered with reverse Cuthill–McKee to shrink its
//! bandwidth and then factored in band storage without pivoting. Pivoting
//! is unnecessary for matrices whose symmetric part is positive definite,
//! which is the case for `I + γA` whenever `Re(x*Ax) ≥ 0`. A vanishing
//! pivot is reported as an error rather than worked around.

use std::collections::VecDeque;
use std::hash::{Hash, Hasher};

use crate::error::{KrylovError, Result};
use crate::sparse::CsrMatrix;

/// Reverse Cuthill–McKee ordering of the symmetrized sparsity pattern.
///
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

// Walks to the end of successive BFS level structures until the
// eccentricity stops growing.
fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut node = seed;
    let mut ecc = 0;
    loop {
        let (levels, last) = bfs_levels(node, adj);
        if levels <= ecc {
            return node;
        }
        ecc = levels;
        let candidate = last
            .into_iter()
            .min_by_key(|&w| (degree[w], w))
            .unwrap_or(node);
        if candidate == node {
            return node;
        }
        node = candidate;
    }
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> (usize, Vec<usize>) {
    let mut seen = std::collections::HashSet::new();
    seen.insert(start);
    let mut frontier = vec![start];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in &adj[u] {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

/// Banded LU factors of a permuted sparse matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    lower: usize,
    upper: usize,
    /// row `i` holds columns `i - lower ..= i + upper`
    band: Vec<f64>,
    perm: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut lower, mut upper) = (0usize, 0usize);
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pi > pj {
                lower = lower.max(pi - pj);
            } else {
                upper = upper.max(pj - pi);
            }
        }
        let width = lower + upper + 1;
        let mut band = vec![0.0; n * width];
        let mut row_scale = vec![0.0f64; n];
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            band[pi * width + (pj + lower - pi)] += v;
            row_scale[pi] = row_scale[pi].max(v.abs());
        }

        for k in 0..n {
            let pivot = band[k * width + lower];
            if !(pivot.abs() > 1e-14 * row_scale[k]) || !pivot.is_finite() {
                return Err(KrylovError::FactorizationFailed { row: k, pivot });
            }
            let last_row = (k + lower).min(n - 1);
            let last_col = (k + upper).min(n - 1);
            for i in (k + 1)..=last_row {
                let lik_pos = i * width + (k + lower - i);
                let l = band[lik_pos] / pivot;
                band[lik_pos] = l;
                if l == 0.0 {
                    continue;
                }
                for j in (k + 1)..=last_col {
                    let ukj = band[k * width + (j + lower - k)];
                    band[i * width + (j + lower - i)] -= l * ukj;
                }
            }
        }
        Ok(Self {
            n,
            lower,
            upper,
            band,
            perm,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let width = self.lower + self.upper + 1;
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let first = i.saturating_sub(self.lower);
            let mut s = 0.0;
            for j in first..i {
                s += self.band[i * width + (j + self.lower - i)] * z[j];
            }
            z[i] -= s;
        }
        for i in (0..n).rev() {
            let last = (i + self.upper).min(n - 1);
            let mut s = 0.0;
            for j in (i + 1)..=last {
                s += self.band[i * width + (j + self.lower - i)] * z[j];
            }
            z[i] = (z[i] - s) / self.band[i * width + self.lower];
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = z[new];
        }
    }

    /// Hash of the stored factors, bit for bit.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.n.hash(&mut h);
        self.lower.hash(&mut h);
        self.upper.hash(&mut h);
        self.perm.hash(&mut h);
        for v in &self.band {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }
}
