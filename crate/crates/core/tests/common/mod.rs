//! Reference computations for the integration tests. Deliberately written
//! against plain row-major arrays so they share no code with the library's
//! dense kernels.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use expm_rt::{CsrMatrix, DenseMatrix};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }

    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn from_dense(d: &DenseMatrix) -> Self {
        assert_eq!(d.rows(), d.cols());
        Self { n: d.rows(), a: d.as_slice().to_vec() }
    }

    pub fn from_csr(c: &CsrMatrix) -> Self {
        let n = c.n();
        let mut m = Self::zeros(n);
        for (i, j, v) in c.triplets() {
            m.a[i * n + j] += v;
        }
        m
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.at(i, j);
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        CsrMatrix::from_triplets(self.n, &t).unwrap()
    }

    pub fn mul(&self, b: &Mat) -> Mat {
        let n = self.n;
        let mut c = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                if x == 0.0 {
                    continue;
                }
                for j in 0..n {
                    c.a[i * n + j] += x * b.a[k * n + j];
                }
            }
        }
        c
    }

    pub fn mv(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.a[i * self.n + j] * x[j]).sum())
            .collect()
    }

    pub fn t(&self) -> Mat {
        let n = self.n;
        let mut b = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                b.a[j * n + i] = self.a[i * n + j];
            }
        }
        b
    }

    pub fn axpby(&self, alpha: f64, beta: f64, b: &Mat) -> Mat {
        Mat {
            n: self.n,
            a: self.a.iter().zip(&b.a).map(|(x, y)| alpha * x + beta * y).collect(),
        }
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.at(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub fn vnorm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn vdist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Taylor series with scaling and squaring, run to roundoff.
pub fn expm_taylor(m: &Mat) -> Mat {
    let n = m.n;
    let nrm = m.norm1();
    let mut s = 0;
    while nrm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = Mat { n, a: m.a.iter().map(|x| x / 2f64.powi(s)).collect() };
    let mut sum = Mat::eye(n);
    let mut term = Mat::eye(n);
    for j in 1..60 {
        term = term.mul(&a);
        term.a.iter_mut().for_each(|x| *x /= j as f64);
        sum = sum.axpby(1.0, 1.0, &term);
        if term.max_abs() <= 1e-20 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..s {
        sum = sum.mul(&sum);
    }
    sum
}

/// `exp(-t A) v` via [`expm_taylor`].
pub fn expmv_reference(a: &Mat, t: f64, v: &[f64]) -> Vec<f64> {
    let scaled = Mat { n: a.n, a: a.a.iter().map(|x| -t * x).collect() };
    expm_taylor(&scaled).mv(v)
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn norm2_power(m: &Mat) -> f64 {
    let mtm = m.t().mul(m);
    let mut x: Vec<f64> = (0..m.n).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let y = mtm.mv(&x);
        let ny = vnorm(&y);
        if ny == 0.0 {
            return 0.0;
        }
        lambda = ny / vnorm(&x);
        x = y.iter().map(|v| v / ny).collect();
    }
    lambda.sqrt()
}

/// Smallest eigenvalue of a symmetric matrix by bisection on Sturm counts
/// of its LDLᵀ factorizations.
pub fn sym_min_eigenvalue(m: &Mat) -> f64 {
    let n = m.n;
    let r = (0..n)
        .map(|i| (0..n).map(|j| m.at(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let count_below = |x: f64| -> usize {
        // inertia of M - xI via unpivoted LDLᵀ with a tiny perturbation on zero pivots
        let mut a: Vec<f64> = m.a.clone();
        for i in 0..n {
            a[i * n + i] -= x;
        }
        let mut neg = 0;
        for k in 0..n {
            let mut p = a[k * n + k];
            if p == 0.0 {
                p = 1e-300;
            }
            if p < 0.0 {
                neg += 1;
            }
            for i in k + 1..n {
                let l = a[i * n + k] / p;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    a[i * n + j] -= l * a[k * n + j];
                }
            }
        }
        neg
    };
    let (mut lo, mut hi) = (-r - 1.0, r + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_mat(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    Mat { n, a: (0..n * n).map(|_| gaussian(rng)).collect() }
}

pub fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
    let nv = vnorm(&v);
    v.into_iter().map(|x| x / nv).collect()
}

/// `c BᵀB + d (C - Cᵀ)` with nonnegative field of values.
pub fn random_wellposed(n: usize, sym: f64, skew: f64, rng: &mut ChaCha8Rng) -> Mat {
    let b = random_mat(n, rng);
    let c = random_mat(n, rng);
    let btb = b.t().mul(&b);
    let k = c.axpby(1.0, -1.0, &c.t());
    btb.axpby(sym / n as f64, skew / (n as f64).sqrt(), &k)
}

/// Orthogonal matrix from modified Gram–Schmidt of a Gaussian matrix,
/// columns stored as rows of the result.
pub fn random_orthogonal_rows(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut x: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for qi in &q {
                let d: f64 = qi.iter().zip(&x).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(qi).for_each(|(xj, qj)| *xj -= d * qj);
            }
        }
        let nx = vnorm(&x);
        if nx > 1e-8 {
            q.push(x.into_iter().map(|v| v / nx).collect());
        }
    }
    q
}

/// `A = Q diag-blocks Qᵀ` with an invariant subspace of dimension `dim`
/// spanned by the first `dim` columns of `Q`, and a unit `v` inside it.
/// Both diagonal blocks have positive definite symmetric parts.
pub fn invariant_subspace_problem(n: usize, dim: usize, seed: u64) -> (Mat, Vec<f64>) {
    let mut r = rng(seed);
    let q = random_orthogonal_rows(n, &mut r);
    let mut core = Mat::zeros(n);
    for i in 0..n {
        core.a[i * n + i] = 1.0 + i as f64;
    }
    for i in 0..n {
        for j in i + 1..n {
            let same_block = (i < dim) == (j < dim);
            if same_block {
                let s = 0.3 * gaussian(&mut r);
                core.a[i * n + j] = s;
                core.a[j * n + i] = -s;
            }
        }
    }
    let mut qm = Mat::zeros(n);
    for (col, qc) in q.iter().enumerate() {
        for row in 0..n {
            qm.a[row * n + col] = qc[row];
        }
    }
    let a = qm.mul(&core).mul(&qm.t());
    let w: Vec<f64> = (0..dim).map(|_| gaussian(&mut r)).collect();
    let mut v = vec![0.0; n];
    for (c, wc) in w.iter().enumerate() {
        for row in 0..n {
            v[row] += wc * q[c][row];
        }
    }
    let nv = vnorm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    (a, v)
}
