//! Incremental Arnoldi process, `A V_k = V_{k+1} H̲_k`.
//!
//! Orthogonalization is single-pass modified Gram–Schmidt with no
//! reorthogonalization. A step whose new subdiagonal entry falls below
//! `BREAKDOWN_TOL` times the norm of `A v_k` is a happy breakdown: the
//! Krylov space is invariant, the entry is stored as exactly zero and no
//! further basis vector is formed.

use crate::dense::DenseMatrix;
use crate::error::{KrylovError, Result};
use crate::sparse::LinearOperator;
use crate::vector::{axpy, dot, norm};

pub const BREAKDOWN_TOL: f64 = 1e-12;

/// The projected quantities of a Krylov space of dimension `k`:
/// `H_k` (square), `h_{k+1,k}` and `β = ‖v‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub h: DenseMatrix,
    pub h_next: f64,
    pub beta: f64,
}

impl Projection {
    pub fn k(&self) -> usize {
        self.h.rows()
    }
}

#[derive(Debug, Clone)]
pub struct ArnoldiDecomposition {
    n: usize,
    basis: Vec<Vec<f64>>,
    // column j holds h_{1..=j+2, j+1}
    hess: Vec<Vec<f64>>,
    beta: f64,
    breakdown: bool,
}

impl ArnoldiDecomposition {
    /// Normalizes `v` into the first basis vector.
    pub fn start<A: LinearOperator + ?Sized>(op: &A, v: &[f64]) -> Result<Self> {
        let n = op.dim();
        if v.len() != n {
            return Err(KrylovError::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(KrylovError::NonFinite);
        }
        let beta = norm(v);
        if beta == 0.0 {
            return Err(KrylovError::ZeroStartVector);
        }
        let v1: Vec<f64> = v.iter().map(|x| x / beta).collect();
        Ok(Self {
            n,
            basis: vec![v1],
            hess: Vec::new(),
            beta,
            breakdown: false,
        })
    }

    /// Extends the decomposition by one Arnoldi step.
    pub fn step<A: LinearOperator + ?Sized>(&mut self, op: &A) -> Result<()> {
        if self.breakdown {
            return Err(KrylovError::StepPastBreakdown);
        }
        let k = self.hess.len();
        if k >= self.n {
            return Err(KrylovError::FullSpace(self.n));
        }
        let mut w = vec![0.0; self.n];
        op.apply(&self.basis[k], &mut w);
        let w0 = norm(&w);
        let mut col = Vec::with_capacity(k + 2);
        for vi in &self.basis {
            let hik = dot(&w, vi);
            axpy(-hik, vi, &mut w);
            col.push(hik);
        }
        let hnext = norm(&w);
        if hnext <= BREAKDOWN_TOL * w0 || k + 1 == self.n {
            col.push(0.0);
            self.breakdown = true;
        } else {
            col.push(hnext);
            w.iter_mut().for_each(|x| *x /= hnext);
            self.basis.push(w);
        }
        self.hess.push(col);
        Ok(())
    }

    /// Number of completed steps.
    pub fn k(&self) -> usize {
        self.hess.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn breakdown(&self) -> bool {
        self.breakdown
    }

    pub fn basis_vector(&self, i: usize) -> &[f64] {
        &self.basis[i]
    }

    /// `v_{k+1}`, absent after a breakdown.
    pub fn next_vector(&self) -> Option<&[f64]> {
        if self.breakdown {
            None
        } else {
            self.basis.get(self.k()).map(Vec::as_slice)
        }
    }

    /// `h_{j+1,j}` for `1 ≤ j ≤ k`.
    pub fn subdiagonal(&self, j: usize) -> f64 {
        self.hess[j - 1][j]
    }

    /// `H̲_j`, the `(j+1) x j` Hessenberg matrix after `j ≤ k` steps.
    pub fn hessenberg(&self, j: usize) -> DenseMatrix {
        assert!(j <= self.k());
        let mut h = DenseMatrix::zeros(j + 1, j);
        for (c, col) in self.hess.iter().take(j).enumerate() {
            for (r, &v) in col.iter().enumerate() {
                h[(r, c)] = v;
            }
        }
        h
    }

    /// Projection after `j ≤ k` steps.
    pub fn projection_at(&self, j: usize) -> Projection {
        assert!(j >= 1 && j <= self.k(), "projection needs 1 <= j <= k");
        Projection {
            h: self.hessenberg(j).leading_block(j, j),
            h_next: self.subdiagonal(j),
            beta: self.beta,
        }
    }

    pub fn projection(&self) -> Projection {
        self.projection_at(self.k())
    }

    /// `V_j c` for a coefficient vector of length `j ≤ k`.
    pub fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        assert!(coeffs.len() <= self.k().max(1));
        let mut y = vec![0.0; self.n];
        for (c, v) in coeffs.iter().zip(&self.basis) {
            axpy(*c, v, &mut y);
        }
        y
    }

    /// `max_{i≠j} |v_i^T v_j|` and `max_i |‖v_i‖ - 1|` over the stored basis.
    pub fn orthogonality_loss(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, vi) in self.basis.iter().enumerate() {
            worst = worst.max((dot(vi, vi) - 1.0).abs());
            for vj in &self.basis[..i] {
                worst = worst.max(dot(vi, vj).abs());
            }
        }
        worst
    }
}
