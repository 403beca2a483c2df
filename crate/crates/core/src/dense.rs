//! Small dense kernels used on projected Krylov matrices.
//!
//! Everything here is sized for matrices of at most a few hundred rows:
//! the projected Hessenberg matrices of a restart cycle and the dense
//! reference problems used in tests.

use std::ops::{Index, IndexMut};

use crate::error::{KrylovError, Result};

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from a slice of equally long rows.
    ///
    /// Panics if the rows have different lengths.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| alpha * x).collect(),
        }
    }

    /// `self + alpha * other`
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for p in 0..self.cols {
                let a = self.data[i * self.cols + p];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[p * other.cols..(p + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Symmetric part `(M + M^T) / 2`.
    pub fn symmetric_part(&self) -> Self {
        let t = self.transpose();
        self.add_scaled(1.0, &t).scaled(0.5)
    }

    /// Leading `r x c` block.
    pub fn leading_block(&self, r: usize, c: usize) -> Self {
        assert!(r <= self.rows && c <= self.cols);
        let mut out = Self::zeros(r, c);
        for i in 0..r {
            out.data[i * c..(i + 1) * c].copy_from_slice(&self.row(i)[..c]);
        }
        out
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(KrylovError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting of a square dense matrix.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        m.require_square()?;
        let n = m.rows;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.norm_1().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= scale * f64::EPSILON * 1e-3 || !pmax.is_finite() {
                return Err(KrylovError::SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let l = lu[(i, k)] / pivot;
                lu[(i, k)] = l;
                if l != 0.0 {
                    for j in (k + 1)..n {
                        let ukj = lu[(k, j)];
                        lu[(i, j)] -= l * ukj;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    pub fn solve_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        let n = self.lu.rows;
        assert_eq!(b.rows, n);
        let mut out = DenseMatrix::zeros(n, b.cols);
        for j in 0..b.cols {
            let x = self.solve(&b.column(j));
            for (i, xi) in x.into_iter().enumerate() {
                out[(i, j)] = xi;
            }
        }
        out
    }

    /// Solves `x^T M = b^T`, i.e. `M^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        // U^T z = b
        let mut z = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(j, i)] * z[j]).sum();
            z[i] = (z[i] - s) / self.lu[(i, i)];
        }
        // L^T w = z
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| self.lu[(j, i)] * z[j]).sum();
            z[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix {
        self.solve_matrix(&DenseMatrix::identity(self.lu.rows))
    }
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm bounds below which the degree-m diagonal Padé approximant is
// accurate to unit roundoff without scaling.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by diagonal Padé approximation with scaling and squaring.
pub fn expm(m: &DenseMatrix) -> Result<DenseMatrix> {
    m.require_square()?;
    if !m.is_finite() {
        return Err(KrylovError::NonFinite);
    }
    let n = m.rows();
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    if n == 1 {
        return Ok(DenseMatrix::from_diag(&[m[(0, 0)].exp()]));
    }
    let norm = m.norm_1();
    let id = DenseMatrix::identity(n);
    let a2 = m.matmul(m);

    for &(deg, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match deg {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(m, &a2, &id, coeffs);
            return pade_quotient(&u, &v);
        }
    }

    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = 2f64.powi(-s);
    let a = m.scaled(scale);
    let a2 = a2.scaled(scale * scale);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let b = &PADE13;

    let inner_u = a6
        .scaled(b[13])
        .add_scaled(b[11], &a4)
        .add_scaled(b[9], &a2);
    let u = a6
        .matmul(&inner_u)
        .add_scaled(b[7], &a6)
        .add_scaled(b[5], &a4)
        .add_scaled(b[3], &a2)
        .add_scaled(b[1], &id);
    let u = a.matmul(&u);
    let inner_v = a6
        .scaled(b[12])
        .add_scaled(b[10], &a4)
        .add_scaled(b[8], &a2);
    let v = a6
        .matmul(&inner_v)
        .add_scaled(b[6], &a6)
        .add_scaled(b[4], &a4)
        .add_scaled(b[2], &a2)
        .add_scaled(b[0], &id);

    let mut r = pade_quotient(&u, &v)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

fn pade_low(
    a: &DenseMatrix,
    a2: &DenseMatrix,
    id: &DenseMatrix,
    b: &[f64],
) -> (DenseMatrix, DenseMatrix) {
    // even powers A^0, A^2, A^4, ...
    let mut powers = vec![id.clone(), a2.clone()];
    while powers.len() < b.len() / 2 {
        let next = powers.last().unwrap().matmul(a2);
        powers.push(next);
    }
    let mut u = DenseMatrix::zeros(a.rows(), a.cols());
    let mut v = DenseMatrix::zeros(a.rows(), a.cols());
    for (j, p) in powers.iter().enumerate() {
        u = u.add_scaled(b[2 * j + 1], p);
        v = v.add_scaled(b[2 * j], p);
    }
    (a.matmul(&u), v)
}

fn pade_quotient(u: &DenseMatrix, v: &DenseMatrix) -> Result<DenseMatrix> {
    let q = v.add_scaled(-1.0, u);
    let p = v.add_scaled(1.0, u);
    Ok(DenseLu::new(&q)?.solve_matrix(&p))
}

/// `(e^z - 1) / z`, with the removable singularity at zero.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 + z * (0.5 + z / 6.0)
    } else {
        z.exp_m1() / z
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Only the upper triangle is referenced.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    m.require_square()?;
    let n = m.rows();
    let mut a = m.clone();
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = a[(j, i)];
        }
    }
    let total = a.norm_fro();
    if total == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// `λ_min((M + M^T)/2)`; for `M = H_k` this is the constant ω_k with
/// `‖exp(-tM)‖ ≤ exp(-tω_k)`.
pub fn log_norm_2(m: &DenseMatrix) -> Result<f64> {
    m.require_square()?;
    if m.rows() == 0 {
        return Ok(0.0);
    }
    Ok(symmetric_eigenvalues(&m.symmetric_part())?[0])
}

/// Spectral norm (largest singular value).
pub fn norm_2(m: &DenseMatrix) -> Result<f64> {
    m.require_square()?;
    if m.rows() == 0 {
        return Ok(0.0);
    }
    let gram = m.transpose().matmul(m);
    let eig = symmetric_eigenvalues(&gram)?;
    Ok(eig.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
        let d = a.add_scaled(-1.0, b).norm_fro();
        assert!(d <= tol, "difference {d:e} exceeds {tol:e}");
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let e = expm(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_close(&e, &DenseMatrix::identity(2), 0.0);
    }

    #[test]
    fn expm_nilpotent() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let e = expm(&m).unwrap();
        let want = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert_close(&e, &want, 1e-15);
    }

    #[test]
    fn expm_diagonal() {
        let e = expm(&DenseMatrix::from_diag(&[-1.0, -2.0])).unwrap();
        assert!((e[(0, 0)] - (-1f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn expm_large_diagonal_uses_scaling() {
        let e = expm(&DenseMatrix::from_diag(&[-300.0, -0.5, 10.0])).unwrap();
        for (i, d) in [-300.0f64, -0.5, 10.0].iter().enumerate() {
            let want = d.exp();
            assert!(((e[(i, i)] - want) / want).abs() < 1e-12);
        }
    }

    #[test]
    fn expm_rejects_bad_input() {
        assert_eq!(
            expm(&DenseMatrix::zeros(2, 3)),
            Err(KrylovError::NotSquare { rows: 2, cols: 3 })
        );
        let m = DenseMatrix::from_diag(&[f64::NAN, 1.0]);
        assert_eq!(expm(&m), Err(KrylovError::NonFinite));
    }

    #[test]
    fn phi1_values() {
        assert_eq!(phi1(0.0), 1.0);
        assert!((phi1(1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        assert!((phi1(-1.0) - (1.0 - (-1f64).exp())).abs() < 1e-14);
        // near the removable singularity both branches agree
        for z in [1e-9, -1e-9, 2e-8, -2e-8, 1e-6] {
            let series = 1.0 + z / 2.0 + z * z / 6.0;
            assert!((phi1(z) - series).abs() < 1e-12);
        }
    }

    #[test]
    fn log_norm_examples() {
        assert!((log_norm_2(&DenseMatrix::from_diag(&[2.0, 3.0])).unwrap() - 2.0).abs() < 1e-14);
        let skew = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        assert_eq!(log_norm_2(&skew).unwrap(), 0.0);
        assert!(log_norm_2(&DenseMatrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn norm_2_examples() {
        assert!((norm_2(&DenseMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        assert!((norm_2(&DenseMatrix::from_diag(&[1.0, -4.0])).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn dense_lu_solves_and_transposes() {
        let m = DenseMatrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ]);
        let lu = DenseLu::new(&m).unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = lu.solve(&b);
        let r = m.matvec(&x);
        for (ri, bi) in r.iter().zip(b) {
            assert!((ri - bi).abs() < 1e-14);
        }
        let y = lu.solve_transpose(&b);
        let r = m.transpose().matvec(&y);
        for (ri, bi) in r.iter().zip(b) {
            assert!((ri - bi).abs() < 1e-14);
        }
        assert!(DenseLu::new(&DenseMatrix::zeros(2, 2)).is_err());
    }
}
