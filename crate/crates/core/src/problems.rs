//! Test problems: a 2D convection–diffusion operator and seeded random
//! operators with nonnegative field of values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{KrylovError, Result};
use crate::sparse::{estimate_norm_2, CsrMatrix};
use crate::vector::norm;

/// Convection–diffusion on the unit square with homogeneous Dirichlet
/// boundary conditions,
///
/// ```text
/// L[u] = -(D1 u_x)_x - (D2 u_y)_y + Pe (½(v1 u_x + v2 u_y) + ½((v1 u)_x + (v2 u)_y)),
/// D1 = 1000 on [0.25, 0.75]², 1 elsewhere,   D2 = D1 / 2,
/// v1 = x + y,   v2 = x - y.
/// ```
///
/// `mesh` counts grid points per side including the boundary, so the
/// operator has `(mesh - 2)²` unknowns on spacing `h = 1 / (mesh - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvDiffSpec {
    pub mesh: usize,
    pub peclet: f64,
}

#[derive(Debug, Clone)]
pub struct ConvDiffProblem {
    /// `diffusion + convection`
    pub matrix: CsrMatrix,
    /// Symmetric five-point diffusion part.
    pub diffusion: CsrMatrix,
    /// Skew-symmetric convection part.
    pub convection: CsrMatrix,
    /// Normalized samples of `sin(πx) sin(πy)` at the interior nodes.
    pub v: Vec<f64>,
}

fn d1(x: f64, y: f64) -> f64 {
    if (0.25..=0.75).contains(&x) && (0.25..=0.75).contains(&y) {
        1000.0
    } else {
        1.0
    }
}

/// Assembles the operator scaled by `h²`, i.e. the five-point stencil
/// without the `1/h²` factor.
///
/// Face diffusion coefficients are arithmetic means of the nodal values.
/// The two convection halves, discretized by central differences, combine
/// to `Pe h (v(P) + v(Q)) / 4` at neighbor `Q` on the positive side of
/// node `P` and its negative on the other side, which is exactly
/// skew-symmetric.
pub fn build_conv_diff(spec: &ConvDiffSpec) -> Result<ConvDiffProblem> {
    if spec.mesh < 4 {
        return Err(KrylovError::InvalidConfig(format!(
            "mesh must have at least 4 points per side, got {}",
            spec.mesh
        )));
    }
    if !(spec.peclet >= 0.0) || !spec.peclet.is_finite() {
        return Err(KrylovError::InvalidConfig(format!(
            "Peclet number must be nonnegative, got {}",
            spec.peclet
        )));
    }
    let m = spec.mesh - 2;
    let n = m * m;
    let h = 1.0 / (spec.mesh - 1) as f64;
    let coord = |i: usize| i as f64 * h;
    let index = |i: usize, j: usize| (i - 1) + (j - 1) * m;
    let interior = |i: usize| (1..=m).contains(&i);
    let c = spec.peclet * h / 4.0;

    let mut diff = Vec::with_capacity(5 * n);
    let mut conv = Vec::with_capacity(4 * n);
    for j in 1..=m {
        for i in 1..=m {
            let (x, y) = (coord(i), coord(j));
            let p = index(i, j);
            let dp = d1(x, y);
            let mut diag = 0.0;
            // (di, dj, nodal coefficient ratio, velocity)
            let neighbors = [
                (i + 1, j, 1.0, 1.0),
                (i - 1, j, 1.0, -1.0),
                (i, j + 1, 0.5, 1.0),
                (i, j - 1, 0.5, -1.0),
            ];
            for (k, &(qi, qj, ratio, sign)) in neighbors.iter().enumerate() {
                let (qx, qy) = (coord(qi), coord(qj));
                let face = ratio * 0.5 * (dp + d1(qx, qy));
                diag += face;
                if !(interior(qi) && interior(qj)) {
                    continue;
                }
                let q = index(qi, qj);
                diff.push((p, q, -face));
                // summed in node order so the (p, q) and (q, p) entries agree bitwise
                let (lo, hi) = if p < q { ((x, y), (qx, qy)) } else { ((qx, qy), (x, y)) };
                let vel = if k < 2 {
                    (lo.0 + lo.1) + (hi.0 + hi.1)
                } else {
                    (lo.0 - lo.1) + (hi.0 - hi.1)
                };
                conv.push((p, q, sign * c * vel));
            }
            diff.push((p, p, diag));
        }
    }
    let diffusion = CsrMatrix::from_triplets(n, &diff)?;
    let convection = CsrMatrix::from_triplets(n, &conv)?;
    let matrix = diffusion.linear_combination(1.0, 1.0, &convection)?;

    let pi = std::f64::consts::PI;
    let mut v = vec![0.0; n];
    for j in 1..=m {
        for i in 1..=m {
            v[index(i, j)] = (pi * coord(i)).sin() * (pi * coord(j)).sin();
        }
    }
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    Ok(ConvDiffProblem {
        matrix,
        diffusion,
        convection,
        v,
    })
}

/// Dense random `A = P + K` with `P = BᵀB / ‖BᵀB‖` positive semidefinite
/// and `K = (C - Cᵀ) / ‖C - Cᵀ‖` skew-symmetric, so that `xᵀAx ≥ 0` and
/// both parts have unit 2-norm (up to the power-iteration estimate). `v`
/// is a random unit vector. Fully determined by `seed`.
pub fn build_random_wellposed(n: usize, seed: u64) -> Result<(CsrMatrix, Vec<f64>)> {
    if n < 2 {
        return Err(KrylovError::InvalidConfig(format!("random operator needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let b: Vec<f64> = (0..n * n).map(|_| normal()).collect();
    let c: Vec<f64> = (0..n * n).map(|_| normal()).collect();
    let mut v: Vec<f64> = (0..n).map(|_| normal()).collect();

    let mut gram = Vec::with_capacity(n * n);
    let mut skew = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            gram.push((i, j, (0..n).map(|r| b[r * n + lo] * b[r * n + hi]).sum::<f64>()));
            skew.push((i, j, c[i * n + j] - c[j * n + i]));
        }
    }
    let gram = CsrMatrix::from_triplets(n, &gram)?;
    let skew = CsrMatrix::from_triplets(n, &skew)?;
    let gn = estimate_norm_2(&gram, 200);
    let sn = estimate_norm_2(&skew, 200);
    let a = gram.linear_combination(1.0 / gn, 1.0 / sn, &skew)?;
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    Ok((a, v))
}
