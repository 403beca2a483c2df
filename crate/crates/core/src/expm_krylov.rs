//! The Krylov approximant `y_k(s) = V_k exp(-s H_k) (β e_1)` and its
//! residual `r_k(s) = -y_k'(s) - A y_k(s) = β_k(s) v_{k+1}` with
//! `β_k(s) = -h_{k+1,k} e_k^T exp(-s H_k) (β e_1)`.

use crate::arnoldi::{ArnoldiDecomposition, Projection};
use crate::dense::{expm, log_norm_2, norm_2, phi1};
use crate::error::{KrylovError, Result};

/// A residual norm `‖r_k(s)‖` sampled at time `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub s: f64,
    pub rnorm: f64,
}

/// Equispaced residual checkpoints `s_q = (q / count) t`, `q = 1..=count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorGrid {
    count: usize,
    t: f64,
}

impl MonitorGrid {
    pub const DEFAULT_COUNT: usize = 6;

    pub fn new(count: usize, t: f64) -> Result<Self> {
        if count == 0 {
            return Err(KrylovError::InvalidConfig("monitor grid needs at least one point".into()));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(KrylovError::InvalidConfig(format!("monitor horizon must be positive, got {t}")));
        }
        Ok(Self { count, t })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn horizon(&self) -> f64 {
        self.t
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.count).map(move |q| if q == self.count { self.t } else { self.t * q as f64 / self.count as f64 })
    }
}

fn check_time(s: f64) -> Result<()> {
    if s < 0.0 || s.is_nan() {
        Err(KrylovError::NegativeTime(s))
    } else {
        Ok(())
    }
}

/// `exp(-s H_k) (β e_1)`, the coordinates of `y_k(s)` in the Krylov basis.
pub fn coefficients(p: &Projection, s: f64) -> Result<Vec<f64>> {
    check_time(s)?;
    let e = expm(&p.h.scaled(-s))?;
    Ok(e.column(0).into_iter().map(|x| p.beta * x).collect())
}

/// `y_k(s)`.
pub fn evaluate(d: &ArnoldiDecomposition, s: f64) -> Result<Vec<f64>> {
    if d.k() == 0 {
        return Err(KrylovError::InvalidConfig("evaluate needs at least one Arnoldi step".into()));
    }
    let u = coefficients(&d.projection(), s)?;
    Ok(d.combine(&u))
}

/// `β_k(s)`; its absolute value is `‖r_k(s)‖`.
pub fn residual_scalar(p: &Projection, s: f64) -> Result<f64> {
    check_time(s)?;
    if p.h_next == 0.0 {
        return Ok(0.0);
    }
    let u = coefficients(p, s)?;
    Ok(-p.h_next * u[p.k() - 1])
}

/// A-priori bound `s h_{k+1,k} ‖H_k‖ β φ₁(-s ω_k)` on `‖r_k(s)‖`, where
/// `ω_k = λ_min((H_k + H_k^T)/2)`.
pub fn residual_bound(p: &Projection, s: f64) -> Result<f64> {
    check_time(s)?;
    if s == 0.0 || p.h_next == 0.0 {
        return Ok(0.0);
    }
    let omega = log_norm_2(&p.h)?;
    let hnorm = norm_2(&p.h)?;
    Ok(s * p.h_next * hnorm * p.beta * phi1(-s * omega))
}

/// Residual norms at the given times.
pub fn residual_curve(p: &Projection, times: &[f64]) -> Result<Vec<ResidualSample>> {
    times
        .iter()
        .map(|&s| {
            Ok(ResidualSample {
                s,
                rnorm: residual_scalar(p, s)?.abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorOutcome {
    pub converged: bool,
    pub worst: ResidualSample,
}

/// Checks `max_q ‖r_k(s_q)‖ ≤ tol` on the monitor grid.
pub fn monitor(p: &Projection, grid: &MonitorGrid, tol: f64) -> Result<MonitorOutcome> {
    if p.h_next == 0.0 {
        return Ok(MonitorOutcome {
            converged: true,
            worst: ResidualSample {
                s: grid.horizon(),
                rnorm: 0.0,
            },
        });
    }
    let mut worst = ResidualSample { s: 0.0, rnorm: -1.0 };
    for s in grid.points() {
        let r = residual_scalar(p, s)?.abs();
        if r > worst.rnorm {
            worst = ResidualSample { s, rnorm: r };
        }
    }
    Ok(MonitorOutcome {
        converged: worst.rnorm <= tol,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;

    #[test]
    fn grid_points_end_at_horizon() {
        let g = MonitorGrid::new(6, 0.3).unwrap();
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts.len(), 6);
        assert_eq!(*pts.last().unwrap(), 0.3);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(MonitorGrid::new(0, 1.0).is_err());
        assert!(MonitorGrid::new(3, 0.0).is_err());
    }

    #[test]
    fn evaluate_at_zero_returns_start_vector() {
        let a = DenseMatrix::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![-1.0, 3.0, 0.5],
            vec![0.0, 0.2, 1.0],
        ]);
        let v = [0.3, -1.2, 2.0];
        let mut d = ArnoldiDecomposition::start(&a, &v).unwrap();
        d.step(&a).unwrap();
        d.step(&a).unwrap();
        let y = evaluate(&d, 0.0).unwrap();
        for (yi, vi) in y.iter().zip(v) {
            assert!((yi - vi).abs() < 1e-14);
        }
        assert_eq!(residual_scalar(&d.projection(), 0.0).unwrap(), 0.0);
        assert_eq!(residual_bound(&d.projection(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_operator_gives_scalar_decay() {
        let a = DenseMatrix::identity(3);
        let v = [1.0, -2.0, 0.5];
        let mut d = ArnoldiDecomposition::start(&a, &v).unwrap();
        d.step(&a).unwrap();
        let y = evaluate(&d, 0.7).unwrap();
        for (yi, vi) in y.iter().zip(v) {
            assert!((yi - (-0.7f64).exp() * vi).abs() < 1e-15);
        }
        let p = d.projection();
        assert_eq!(residual_scalar(&p, 0.7).unwrap(), 0.0);
        assert_eq!(residual_bound(&p, 0.7).unwrap(), 0.0);
        let m = monitor(&p, &MonitorGrid::new(6, 1.0).unwrap(), 1e-30).unwrap();
        assert!(m.converged);
        assert_eq!(m.worst.rnorm, 0.0);
    }

    #[test]
    fn infinite_tolerance_always_converges() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 5.0], vec![-5.0, 1.0]]);
        let mut d = ArnoldiDecomposition::start(&a, &[1.0, 1.0]).unwrap();
        d.step(&a).unwrap();
        let m = monitor(&d.projection(), &MonitorGrid::new(6, 1.0).unwrap(), f64::INFINITY).unwrap();
        assert!(m.converged);
        assert!(m.worst.rnorm > 0.0);
    }

    #[test]
    fn negative_time_is_rejected() {
        let a = DenseMatrix::identity(2);
        let mut d = ArnoldiDecomposition::start(&a, &[1.0, 0.0]).unwrap();
        d.step(&a).unwrap();
        assert_eq!(evaluate(&d, -1.0).unwrap_err(), KrylovError::NegativeTime(-1.0));
        assert!(residual_scalar(&d.projection(), -0.1).is_err());
        assert!(residual_bound(&d.projection(), -0.1).is_err());
    }
}
