//! Shift-and-invert Krylov approximation with residual-time restarting.
//!
//! Arnoldi runs on `(I + γA)^{-1}`, giving `H̃_k` and `h̃_{k+1,k}`. The
//! approximant uses the back-transformed projection
//! `H_k = (H̃_k^{-1} - I) / γ`, and
//!
//! ```text
//! A V_k = V_k H_k - (h̃_{k+1,k}/γ) (I + γA) v_{k+1} e_k^T H̃_k^{-1}
//! r_k(s) = β_k(s) (I + γA) v_{k+1},
//! β_k(s) = β (h̃_{k+1,k}/γ) e_k^T H̃_k^{-1} exp(-s H_k) e_1.
//! ```
//!
//! Unlike the polynomial case `r_k(0) ≠ 0`, so there is no interval near
//! zero where the residual is guaranteed small. A restart instead jumps to
//! the time at which the residual is smallest, and that minimum becomes an
//! error in the restarted initial value. When it exceeds the tolerance the
//! report carries a warning.

use std::time::Instant;

use crate::arnoldi::ArnoldiDecomposition;
use crate::config::{Method, SolverConfig};
use crate::dense::{expm, DenseLu, DenseMatrix};
use crate::error::{KrylovError, Result};
use crate::expm_krylov::ResidualSample;
use crate::report::{AccuracyFloorWarning, CycleRecord, Solution, SolveReport};
use crate::restart::{monitor_units, CostMeter};
use crate::sparse::{CsrMatrix, LinearOperator};
use crate::sparse_lu::BandedLu;
use crate::vector::norm;

/// `x -> (I + γA)^{-1} x`, backed by a factorization computed once.
#[derive(Debug, Clone)]
pub struct SaiOperator {
    a: CsrMatrix,
    gamma: f64,
    lu: BandedLu,
}

impl SaiOperator {
    pub fn new(a: &CsrMatrix, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(KrylovError::InvalidConfig(format!("gamma must be positive, got {gamma}")));
        }
        let shifted = CsrMatrix::identity(a.n()).linear_combination(1.0, gamma, a)?;
        let lu = BandedLu::factor(&shifted)?;
        Ok(Self {
            a: a.clone(),
            gamma,
            lu,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn base(&self) -> &CsrMatrix {
        &self.a
    }

    /// `(I + γA) x`
    pub fn shifted_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.a.apply_vec(x);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi + self.gamma * *yi;
        }
        y
    }

    /// Bitwise hash of the stored factorization.
    pub fn fingerprint(&self) -> u64 {
        self.lu.fingerprint()
    }
}

impl LinearOperator for SaiOperator {
    fn dim(&self) -> usize {
        self.a.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.lu.solve(x, y);
    }

    fn work_units(&self) -> f64 {
        let (l, u) = self.lu.bandwidth();
        2.0 * (self.lu.n() * (l + u + 1)) as f64
    }
}

/// Projected quantities of a shift-and-invert Krylov space.
#[derive(Debug, Clone)]
pub struct SaiProjection {
    pub h_tilde: DenseMatrix,
    pub h_tilde_next: f64,
    /// `(H̃_k^{-1} - I) / γ`
    pub h: DenseMatrix,
    /// `e_k^T H̃_k^{-1}`
    pub last_row_inv: Vec<f64>,
    /// `‖(I + γA) v_{k+1}‖`, zero after a breakdown.
    pub w_norm: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SaiProjection {
    pub fn new(d: &ArnoldiDecomposition, op: &SaiOperator) -> Result<Self> {
        let k = d.k();
        if k == 0 {
            return Err(KrylovError::InvalidConfig("projection needs at least one step".into()));
        }
        let p = d.projection();
        let lu = DenseLu::new(&p.h).map_err(|_| KrylovError::SingularProjection)?;
        let inv = lu.inverse();
        let gamma = op.gamma();
        let h = inv
            .add_scaled(-1.0, &DenseMatrix::identity(k))
            .scaled(1.0 / gamma);
        if !h.is_finite() {
            return Err(KrylovError::SingularProjection);
        }
        let last_row_inv = inv.row(k - 1).to_vec();
        let w_norm = match d.next_vector() {
            Some(v) if p.h_next != 0.0 => norm(&op.shifted_apply(v)),
            _ => 0.0,
        };
        Ok(Self {
            h_tilde: p.h,
            h_tilde_next: p.h_next,
            h,
            last_row_inv,
            w_norm,
            beta: d.beta(),
            gamma,
        })
    }

    pub fn k(&self) -> usize {
        self.h.rows()
    }

    /// `exp(-s H_k) e_1`
    pub fn unit_coefficients(&self, s: f64) -> Result<Vec<f64>> {
        if s < 0.0 || s.is_nan() {
            return Err(KrylovError::NegativeTime(s));
        }
        Ok(expm(&self.h.scaled(-s))?.column(0))
    }

    /// `β_k(s)`; the residual norm is `|β_k(s)| * w_norm`.
    pub fn residual_scalar(&self, s: f64) -> Result<f64> {
        if self.h_tilde_next == 0.0 {
            return Ok(0.0);
        }
        let u = self.unit_coefficients(s)?;
        let dot: f64 = self.last_row_inv.iter().zip(&u).map(|(a, b)| a * b).sum();
        Ok(self.beta * self.h_tilde_next / self.gamma * dot)
    }

    pub fn residual_norm(&self, s: f64) -> Result<f64> {
        Ok(self.residual_scalar(s)?.abs() * self.w_norm)
    }
}

/// `β_k(s)` of the shift-and-invert residual.
pub fn sai_residual_scalar(p: &SaiProjection, s: f64) -> Result<f64> {
    p.residual_scalar(s)
}

/// Restart point of a shift-and-invert cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct SaiDeltaResult {
    pub delta: f64,
    /// `exp(-δ H_k) e_1`
    pub u: Vec<f64>,
    /// Residual norm at `delta`.
    pub floor: f64,
    /// `floor > tol`: the restart injects an error above the tolerance.
    pub warning: bool,
}

/// Chooses the restart time on the grid `s_i = i t / grid_size`,
/// `i = 1..=grid_size`.
///
/// If some grid points meet `tol`, the largest of them is taken. Otherwise
/// the residual minimizer is taken (ties toward larger `s`) and the result
/// is flagged. `s = 0` is excluded since it makes no progress.
pub fn sai_find_delta(p: &SaiProjection, t: f64, tol: f64, grid_size: usize) -> Result<SaiDeltaResult> {
    if grid_size == 0 {
        return Err(KrylovError::InvalidConfig("delta grid must have at least one cell".into()));
    }
    if !(t > 0.0) {
        return Err(KrylovError::NegativeTime(t));
    }
    let curve: Vec<ResidualSample> = (1..=grid_size)
        .map(|i| {
            let s = if i == grid_size { t } else { t * i as f64 / grid_size as f64 };
            Ok(ResidualSample {
                s,
                rnorm: p.residual_norm(s)?,
            })
        })
        .collect::<Result<_>>()?;

    let best = match curve.iter().rev().find(|r| r.rnorm <= tol) {
        Some(r) => *r,
        None => curve.iter().fold(curve[0], |b, r| if r.rnorm <= b.rnorm { *r } else { b }),
    };
    Ok(SaiDeltaResult {
        delta: best.s,
        u: p.unit_coefficients(best.s)?,
        floor: best.rnorm,
        warning: best.rnorm > tol,
    })
}

/// RT restarting of the shift-and-invert method, factoring `I + γA` once.
pub fn sai_rt_solve(a: &CsrMatrix, v: &[f64], cfg: &SolverConfig) -> Result<Solution> {
    let cfg = SolverConfig {
        method: Method::SaiRt,
        ..cfg.clone()
    };
    cfg.validate(a.n())?;
    let op = SaiOperator::new(a, cfg.gamma.resolve(cfg.t))?;
    sai_rt_solve_with(&op, v, &cfg)
}

/// As [`sai_rt_solve`] with a prebuilt operator; `γ` is taken from `op`.
pub fn sai_rt_solve_with(op: &SaiOperator, v: &[f64], cfg: &SolverConfig) -> Result<Solution> {
    let n = op.dim();
    let cfg = SolverConfig {
        method: Method::SaiRt,
        ..cfg.clone()
    };
    cfg.validate(n)?;
    if v.len() != n {
        return Err(KrylovError::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let started = Instant::now();
    let mut report = SolveReport::new(Method::SaiRt);
    let mut v = v.to_vec();
    let mut t_rem = cfg.t;
    let matvec_units = op.base().work_units();

    loop {
        if report.restarts() >= cfg.max_restarts {
            return Err(KrylovError::NoConvergence {
                restarts: report.restarts(),
                t_remaining: t_rem,
            });
        }
        let cycle = report.cycles.len();
        let mut d = match ArnoldiDecomposition::start(op, &v) {
            Ok(d) => d,
            Err(KrylovError::ZeroStartVector) => {
                report.elapsed = started.elapsed();
                return Ok(Solution { y: vec![0.0; n], report });
            }
            Err(e) => return Err(e),
        };
        let grid = crate::expm_krylov::MonitorGrid::new(cfg.monitor_points, t_rem)?;
        let mut meter = CostMeter::new(cfg.cost_model);
        let mut worst = f64::NAN;
        let mut proj = None;

        loop {
            meter.charge(op.work_units(), || d.step(op))?;
            let k = d.k();
            if d.breakdown() || k == cfg.k_max || k % cfg.monitor_stride == 0 {
                let units = matvec_units + monitor_units(cfg.monitor_points, k);
                let (p, w) = meter.charge(units, || -> Result<_> {
                    let p = SaiProjection::new(&d, op)?;
                    let mut w: f64 = 0.0;
                    for s in grid.points() {
                        w = w.max(p.residual_norm(s)?);
                    }
                    Ok((p, w))
                })?;
                worst = w;
                if w <= cfg.tol {
                    let u = p.unit_coefficients(t_rem)?;
                    let coeffs: Vec<f64> = u.iter().map(|x| x * p.beta).collect();
                    report.cycles.push(CycleRecord {
                        index: cycle,
                        restart_length: cfg.k_max,
                        steps: k,
                        delta: t_rem,
                        t_remaining: 0.0,
                        residual_max_monitor: w,
                        cost: meter.total(),
                        accuracy_floor: None,
                        orthogonality_loss: cfg.track_orthogonality.then(|| d.orthogonality_loss()),
                        finished: true,
                    });
                    report.elapsed = started.elapsed();
                    return Ok(Solution {
                        y: d.combine(&coeffs),
                        report,
                    });
                }
                proj = Some(p);
            }
            if k >= cfg.k_max {
                break;
            }
        }

        let p = match proj {
            Some(p) if p.k() == d.k() => p,
            _ => SaiProjection::new(&d, op)?,
        };
        let cost = meter.total();
        let dr = sai_find_delta(&p, t_rem, cfg.tol, cfg.delta_grid)?;
        let coeffs: Vec<f64> = dr.u.iter().map(|x| x * p.beta).collect();
        v = d.combine(&coeffs);
        t_rem -= dr.delta;
        let finished = !(t_rem > 0.0);
        if finished {
            t_rem = 0.0;
        }
        if dr.warning {
            report.warnings.push(AccuracyFloorWarning {
                cycle,
                floor: dr.floor,
                tol: cfg.tol,
                delta: dr.delta,
            });
        }
        report.cycles.push(CycleRecord {
            index: cycle,
            restart_length: cfg.k_max,
            steps: d.k(),
            delta: dr.delta,
            t_remaining: t_rem,
            residual_max_monitor: worst,
            cost,
            accuracy_floor: dr.warning.then_some(dr.floor),
            orthogonality_loss: cfg.track_orthogonality.then(|| d.orthogonality_loss()),
            finished,
        });
        if finished {
            report.elapsed = started.elapsed();
            return Ok(Solution { y: v, report });
        }
    }
}
