//! Residual-time restarting.
//!
//! A cycle runs Arnoldi for up to `k` steps while watching the residual
//! `‖r_k(s)‖` on a few points of `[0, t]`. If the residual never drops
//! below `tol` the cycle ends in a restart: the largest `δ` with
//! `‖r_k(s)‖ ≤ tol` on `[0, δ]` is located, the solution is advanced to
//! `y_k(δ)` and the remaining problem on `[0, t - δ]` starts over with a
//! fresh Krylov space. Because `r_k(0) = 0` for `k ≥ 2`, some `δ > 0`
//! always exists and the process converges for any restart length.
//!
//! The adaptive driver additionally samples `δ_k` and the cost of the
//! first `k` steps at a few checkpoints during each cycle and picks the
//! next cycle's length by minimizing `(t / δ_k) * cost_k`.

use std::time::Instant;

use crate::arnoldi::{ArnoldiDecomposition, Projection};
use crate::config::{ArtParams, CostModel, Method, SolverConfig};
use crate::dense::{expm, DenseMatrix};
use crate::error::{KrylovError, Result};
use crate::expm_krylov::{evaluate, monitor, MonitorGrid, MonitorOutcome};
use crate::report::{
    AdaptationReason, AdaptationRecord, CycleRecord, LengthEstimate, Solution, SolveReport,
};
use crate::sparse::LinearOperator;

/// Initial number of time points in the δ search.
pub const NT_INITIAL: usize = 100;
/// The δ search gives up once it would need more points than this.
pub const NT_CAP: usize = 1 << 20;

/// Outcome of the δ search: `y_k(δ) = V_k (β u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaResult {
    pub delta: f64,
    pub u: Vec<f64>,
    pub n_t: usize,
}

/// Finds the largest grid time `δ ≤ t` such that `‖r_k(s)‖ ≤ tol` on all
/// grid points of `[0, δ]`.
///
/// The grid has `n_t` uniform cells, `n_t` starting at [`NT_INITIAL`] and
/// doubling until the first cell end already satisfies the tolerance. The
/// returned `u` is recomputed directly as `exp(-δ H_k) e_1` rather than
/// taken from the marching recurrence.
pub fn find_delta(p: &Projection, t: f64, tol: f64) -> Result<DeltaResult> {
    if !(tol > 0.0) {
        return Err(KrylovError::InvalidConfig(format!("tol must be positive, got {tol}")));
    }
    if t < 0.0 || t.is_nan() {
        return Err(KrylovError::NegativeTime(t));
    }
    let k = p.k();
    let direct = |delta: f64| -> Result<DeltaResult> {
        Ok(DeltaResult {
            delta,
            u: expm(&p.h.scaled(-delta))?.column(0),
            n_t: 0,
        })
    };
    if p.h_next == 0.0 || t == 0.0 {
        return direct(t);
    }
    let residual = |u: &[f64]| (p.h_next * p.beta * u[k - 1]).abs();

    let mut n_t = NT_INITIAL;
    let step: DenseMatrix = loop {
        let e = expm(&p.h.scaled(-t / n_t as f64))?;
        if residual(&e.column(0)) <= tol {
            break e;
        }
        if n_t >= NT_CAP {
            return Err(KrylovError::Stagnation { n_t, tol });
        }
        // the last refinement is clamped so the cap itself is tried
        n_t = (2 * n_t).min(NT_CAP);
    };

    let mut u = vec![0.0; k];
    u[0] = 1.0;
    let mut delta = t;
    for i in 1..=n_t {
        u = step.matvec(&u);
        if residual(&u) > tol {
            delta = (i - 1) as f64 / n_t as f64 * t;
            break;
        }
    }
    let mut out = direct(delta)?;
    out.n_t = n_t;
    Ok(out)
}

/// Accumulates the work of a cycle under the configured cost model.
#[derive(Debug)]
pub(crate) struct CostMeter {
    model: CostModel,
    total: f64,
}

impl CostMeter {
    pub(crate) fn new(model: CostModel) -> Self {
        Self { model, total: 0.0 }
    }

    pub(crate) fn charge<T>(&mut self, units: f64, work: impl FnOnce() -> T) -> T {
        match self.model {
            CostModel::Deterministic => {
                self.total += units;
                work()
            }
            CostModel::WallClock => {
                let t0 = Instant::now();
                let out = work();
                self.total += t0.elapsed().as_secs_f64();
                out
            }
        }
    }

    pub(crate) fn total(&self) -> f64 {
        self.total
    }
}

pub(crate) fn monitor_units(points: usize, k: usize) -> f64 {
    points as f64 * (k as f64).powi(3)
}

/// Restart-length state of the adaptive driver.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtState {
    k_max: usize,
    checkpoints: Vec<usize>,
    current: usize,
}

impl ArtState {
    /// Checkpoints are `round(k_max/3)`, `round(2 k_max/3)`,
    /// `round(5 k_max/6)` and `k_max`, dropping any below 2.
    pub fn new(k_max: usize) -> Self {
        let km = k_max as f64;
        let mut checkpoints: Vec<usize> = [km / 3.0, 2.0 * km / 3.0, 5.0 * km / 6.0, km]
            .iter()
            .map(|x| x.round() as usize)
            .filter(|&k| k >= 2)
            .collect();
        checkpoints.sort_unstable();
        checkpoints.dedup();
        Self {
            k_max,
            checkpoints,
            current: k_max,
        }
    }

    pub fn checkpoints(&self) -> &[usize] {
        &self.checkpoints
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn is_checkpoint(&self, k: usize) -> bool {
        self.checkpoints.binary_search(&k).is_ok()
    }

    /// Picks the next restart length from `(k, cost_k, δ_k)` samples of the
    /// cycle that just ended on the interval of length `t`. The sample for
    /// the current length itself must be among them.
    pub fn decide(
        &mut self,
        cycle: usize,
        t: f64,
        samples: &[(usize, f64, f64)],
        params: &ArtParams,
    ) -> AdaptationRecord {
        let candidates: Vec<LengthEstimate> = samples
            .iter()
            .filter(|s| s.2 > 0.0)
            .map(|&(k, cost, delta)| LengthEstimate {
                k,
                delta,
                cost,
                estimate: t / delta * cost,
            })
            .collect();
        let previous = self.current;
        let current_est = candidates
            .iter()
            .find(|c| c.k == previous)
            .map_or(f64::INFINITY, |c| c.estimate);
        // ties resolve to the current length
        let best = candidates.iter().fold(None::<LengthEstimate>, |acc, c| match acc {
            None => Some(*c),
            Some(b) if c.estimate < b.estimate || (c.estimate == b.estimate && c.k == previous) => {
                Some(*c)
            }
            keep => keep,
        });

        let (next, reason) = match best {
            Some(b) if b.k != previous && b.estimate < (1.0 - params.min_gain) * current_est => {
                (b.k, AdaptationReason::Switched)
            }
            Some(b) if b.k == previous && previous < self.k_max => (
                (previous + params.growth).min(self.k_max),
                AdaptationReason::Grew,
            ),
            _ => (previous, AdaptationReason::Kept),
        };
        self.current = next;
        AdaptationRecord {
            after_cycle: cycle,
            previous_length: previous,
            next_length: next,
            reason,
            candidates,
        }
    }
}

/// RT restarting: fixed restart length `k_max`.
pub fn rt_solve<A: LinearOperator + ?Sized>(op: &A, v: &[f64], cfg: &SolverConfig) -> Result<Solution> {
    restarted(op, v, cfg, false)
}

/// ART restarting: the restart length is re-chosen after every restart.
/// Convergence is judged exactly as in [`rt_solve`]; only the cost changes.
pub fn art_solve<A: LinearOperator + ?Sized>(op: &A, v: &[f64], cfg: &SolverConfig) -> Result<Solution> {
    restarted(op, v, cfg, true)
}

fn check_vector(n: usize, v: &[f64]) -> Result<()> {
    if v.len() != n {
        return Err(KrylovError::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(KrylovError::NonFinite);
    }
    Ok(())
}

fn restarted<A: LinearOperator + ?Sized>(
    op: &A,
    v: &[f64],
    cfg: &SolverConfig,
    adaptive: bool,
) -> Result<Solution> {
    let n = op.dim();
    cfg.validate(n)?;
    check_vector(n, v)?;
    let started = Instant::now();
    let mut report = SolveReport::new(if adaptive { Method::Art } else { Method::Rt });
    let mut art = ArtState::new(cfg.k_max);
    let mut v = v.to_vec();
    let mut t_rem = cfg.t;

    loop {
        if report.restarts() >= cfg.max_restarts {
            return Err(KrylovError::NoConvergence {
                restarts: report.restarts(),
                t_remaining: t_rem,
            });
        }
        let cycle = report.cycles.len();
        let length = if adaptive { art.current() } else { cfg.k_max };
        let mut d = match ArnoldiDecomposition::start(op, &v) {
            Ok(d) => d,
            Err(KrylovError::ZeroStartVector) => {
                report.elapsed = started.elapsed();
                return Ok(Solution { y: vec![0.0; n], report });
            }
            Err(e) => return Err(e),
        };
        let grid = MonitorGrid::new(cfg.monitor_points, t_rem)?;
        let mut meter = CostMeter::new(cfg.cost_model);
        let mut samples: Vec<(usize, f64, f64)> = Vec::new();
        let mut last = MonitorOutcome {
            converged: false,
            worst: crate::expm_krylov::ResidualSample { s: 0.0, rnorm: f64::NAN },
        };

        loop {
            meter.charge(op.work_units(), || d.step(op))?;
            let k = d.k();
            if d.breakdown() || k == length || k % cfg.monitor_stride == 0 {
                let p = d.projection();
                last = meter.charge(monitor_units(cfg.monitor_points, k), || {
                    monitor(&p, &grid, cfg.tol)
                })?;
                if last.converged {
                    let y = evaluate(&d, t_rem)?;
                    report.cycles.push(CycleRecord {
                        index: cycle,
                        restart_length: length,
                        steps: k,
                        delta: t_rem,
                        t_remaining: 0.0,
                        residual_max_monitor: last.worst.rnorm,
                        cost: meter.total(),
                        accuracy_floor: None,
                        orthogonality_loss: cfg.track_orthogonality.then(|| d.orthogonality_loss()),
                        finished: true,
                    });
                    report.elapsed = started.elapsed();
                    return Ok(Solution { y, report });
                }
            }
            if k >= length {
                break;
            }
            if adaptive && art.is_checkpoint(k) {
                match find_delta(&d.projection(), t_rem, cfg.tol) {
                    Ok(dr) => samples.push((k, meter.total(), dr.delta)),
                    Err(KrylovError::Stagnation { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }

        let p = d.projection();
        let cost = meter.total();
        let dr = find_delta(&p, t_rem, cfg.tol)?;
        let coeffs: Vec<f64> = dr.u.iter().map(|x| x * p.beta).collect();
        v = d.combine(&coeffs);
        let t_cycle = t_rem;
        t_rem -= dr.delta;
        let finished = !(t_rem > 0.0);
        if finished {
            t_rem = 0.0;
        }
        report.cycles.push(CycleRecord {
            index: cycle,
            restart_length: length,
            steps: d.k(),
            delta: dr.delta,
            t_remaining: t_rem,
            residual_max_monitor: last.worst.rnorm,
            cost,
            accuracy_floor: None,
            orthogonality_loss: cfg.track_orthogonality.then(|| d.orthogonality_loss()),
            finished,
        });
        if finished {
            report.elapsed = started.elapsed();
            return Ok(Solution { y: v, report });
        }
        if adaptive {
            samples.push((d.k(), cost, dr.delta));
            let rec = art.decide(cycle, t_cycle, &samples, &cfg.art);
            report.adaptations.push(rec);
        }
    }
}

/// Time-stepping baseline: `[0, t]` is cut into `substeps` equal pieces
/// and each piece is solved by an unrestarted Arnoldi run of at most
/// `k_max` steps, checking the residual at the end of the piece only.
pub fn fixed_step_solve<A: LinearOperator + ?Sized>(
    op: &A,
    v: &[f64],
    cfg: &SolverConfig,
) -> Result<Solution> {
    let n = op.dim();
    let cfg_checked = SolverConfig {
        method: Method::FixedStep,
        ..cfg.clone()
    };
    cfg_checked.validate(n)?;
    check_vector(n, v)?;
    let started = Instant::now();
    let mut report = SolveReport::new(Method::FixedStep);
    let substeps = cfg.substeps;
    let tau = cfg.t / substeps as f64;
    let grid = MonitorGrid::new(1, tau)?;
    let mut v = v.to_vec();

    for sub in 0..substeps {
        let mut d = match ArnoldiDecomposition::start(op, &v) {
            Ok(d) => d,
            Err(KrylovError::ZeroStartVector) => {
                v = vec![0.0; n];
                break;
            }
            Err(e) => return Err(e),
        };
        let mut meter = CostMeter::new(cfg.cost_model);
        loop {
            meter.charge(op.work_units(), || d.step(op))?;
            let k = d.k();
            if d.breakdown() || k == cfg.k_max || k % cfg.monitor_stride == 0 {
                let p = d.projection();
                let out = meter.charge(monitor_units(1, k), || monitor(&p, &grid, cfg.tol))?;
                if out.converged {
                    v = evaluate(&d, tau)?;
                    let last = sub + 1 == substeps;
                    report.cycles.push(CycleRecord {
                        index: sub,
                        restart_length: cfg.k_max,
                        steps: k,
                        delta: tau,
                        t_remaining: if last { 0.0 } else { cfg.t - (sub + 1) as f64 * tau },
                        residual_max_monitor: out.worst.rnorm,
                        cost: meter.total(),
                        accuracy_floor: None,
                        orthogonality_loss: cfg.track_orthogonality.then(|| d.orthogonality_loss()),
                        finished: last,
                    });
                    break;
                }
            }
            if k >= cfg.k_max {
                return Err(KrylovError::NoConvergenceAtStep {
                    k_max: cfg.k_max,
                    substep: sub,
                });
            }
        }
    }
    report.elapsed = started.elapsed();
    Ok(Solution { y: v, report })
}
