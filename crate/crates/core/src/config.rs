use std::fmt;
use std::str::FromStr;

use crate::error::{KrylovError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rt,
    Art,
    SaiRt,
    FixedStep,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rt => "rt",
            Method::Art => "art",
            Method::SaiRt => "sai-rt",
            Method::FixedStep => "fixed-step",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = KrylovError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rt" => Ok(Method::Rt),
            "art" => Ok(Method::Art),
            "sai-rt" => Ok(Method::SaiRt),
            "fixed-step" => Ok(Method::FixedStep),
            other => Err(KrylovError::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

/// How work is charged when the adaptive driver compares restart lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostModel {
    /// Measured elapsed seconds.
    #[default]
    WallClock,
    /// One unit per stored operator entry per product, `k^3` units per
    /// dense exponential of a `k x k` projection.
    Deterministic,
}

impl FromStr for CostModel {
    type Err = KrylovError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" => Ok(CostModel::WallClock),
            "deterministic" => Ok(CostModel::Deterministic),
            other => Err(KrylovError::InvalidConfig(format!("unknown cost model '{other}'"))),
        }
    }
}

/// Shift γ of the shift-and-invert operator `(I + γA)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Shift {
    /// `γ = t / 10` with `t` the full time horizon.
    #[default]
    Auto,
    Fixed(f64),
}

impl Shift {
    pub fn resolve(self, t: f64) -> f64 {
        match self {
            Shift::Auto => t / 10.0,
            Shift::Fixed(g) => g,
        }
    }
}

impl FromStr for Shift {
    type Err = KrylovError;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Shift::Auto);
        }
        s.parse::<f64>()
            .map(Shift::Fixed)
            .map_err(|_| KrylovError::InvalidConfig(format!("gamma must be a number or 'auto', got '{s}'")))
    }
}

/// Knobs of the adaptive restart-length selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArtParams {
    /// Relative gain a cheaper length must promise before switching to it.
    pub min_gain: f64,
    /// Increment applied when the current (short) length is the best one.
    pub growth: usize,
}

impl Default for ArtParams {
    fn default() -> Self {
        Self {
            min_gain: 0.05,
            growth: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub t: f64,
    pub tol: f64,
    pub k_max: usize,
    pub method: Method,
    pub monitor_points: usize,
    /// Check the residual only every `monitor_stride` Arnoldi steps (and
    /// always at the last step of a cycle).
    pub monitor_stride: usize,
    pub delta_grid: usize,
    pub gamma: Shift,
    pub cost_model: CostModel,
    pub substeps: usize,
    pub max_restarts: usize,
    pub art: ArtParams,
    pub track_orthogonality: bool,
}

impl SolverConfig {
    pub fn new(t: f64, tol: f64, k_max: usize) -> Self {
        Self {
            t,
            tol,
            k_max,
            method: Method::Rt,
            monitor_points: 6,
            monitor_stride: 1,
            delta_grid: 200,
            gamma: Shift::Auto,
            cost_model: CostModel::WallClock,
            substeps: 1,
            max_restarts: 10_000,
            art: ArtParams::default(),
            track_orthogonality: false,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_cost_model(mut self, cost_model: CostModel) -> Self {
        self.cost_model = cost_model;
        self
    }

    pub fn with_gamma(mut self, gamma: Shift) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(KrylovError::InvalidConfig(m));
        if !(self.t > 0.0) || !self.t.is_finite() {
            return bad(format!("t must be positive and finite, got {}", self.t));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        let min_k = if self.method == Method::FixedStep { 1 } else { 2 };
        if self.k_max < min_k || self.k_max > n {
            return bad(format!("k_max must lie in [{min_k}, {n}], got {}", self.k_max));
        }
        if self.monitor_points == 0 || self.monitor_stride == 0 || self.delta_grid == 0 {
            return bad("monitor points, monitor stride and delta grid must be positive".into());
        }
        if self.substeps == 0 {
            return bad("substeps must be at least 1".into());
        }
        if self.method == Method::SaiRt {
            let g = self.gamma.resolve(self.t);
            if !(g > 0.0) || !g.is_finite() {
                return bad(format!("gamma must be positive, got {g}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_selectors() {
        assert_eq!("sai-rt".parse::<Method>().unwrap(), Method::SaiRt);
        assert!("gmres".parse::<Method>().is_err());
        assert_eq!("auto".parse::<Shift>().unwrap().resolve(2.0), 0.2);
        assert_eq!("0.5".parse::<Shift>().unwrap(), Shift::Fixed(0.5));
        assert_eq!("deterministic".parse::<CostModel>().unwrap(), CostModel::Deterministic);
    }

    #[test]
    fn validation() {
        let cfg = SolverConfig::new(1.0, 1e-6, 5);
        assert!(cfg.validate(10).is_ok());
        assert!(cfg.validate(4).is_err());
        assert!(SolverConfig::new(1.0, 1e-6, 1).validate(10).is_err());
        assert!(SolverConfig::new(1.0, 1e-6, 1)
            .with_method(Method::FixedStep)
            .validate(10)
            .is_ok());
        assert!(SolverConfig::new(0.0, 1e-6, 5).validate(10).is_err());
        assert!(SolverConfig::new(1.0, 0.0, 5).validate(10).is_err());
        assert!(SolverConfig::new(1.0, 1e-6, 5)
            .with_method(Method::SaiRt)
            .with_gamma(Shift::Fixed(-1.0))
            .validate(10)
            .is_err());
    }
}
