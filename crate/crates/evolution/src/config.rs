//! Stepper configuration and trajectories.

use std::fmt;
use std::str::FromStr;

use tomo_core::{Error, Result, Which};
use tomo_transforms::RampFilterSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Exact characteristics for potentials of degree at most two.
    CharacteristicsQuadratic,
    /// Spectral-in-X, RK4-in-time integration of the tomographic equation.
    SpectralRk4,
    /// Reconstruct marginals, evolve them with the oracle solvers, re-project.
    OraclePipeline,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::CharacteristicsQuadratic => "characteristics-quadratic",
            Scheme::SpectralRk4 => "spectral-rk4",
            Scheme::OraclePipeline => "oracle-pipeline",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "characteristics-quadratic" => Scheme::CharacteristicsQuadratic,
            "spectral-rk4" => Scheme::SpectralRk4,
            "oracle-pipeline" => Scheme::OraclePipeline,
            other => return Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        })
    }
}

/// How `∂/∂θ` is discretized on the reflection-extended angle circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaDerivative {
    /// Fourier differentiation over the `2π` extension.
    Spectral,
    /// Fourth-order centered differences.
    FourthOrder,
}

impl ThetaDerivative {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaDerivative::Spectral => "spectral",
            ThetaDerivative::FourthOrder => "fd4",
        }
    }
}

impl fmt::Display for ThetaDerivative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThetaDerivative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "spectral" => ThetaDerivative::Spectral,
            "fd4" => ThetaDerivative::FourthOrder,
            other => return Err(Error::InvalidArgument(format!("unknown theta derivative '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    /// Requested step; split into substeps when above the stability bound.
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub which_quantum: Which,
    /// Filter for re-tomography in the oracle pipeline.
    pub filter: RampFilterSpec,
    pub theta_derivative: ThetaDerivative,
    /// Save every this many steps; `None` keeps the initial and final states only.
    pub save_every: Option<usize>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-3,
            t_final: 1.0,
            scheme: Scheme::SpectralRk4,
            which_quantum: Which::First,
            filter: RampFilterSpec::default(),
            theta_derivative: ThetaDerivative::Spectral,
            save_every: None,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !self.t_final.is_finite() {
            return Err(Error::InvalidArgument("t_final must be finite".into()));
        }
        if self.save_every == Some(0) {
            return Err(Error::InvalidArgument("save stride must be at least 1".into()));
        }
        self.filter.validate()
    }

    /// Number of steps and the step actually used, `t_final / steps`.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.t_final.abs() / self.dt).round().max(1.0) as usize;
        if self.t_final == 0.0 {
            return (0, 0.0);
        }
        (n, self.t_final / n as f64)
    }

    /// Whether step `k` (1-based) of `n` is saved.
    pub fn saves(&self, k: usize, n: usize) -> bool {
        k == n || self.save_every.is_some_and(|s| k % s == 0)
    }
}

/// What the stepper did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepLog {
    pub steps: usize,
    /// Substeps per step forced by the stability bound.
    pub substeps: usize,
    /// Substep actually integrated.
    pub h: f64,
    /// Stability bound from the generator's estimated spectral radius.
    pub dt_max: f64,
    pub spectral_radius: f64,
    /// Largest per-angle normalization error seen at any substep.
    pub max_drift: f64,
    /// Normalization error of each saved snapshot.
    pub drifts: Vec<f64>,
    /// Rank of the separated representation of the joint state.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<f64>,
    pub snapshots: Vec<T>,
    pub log: StepLog,
}

impl<T> Trajectory<T> {
    pub fn last(&self) -> &T {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}
