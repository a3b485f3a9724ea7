//! Classical and quantum admissibility of tomograms.

use std::fmt;
use std::str::FromStr;

use tomo_core::{
    marginal_with_tolerance, AxisGrid, AxisKind, Error, OpticalTomogram1, OpticalTomogram2,
    Result, Tolerances, Which,
};

use crate::density::{reconstruct_density_matrix2, reconstruct_density_matrix_with, BridgeSpec};
use crate::filter::RampFilterSpec;
use crate::inverse::{default_phase_axes, reconstruct_phase_space2, reconstruct_phase_space_on};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    ClassicalOnly,
    QuantumOnly,
    Both,
    Neither,
}

impl Admissibility {
    pub fn from_flags(classical: bool, quantum: bool) -> Self {
        match (classical, quantum) {
            (true, true) => Admissibility::Both,
            (true, false) => Admissibility::ClassicalOnly,
            (false, true) => Admissibility::QuantumOnly,
            (false, false) => Admissibility::Neither,
        }
    }

    pub fn is_classical(self) -> bool {
        matches!(self, Admissibility::Both | Admissibility::ClassicalOnly)
    }

    pub fn is_quantum(self) -> bool {
        matches!(self, Admissibility::Both | Admissibility::QuantumOnly)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Admissibility::ClassicalOnly => "classical-only",
            Admissibility::QuantumOnly => "quantum-only",
            Admissibility::Both => "both",
            Admissibility::Neither => "neither",
        }
    }
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Admissibility {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "classical-only" => Admissibility::ClassicalOnly,
            "quantum-only" => Admissibility::QuantumOnly,
            "both" => Admissibility::Both,
            "neither" => Admissibility::Neither,
            other => return Err(Error::InvalidArgument(format!("unknown label '{other}'"))),
        })
    }
}

/// Floors behind a verdict. Missing reconstructions (for negative tomograms) are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub label: Admissibility,
    /// Smallest tomogram value and the slack it was held to.
    pub tomogram_floor: f64,
    pub tomogram_eps: f64,
    /// Smallest and largest reconstructed phase-space values.
    pub sign_floor: Option<f64>,
    pub sign_max: Option<f64>,
    /// Smallest and largest eigenvalue of the reconstructed `Δx·ρ`.
    pub eigen_floor: Option<f64>,
    pub eigen_max: Option<f64>,
}

/// Verdict for a two-particle tomogram: joint test plus one per particle.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification2 {
    pub label: Admissibility,
    pub joint: Diagnostics,
    pub subsystems: [Diagnostics; 2],
}

/// Grids and slack used by [`classify`] and [`classify2`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub filter: RampFilterSpec,
    pub tol: Tolerances,
    /// Phase axes per particle for the joint classical test.
    pub joint_phase_axis: AxisGrid,
    /// Bridge grids per particle for the joint quantum test.
    pub joint_bridge: BridgeSpec,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        let filter = RampFilterSpec::default();
        ClassifyOptions {
            filter,
            tol: Tolerances::DEFAULT,
            joint_phase_axis: AxisGrid::centered(AxisKind::PhaseQ, 8.0, 32).expect("valid"),
            joint_bridge: BridgeSpec {
                x_axis: AxisGrid::centered(AxisKind::MatrixX, 6.0, 16).expect("valid"),
                p_axis: AxisGrid::centered(AxisKind::PhaseP, 8.0, 64).expect("valid"),
                filter,
            },
        }
    }
}

fn verdict(
    tomogram_floor: f64,
    tomogram_max: f64,
    tol: &Tolerances,
    classical: impl FnOnce() -> Result<(f64, f64)>,
    quantum: impl FnOnce() -> Result<(f64, f64)>,
) -> Result<Diagnostics> {
    let tomogram_eps = tol.grid_rel * tomogram_max.abs();
    let mut d = Diagnostics {
        label: Admissibility::Neither,
        tomogram_floor,
        tomogram_eps,
        sign_floor: None,
        sign_max: None,
        eigen_floor: None,
        eigen_max: None,
    };
    // A tomogram with negative probabilities is neither kind of state.
    if tomogram_floor < -tomogram_eps {
        return Ok(d);
    }
    let (fmin, fmax) = classical()?;
    let (emin, emax) = quantum()?;
    d.sign_floor = Some(fmin);
    d.sign_max = Some(fmax);
    d.eigen_floor = Some(emin);
    d.eigen_max = Some(emax);
    let c = fmin >= -tol.classical_rel * fmax.abs();
    let q = emin >= -tol.quantum_rel * emax.abs();
    d.label = Admissibility::from_flags(c, q);
    Ok(d)
}

/// Classifies a single-particle tomogram on its own X layout.
pub fn classify(w: &OpticalTomogram1) -> Result<Diagnostics> {
    classify_with(w, &ClassifyOptions::default())
}

pub fn classify_with(w: &OpticalTomogram1, opts: &ClassifyOptions) -> Result<Diagnostics> {
    let (q, p) = default_phase_axes(w.x_axis())?;
    let bridge = BridgeSpec::matching(w.x_axis(), opts.filter)?;
    verdict(
        w.sign_floor(),
        w.max_value(),
        &opts.tol,
        || {
            let f = reconstruct_phase_space_on(w, &opts.filter, &q, &p)?;
            Ok((f.sign_floor(), f.max_value()))
        },
        || {
            let rho = reconstruct_density_matrix_with(w, &bridge)?;
            Ok((rho.eigen_floor(), rho.eigen_max()))
        },
    )
}

/// Classifies a two-particle tomogram: joint reconstructions plus each marginal.
pub fn classify2(w: &OpticalTomogram2, opts: &ClassifyOptions) -> Result<Classification2> {
    let first = classify_with(&marginal_with_tolerance(w, Which::First, opts.tol.marginal)?, opts)?;
    let second = classify_with(&marginal_with_tolerance(w, Which::Second, opts.tol.marginal)?, opts)?;
    let q = opts.joint_phase_axis.with_kind(AxisKind::PhaseQ)?;
    let p = opts.joint_phase_axis.with_kind(AxisKind::PhaseP)?;
    let joint = verdict(
        w.sign_floor(),
        w.max_value(),
        &opts.tol,
        || {
            let f = reconstruct_phase_space2(w, &opts.filter, [&q, &q], [&p, &p])?;
            Ok((f.sign_floor(), f.max_value()))
        },
        || {
            let rho = reconstruct_density_matrix2(w, [&opts.joint_bridge, &opts.joint_bridge])?;
            Ok((rho.eigen_floor(), rho.eigen_max()))
        },
    )?;
    let label = Admissibility::from_flags(
        joint.label.is_classical() && first.label.is_classical() && second.label.is_classical(),
        joint.label.is_quantum() && first.label.is_quantum() && second.label.is_quantum(),
    );
    Ok(Classification2 { label, joint, subsystems: [first, second] })
}
