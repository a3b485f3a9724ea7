//! Grids, tomogram containers and the basic operations on them.
//!
//! Conventions: `ħ = 1`, quadrature `X = q cos θ + p sin θ`, angles stored on
//! `[0, π)` with `w(X, θ + π) = w(-X, θ)`, trapezoid quadrature throughout.

pub mod error;
pub mod grid;
pub mod tolerance;
pub mod tomogram;

pub use error::{Category, Error, Result};
pub use grid::{trapezoid, trapezoid_weight, AxisGrid, AxisKind};
pub use tolerance::Tolerances;
pub use tomogram::{
    hermiticity_defect, hermitize, marginal, marginal_with_tolerance, normalize, Check,
    DensityMatrix, InvariantReport, Normalize, OpticalTomogram1, OpticalTomogram2,
    PhaseSpaceDensity, Which,
};
