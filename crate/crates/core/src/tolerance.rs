/// Numerical slack applied to the exact inequalities of the representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed per-angle deviation of the integral from one.
    pub norm: f64,
    /// Negative slack for tomogram values, relative to the maximum value.
    pub grid_rel: f64,
    /// Negative slack for reconstructed phase-space densities, relative to the maximum.
    pub classical_rel: f64,
    /// Negative slack for density-matrix eigenvalues, relative to the largest eigenvalue.
    pub quantum_rel: f64,
    /// Allowed dependence of a marginal on the integrated-out angle.
    pub marginal: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        norm: 1e-8,
        grid_rel: 1e-9,
        classical_rel: 1e-6,
        quantum_rel: 1e-6,
        marginal: 1e-8,
    };

    /// Looser slack for time-stepped snapshots.
    pub const EVOLUTION: Tolerances = Tolerances {
        norm: 1e-4,
        grid_rel: 1e-4,
        classical_rel: 1e-6,
        quantum_rel: 1e-6,
        marginal: 1e-4,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}
