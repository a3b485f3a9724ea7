//! Time evolution of hybrid optical tomograms.
//!
//! The quantum particle evolves under the full operator expansion of its
//! potential, the classical particle under the first-order (Liouville) part;
//! both share the kinetic transport on the `(X, θ)` circle.

mod config;
mod lowrank;
mod operator;
mod oracle;
mod potential;
mod quadratic;
mod report;
mod stepper;

pub use config::{EvolutionConfig, Scheme, StepLog, ThetaDerivative, Trajectory};
pub use lowrank::{Separated, RANK_TOL};
pub use operator::{ModeGenerator, RK4_RADIUS};
pub use oracle::{
    evolve_liouville_oracle, evolve_vonneumann_oracle, evolve_wavefunction, QuantumState,
    ALIASING_TOL, LEAPFROG_LIMIT,
};
pub use potential::{expansion_table, ExpansionTerm, PolynomialPotential, MAX_DEGREE};
pub use quadratic::{evolve_quadratic_exact, evolve_quadratic_exact2, QuadraticFlow, QuadraticMap};
pub use report::{evolve_oracle_pipeline, marginal_consistency_report, ConsistencyRow, OracleSet};
pub use stepper::{evolve_hybrid, evolve_mode, DRIFT_TOL};

use tomo_core::{OpticalTomogram2, Result, Which};

/// Runs the scheme selected in `cfg` on a two-particle tomogram.
pub fn evolve(
    w0: &OpticalTomogram2,
    u_quantum: &PolynomialPotential,
    u_classical: &PolynomialPotential,
    cfg: &EvolutionConfig,
) -> Result<Trajectory<OpticalTomogram2>> {
    match cfg.scheme {
        Scheme::SpectralRk4 => evolve_hybrid(w0, u_quantum, u_classical, cfg),
        Scheme::OraclePipeline => evolve_oracle_pipeline(w0, u_quantum, u_classical, cfg),
        Scheme::CharacteristicsQuadratic => {
            cfg.validate()?;
            let u = match cfg.which_quantum {
                Which::First => [u_quantum, u_classical],
                Which::Second => [u_classical, u_quantum],
            };
            let (steps, h) = cfg.steps();
            let mut times = vec![0.0];
            let mut snapshots = vec![w0.clone()];
            for k in (1..=steps).filter(|&k| cfg.saves(k, steps)) {
                let t = cfg.t_final * k as f64 / steps as f64;
                times.push(t);
                snapshots.push(evolve_quadratic_exact2(w0, u, t)?);
            }
            let drifts: Vec<f64> = snapshots
                .iter()
                .map(|w| w.angle_integrals().iter().fold(0.0f64, |m, i| m.max((i - 1.0).abs())))
                .collect();
            let log = StepLog {
                steps,
                substeps: 1,
                h,
                dt_max: f64::INFINITY,
                max_drift: drifts.iter().copied().fold(0.0, f64::max),
                drifts,
                rank: 0,
                spectral_radius: 0.0,
            };
            Ok(Trajectory { times, snapshots, log })
        }
    }
}
