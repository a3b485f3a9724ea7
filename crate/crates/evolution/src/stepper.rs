//! RK4 integration of the tomographic equation.

use ndarray::Array2;
use tomo_core::{
    trapezoid, Error, OpticalTomogram1, OpticalTomogram2, Result, Tolerances, Which,
};

use crate::config::{EvolutionConfig, Scheme, StepLog, Trajectory};
use crate::lowrank::Separated;
use crate::operator::ModeGenerator;
use crate::potential::PolynomialPotential;

/// Largest tolerated per-angle normalization error during integration.
pub const DRIFT_TOL: f64 = 1e-4;

fn drift(integrals: impl Iterator<Item = f64>) -> f64 {
    integrals.fold(0.0, |m: f64, i| if i.is_finite() { m.max((i - 1.0).abs()) } else { f64::INFINITY })
}

fn require_rk4(cfg: &EvolutionConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.scheme != Scheme::SpectralRk4 {
        return Err(Error::InvalidArgument(format!("the RK4 stepper cannot run scheme {}", cfg.scheme)));
    }
    Ok(())
}

/// Step plan: `(steps, substeps, substep, dt_max, radius)`.
fn plan(cfg: &EvolutionConfig, gens: &[&ModeGenerator]) -> (usize, usize, f64, f64, f64) {
    let radius = gens.iter().map(|g| g.spectral_radius()).fold(0.0, f64::max);
    let dt_max = if radius > 0.0 { crate::operator::RK4_RADIUS / radius } else { f64::INFINITY };
    let (steps, h) = cfg.steps();
    let sub = if h == 0.0 { 1 } else { (h.abs() / dt_max).ceil().max(1.0) as usize };
    (steps, sub, h / sub as f64, dt_max, radius)
}

fn unstable(t: f64, d: f64) -> Error {
    Error::Stability(format!("normalization error {d:e} at t = {t} exceeds {DRIFT_TOL:e}"))
}

/// Evolves a single-particle tomogram.
pub fn evolve_mode(
    w0: &OpticalTomogram1,
    u: &PolynomialPotential,
    quantum: bool,
    cfg: &EvolutionConfig,
) -> Result<Trajectory<OpticalTomogram1>> {
    require_rk4(cfg)?;
    u.require_confining()?;
    let w0 = w0.clone().validate(&Tolerances::EVOLUTION)?;
    let gen = ModeGenerator::new(w0.x_axis(), w0.theta_axis(), u, quantum, cfg.theta_derivative)?;
    let (steps, sub, hs, dt_max, radius) = plan(cfg, &[&gen]);
    let dx = w0.x_axis().step();
    let norm_error = |w: &Array2<f64>| drift(w.columns().into_iter().map(|c| trapezoid(c.iter().copied(), dx)));
    let mut log = StepLog { steps, substeps: sub, h: hs, dt_max, spectral_radius: radius, rank: 1, ..StepLog::default() };
    let mut w = w0.values().clone();
    let d0 = norm_error(&w);
    log.drifts.push(d0);
    log.max_drift = d0;
    let mut times = vec![0.0];
    let mut snapshots = vec![w0.clone()];
    for k in 1..=steps {
        for s in 1..=sub {
            w = gen.rk4(&w, hs);
            let d = norm_error(&w);
            log.max_drift = log.max_drift.max(d);
            if d > DRIFT_TOL {
                return Err(unstable(((k - 1) * sub + s) as f64 * hs, d));
            }
        }
        if cfg.saves(k, steps) {
            times.push(cfg.t_final * k as f64 / steps as f64);
            log.drifts.push(norm_error(&w));
            snapshots.push(OpticalTomogram1::new(w0.x_axis().clone(), w0.theta_axis().clone(), w.clone())?);
        }
    }
    Ok(Trajectory { times, snapshots, log })
}

/// Evolves a two-particle hybrid tomogram; `cfg.which_quantum` selects the quantum particle.
pub fn evolve_hybrid(
    w0: &OpticalTomogram2,
    u_quantum: &PolynomialPotential,
    u_classical: &PolynomialPotential,
    cfg: &EvolutionConfig,
) -> Result<Trajectory<OpticalTomogram2>> {
    require_rk4(cfg)?;
    u_quantum.require_confining()?;
    u_classical.require_confining()?;
    let w0 = w0.clone().validate(&Tolerances::EVOLUTION)?;
    let (u1, u2) = match cfg.which_quantum {
        Which::First => (u_quantum, u_classical),
        Which::Second => (u_classical, u_quantum),
    };
    let q1 = cfg.which_quantum == Which::First;
    let g1 = ModeGenerator::new(w0.x1_axis(), w0.theta1_axis(), u1, q1, cfg.theta_derivative)?;
    let g2 = ModeGenerator::new(w0.x2_axis(), w0.theta2_axis(), u2, !q1, cfg.theta_derivative)?;
    let (steps, sub, hs, dt_max, radius) = plan(cfg, &[&g1, &g2]);
    let mut state = Separated::factorize(&w0);
    let (x1, x2) = (w0.x1_axis().clone(), w0.x2_axis().clone());
    let norm_error = |s: &Separated| {
        if !s.is_finite() {
            return f64::INFINITY;
        }
        drift(s.angle_integrals(&x1, &x2).iter().copied())
    };
    let mut log = StepLog {
        steps,
        substeps: sub,
        h: hs,
        dt_max,
        spectral_radius: radius,
        rank: state.rank(),
        ..StepLog::default()
    };
    let d0 = norm_error(&state);
    log.drifts.push(d0);
    log.max_drift = d0;
    let mut times = vec![0.0];
    let mut snapshots = vec![w0.clone()];
    for k in 1..=steps {
        for s in 1..=sub {
            for a in state.first.iter_mut() {
                *a = g1.rk4(a, hs);
            }
            for b in state.second.iter_mut() {
                *b = g2.rk4(b, hs);
            }
            let d = norm_error(&state);
            log.max_drift = log.max_drift.max(d);
            if d > DRIFT_TOL {
                return Err(unstable(((k - 1) * sub + s) as f64 * hs, d));
            }
        }
        if cfg.saves(k, steps) {
            times.push(cfg.t_final * k as f64 / steps as f64);
            log.drifts.push(norm_error(&state));
            snapshots.push(state.assemble(&w0)?);
        }
    }
    Ok(Trajectory { times, snapshots, log })
}
