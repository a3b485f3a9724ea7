//! Comparison of evolved marginals against the oracle solvers, and the oracle pipeline scheme.

use num_complex::Complex64;
use rustfft::FftPlanner;
use tomo_core::{
    marginal_with_tolerance, trapezoid, AxisGrid, DensityMatrix, OpticalTomogram1,
    OpticalTomogram2, PhaseSpaceDensity, Result, Tolerances, Which,
};
use tomo_hybrid::compose_product;
use tomo_transforms::spectral::angular_frequencies;
use tomo_transforms::{
    radon_forward, reconstruct_density_matrix_with, reconstruct_phase_space, BridgeSpec,
};

use crate::config::{EvolutionConfig, StepLog, Trajectory};
use crate::oracle::{evolve_liouville_oracle, evolve_vonneumann_oracle, QuantumState};
use crate::potential::PolynomialPotential;

/// Initial states and potentials for the oracle solvers.
#[derive(Debug, Clone)]
pub struct OracleSet {
    pub quantum: QuantumState,
    pub classical: PhaseSpaceDensity,
    pub u_quantum: PolynomialPotential,
    pub u_classical: PolynomialPotential,
    /// Step of both oracle integrators.
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyRow {
    pub t: f64,
    pub quantum_linf: f64,
    /// Angle-averaged `∫|Δw| dX`.
    pub quantum_l1: f64,
    pub classical_linf: f64,
    pub classical_l1: f64,
}

fn deviations(a: &OpticalTomogram1, b: &OpticalTomogram1) -> (f64, f64) {
    let d = a.values() - b.values();
    let linf = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let step = a.x_axis().step();
    let l1 = d.columns().into_iter().map(|c| trapezoid(c.iter().map(|v| v.abs()), step)).sum::<f64>()
        / d.ncols() as f64;
    (linf, l1)
}

/// `f` restricted to the disk whose projections stay inside the X window at every angle.
fn visible(f: &PhaseSpaceDensity, x: &AxisGrid) -> Result<PhaseSpaceDensity> {
    let r2 = x.start().abs().min(x.last().abs()).powi(2);
    let (qa, pa) = (&f.q_axes()[0], &f.p_axes()[0]);
    let mut v = f.values2()?.to_owned();
    v.indexed_iter_mut().for_each(|((i, j), z)| {
        if qa.point(i).powi(2) + pa.point(j).powi(2) > r2 {
            *z = 0.0;
        }
    });
    PhaseSpaceDensity::single(qa.clone(), pa.clone(), v)
}

fn oracle_tomograms(
    oracles: &OracleSet,
    times: &[f64],
    axes: [(&AxisGrid, &AxisGrid); 2],
) -> Result<Vec<(OpticalTomogram1, OpticalTomogram1)>> {
    let mut quantum = oracles.quantum.clone();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t != now {
            quantum = evolve_vonneumann_oracle(&quantum, &oracles.u_quantum, t - now, oracles.dt)?;
            now = t;
        }
        // The classical oracle maps the initial density straight to time t.
        let f = if t == 0.0 {
            oracles.classical.clone()
        } else {
            evolve_liouville_oracle(&oracles.classical, &oracles.u_classical, t, oracles.dt)?
        };
        let wq = quantum.tomogram(axes[0].0, axes[0].1)?;
        let wc = radon_forward(&visible(&f, axes[1].0)?, axes[1].0, axes[1].1)?;
        out.push((wq, wc));
    }
    Ok(out)
}

/// One row per saved time: quantum marginal against the von Neumann oracle and
/// classical marginal against the forward-projected Liouville oracle.
pub fn marginal_consistency_report(
    trajectory: &Trajectory<OpticalTomogram2>,
    oracles: &OracleSet,
    cfg: &EvolutionConfig,
) -> Result<Vec<ConsistencyRow>> {
    let tol = Tolerances::EVOLUTION.marginal;
    let q = cfg.which_quantum;
    let c = q.other();
    let w0 = &trajectory.snapshots[0];
    let axes_of = |which: Which| match which {
        Which::First => (w0.x1_axis(), w0.theta1_axis()),
        Which::Second => (w0.x2_axis(), w0.theta2_axis()),
    };
    let refs = oracle_tomograms(oracles, &trajectory.times, [axes_of(q), axes_of(c)])?;
    trajectory
        .times
        .iter()
        .zip(&trajectory.snapshots)
        .zip(refs)
        .map(|((&t, w), (wq, wc))| {
            let (quantum_linf, quantum_l1) = deviations(&marginal_with_tolerance(w, q, tol)?, &wq);
            let (classical_linf, classical_l1) = deviations(&marginal_with_tolerance(w, c, tol)?, &wc);
            Ok(ConsistencyRow { t, quantum_linf, quantum_l1, classical_linf, classical_l1 })
        })
        .collect()
}

/// `P ρ P / tr(P ρ P)` with `P` the projector onto momenta `|k| ≤ p_max`; removes
/// window leakage beyond the momenta a reconstruction bridge can carry.
fn band_limit(rho: &DensityMatrix, p_max: f64) -> Result<DensityMatrix> {
    let axis = &rho.x_axes()[0];
    let n = axis.len();
    let keep: Vec<bool> = angular_frequencies(n, axis.step()).iter().map(|k| k.abs() <= p_max).collect();
    let mut planner = FftPlanner::new();
    let (fwd, inv) = (planner.plan_fft_forward(n), planner.plan_fft_inverse(n));
    let mut m = rho.values().clone();
    for _ in 0..2 {
        for mut col in m.columns_mut() {
            let mut buf = col.to_vec();
            fwd.process(&mut buf);
            buf.iter_mut().zip(&keep).for_each(|(z, &k)| if !k { *z = Complex64::new(0.0, 0.0) });
            inv.process(&mut buf);
            col.iter_mut().zip(&buf).for_each(|(o, v)| *o = v / n as f64);
        }
        m = m.t().mapv(|z| z.conj());
    }
    let trace = m.diag().iter().map(|z| z.re).sum::<f64>() * axis.step();
    DensityMatrix::from_kernel(vec![axis.clone()], m.mapv(|z| z / trace))
}

/// Oracle pipeline for uncorrelated states: reconstruct each marginal, evolve it with its
/// oracle, project back and recompose the product. Correlations in `w0` are not carried.
pub fn evolve_oracle_pipeline(
    w0: &OpticalTomogram2,
    u_quantum: &PolynomialPotential,
    u_classical: &PolynomialPotential,
    cfg: &EvolutionConfig,
) -> Result<Trajectory<OpticalTomogram2>> {
    cfg.validate()?;
    let q = cfg.which_quantum;
    let tol = Tolerances::EVOLUTION.marginal;
    let mq = marginal_with_tolerance(w0, q, tol)?;
    let mc = marginal_with_tolerance(w0, q.other(), tol)?;
    // A matrix axis twice as fine as the tomogram keeps the band edge of ρ well above
    // the momenta the Wigner bridge can carry, so the oracle's aliasing guard sees only physics.
    let xq = mq.x_axis();
    let fine = AxisGrid::new(xq.kind(), xq.start(), 0.5 * xq.step(), 2 * xq.len())?;
    let bridge = BridgeSpec::matching(&fine, cfg.filter)?;
    let p_max = bridge.p_axis.start().abs().max(bridge.p_axis.last().abs());
    let rho = band_limit(&reconstruct_density_matrix_with(&mq, &bridge)?, p_max)?;
    let f0 = reconstruct_phase_space(&mc, &cfg.filter)?;
    let oracles = OracleSet {
        quantum: QuantumState::Mixed(rho),
        classical: f0,
        u_quantum: u_quantum.clone(),
        u_classical: u_classical.clone(),
        dt: cfg.dt,
    };
    let (steps, h) = cfg.steps();
    let mut times = vec![0.0];
    times.extend((1..=steps).filter(|&k| cfg.saves(k, steps)).map(|k| cfg.t_final * k as f64 / steps as f64));
    let refs = oracle_tomograms(
        &oracles,
        &times[1..],
        [(mq.x_axis(), mq.theta_axis()), (mc.x_axis(), mc.theta_axis())],
    )?;
    let mut snapshots = vec![w0.clone()];
    for (wq, wc) in refs {
        snapshots.push(match q {
            Which::First => compose_product(&wq, &wc)?,
            Which::Second => compose_product(&wc, &wq)?,
        });
    }
    let drifts = snapshots
        .iter()
        .map(|w| w.angle_integrals().iter().fold(0.0f64, |m, i| m.max((i - 1.0).abs())))
        .collect::<Vec<_>>();
    let log = StepLog {
        steps,
        substeps: 1,
        h,
        dt_max: f64::INFINITY,
        spectral_radius: 0.0,
        max_drift: drifts.iter().copied().fold(0.0, f64::max),
        drifts,
        rank: 1,
    };
    Ok(Trajectory { times, snapshots, log })
}
