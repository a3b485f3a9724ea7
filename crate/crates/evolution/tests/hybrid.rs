use std::f64::consts::PI;

use ndarray::Array4;
use tomo_core::{
    marginal_with_tolerance, AxisGrid, AxisKind, Error, OpticalTomogram1, OpticalTomogram2, Tolerances, Which,
};
use tomo_evolution::{
    evolve, evolve_hybrid, evolve_quadratic_exact2, marginal_consistency_report, EvolutionConfig,
    OracleSet, PolynomialPotential, QuantumState, Scheme,
};
use tomo_hybrid::{compose_mixture, compose_product, Branch, HybridSpec};
use tomo_states::{make_phase_space, make_tomogram, make_wavefunction, StateSpec};
use tomo_transforms::radon_forward;

fn grid(nx: usize, nt: usize) -> (AxisGrid, AxisGrid) {
    (AxisGrid::centered(AxisKind::Position, 8.0, nx).unwrap(), AxisGrid::angles(nt).unwrap())
}

fn tomogram(spec: StateSpec, x: &AxisGrid, t: &AxisGrid) -> OpticalTomogram1 {
    make_tomogram(&spec, x, t).unwrap()
}

fn classical(q0: f64, p0: f64) -> StateSpec {
    StateSpec::ClassicalGaussian { sigma_q: 0.7, sigma_p: 0.6, q0, p0 }
}

fn linf4(a: &Array4<f64>, b: &Array4<f64>) -> f64 {
    (a - b).iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

fn cfg(dt: f64, t_final: f64) -> EvolutionConfig {
    EvolutionConfig { dt, t_final, ..EvolutionConfig::default() }
}

fn default_product() -> OpticalTomogram2 {
    let (x, t) = grid(64, 32);
    compose_product(
        &tomogram(StateSpec::Coherent { q0: 2.0, p0: 0.0 }, &x, &t),
        &tomogram(classical(-1.0, 0.5), &x, &t),
    )
    .unwrap()
}

fn swapped(w: &OpticalTomogram2) -> OpticalTomogram2 {
    OpticalTomogram2::new(
        w.x2_axis().clone(),
        w.x1_axis().clone(),
        w.theta2_axis().clone(),
        w.theta1_axis().clone(),
        w.values().clone().permuted_axes([1, 0, 3, 2]).as_standard_layout().to_owned(),
    )
    .unwrap()
}

#[test]
fn harmonic_hybrid_matches_the_exact_map() {
    let w0 = default_product();
    let u = PolynomialPotential::harmonic(1.0);
    let c = EvolutionConfig { save_every: Some(50), ..cfg(0.01, PI / 2.0) };
    let traj = evolve_hybrid(&w0, &u, &u, &c).unwrap();
    let exact = evolve_quadratic_exact2(&w0, [&u, &u], PI / 2.0).unwrap();
    let err = linf4(traj.last().values(), exact.values());
    assert!(err < 1e-2, "L∞ {err}");
    assert!(err < 1e-6, "RK4 at dt = 0.01 should be far inside the bound, got {err}");
    assert_eq!(traj.len(), traj.times.len());
    for w in &traj.snapshots {
        w.clone().validate(&Tolerances::EVOLUTION).unwrap();
    }
    assert!(traj.log.drifts.iter().all(|d| *d < 1e-4));
}

#[test]
fn halving_the_step_improves_agreement_at_fourth_order() {
    let w0 = default_product();
    let u = PolynomialPotential::harmonic(1.0);
    let exact = evolve_quadratic_exact2(&w0, [&u, &u], PI / 2.0).unwrap();
    let errs: Vec<f64> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&dt| linf4(evolve_hybrid(&w0, &u, &u, &cfg(dt, PI / 2.0)).unwrap().last().values(), exact.values()))
        .collect();
    for pair in errs.windows(2) {
        assert!(pair[0] / pair[1] >= 8.0, "errors {errs:?}");
    }
}

#[test]
fn correlated_mixtures_evolve_branch_by_branch() {
    let (x, t) = grid(64, 32);
    let branch = |s: f64| {
        Branch::new(
            0.5,
            tomogram(StateSpec::Coherent { q0: 2.0 * s, p0: 0.0 }, &x, &t),
            tomogram(classical(-2.0 * s, 0.0), &x, &t),
        )
    };
    let w0 = compose_mixture(&HybridSpec::mixture(vec![branch(1.0), branch(-1.0)])).unwrap();
    let (uq, uc) = (PolynomialPotential::harmonic(1.0), PolynomialPotential::new(&[0.0, 0.1, 0.3]).unwrap());
    let traj = evolve_hybrid(&w0, &uq, &uc, &cfg(0.01, 1.0)).unwrap();
    assert!(traj.log.rank >= 2);
    let exact = evolve_quadratic_exact2(&w0, [&uq, &uc], 1.0).unwrap();
    let err = linf4(traj.last().values(), exact.values());
    assert!(err < 1e-6, "L∞ {err}");
}

#[test]
fn free_product_marginal_follows_the_von_neumann_oracle() {
    let (x, t) = grid(64, 32);
    let axis = AxisGrid::centered(AxisKind::MatrixX, 12.0, 512).unwrap();
    let spec = StateSpec::Coherent { q0: 0.5, p0: -0.5 };
    let psi = QuantumState::Pure { axis: axis.clone(), psi: make_wavefunction(&spec, &axis).unwrap() };
    let w0 = compose_product(&psi.tomogram(&x, &t).unwrap(), &tomogram(classical(0.0, 0.0), &x, &t)).unwrap();
    let u = PolynomialPotential::zero();
    let traj = evolve_hybrid(&w0, &u, &u, &cfg(0.01, 1.0)).unwrap();
    let oracle = tomo_evolution::evolve_vonneumann_oracle(&psi, &u, 1.0, 0.01).unwrap().tomogram(&x, &t).unwrap();
    let m = marginal_with_tolerance(traj.last(), Which::First, Tolerances::EVOLUTION.marginal).unwrap();
    let err = (m.values() - oracle.values()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(err < 2e-2, "L∞ {err}");
}

fn quartic_oracles(x: &AxisGrid, t: &AxisGrid) -> (OracleSet, OpticalTomogram2) {
    let axis = AxisGrid::centered(AxisKind::MatrixX, 10.0, 512).unwrap();
    let spec = StateSpec::Coherent { q0: 1.0, p0: 0.5 };
    let quantum = QuantumState::Pure { axis: axis.clone(), psi: make_wavefunction(&spec, &axis).unwrap() };
    let q = AxisGrid::centered(AxisKind::PhaseQ, 8.0, 128).unwrap();
    let f0 = make_phase_space(&classical(-1.0, 0.5), &q, &q.with_kind(AxisKind::PhaseP).unwrap()).unwrap();
    let w0 = compose_product(&quantum.tomogram(x, t).unwrap(), &radon_forward(&f0, x, t).unwrap()).unwrap();
    let oracles = OracleSet {
        quantum,
        classical: f0,
        u_quantum: PolynomialPotential::new(&[0.0, 0.0, 0.0, 0.0, 0.1]).unwrap(),
        u_classical: PolynomialPotential::harmonic(1.0),
        dt: 2e-4,
    };
    (oracles, w0)
}

#[test]
fn quartic_hybrid_marginals_follow_their_oracles() {
    let (x, t) = grid(64, 32);
    let (oracles, w0) = quartic_oracles(&x, &t);
    let c = EvolutionConfig { save_every: Some(5), ..cfg(0.01, 0.1) };
    let traj = evolve_hybrid(&w0, &oracles.u_quantum, &oracles.u_classical, &c).unwrap();
    let rows = marginal_consistency_report(&traj, &oracles, &c).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].t, 0.0);
    assert!(rows[0].quantum_linf < 1e-12 && rows[0].classical_linf < 1e-12, "{:?}", rows[0]);
    for r in &rows {
        assert!(r.quantum_linf <= 5e-2 && r.classical_linf <= 2e-2, "{r:?}");
        assert!(r.quantum_l1 <= r.quantum_linf * 16.0 && r.classical_l1 >= 0.0);
    }
}

#[test]
fn roles_of_the_particles_are_symmetric() {
    let (x, t) = grid(64, 32);
    let w0 = compose_product(
        &tomogram(StateSpec::Coherent { q0: 1.0, p0: 0.0 }, &x, &t),
        &tomogram(classical(0.0, 1.0), &x, &t),
    )
    .unwrap();
    let (uq, uc) = (
        PolynomialPotential::new(&[0.0, 0.0, 0.0, 0.0, 0.05]).unwrap(),
        PolynomialPotential::new(&[0.0, 0.0, 0.2, 0.0, 0.05]).unwrap(),
    );
    let first = evolve_hybrid(&w0, &uq, &uc, &cfg(0.01, 0.02)).unwrap();
    let c = EvolutionConfig { which_quantum: Which::Second, ..cfg(0.01, 0.02) };
    let second = evolve_hybrid(&swapped(&w0), &uq, &uc, &c).unwrap();
    assert!(linf4(swapped(second.last()).values(), first.last().values()) < 1e-14);
}

#[test]
fn scheme_dispatch() {
    let (x, t) = grid(64, 32);
    let w0 = compose_product(
        &tomogram(StateSpec::Coherent { q0: 1.0, p0: 0.0 }, &x, &t),
        &tomogram(classical(0.0, 0.5), &x, &t),
    )
    .unwrap();
    let u = PolynomialPotential::harmonic(1.0);
    let exact = EvolutionConfig { scheme: Scheme::CharacteristicsQuadratic, ..cfg(0.1, 0.5) };
    let a = evolve(&w0, &u, &u, &exact).unwrap();
    assert_eq!(a.last(), &evolve_quadratic_exact2(&w0, [&u, &u], 0.5).unwrap());
    let b = evolve(&w0, &u, &u, &cfg(0.01, 0.5)).unwrap();
    assert!(linf4(a.last().values(), b.last().values()) < 1e-8);
    let err = evolve_hybrid(&w0, &u, &u, &exact).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)), "{err}");
    let quartic = PolynomialPotential::new(&[0.0, 0.0, 0.0, 0.0, 0.1]).unwrap();
    assert!(matches!(evolve(&w0, &quartic, &u, &exact), Err(Error::Degree { .. })));
}

#[test]
fn oracle_pipeline_tracks_the_exact_evolution_of_products() {
    let (x, t) = grid(64, 32);
    let w0 = compose_product(
        &tomogram(StateSpec::Coherent { q0: 1.0, p0: 0.0 }, &x, &t),
        &tomogram(classical(0.0, 0.5), &x, &t),
    )
    .unwrap();
    let u = PolynomialPotential::zero();
    let c = EvolutionConfig { scheme: Scheme::OraclePipeline, ..cfg(0.01, 1.0) };
    let piped = evolve(&w0, &u, &u, &c).unwrap();
    let exact = evolve_quadratic_exact2(&w0, [&u, &u], 1.0).unwrap();
    let err = linf4(piped.last().values(), exact.values());
    assert!(err < 2e-2, "L∞ {err}");
}

#[test]
fn unresolved_hybrid_runs_are_flagged() {
    let (x, t) = grid(40, 20);
    let (oracles, _) = quartic_oracles(&x, &t);
    let w0 = compose_product(&oracles.quantum.tomogram(&x, &t).unwrap(), &tomogram(classical(0.0, 0.0), &x, &t)).unwrap();
    let err = evolve_hybrid(&w0, &oracles.u_quantum, &oracles.u_classical, &cfg(0.01, 0.1)).unwrap_err();
    assert!(matches!(err, Error::Stability(_)), "{err}");
}
