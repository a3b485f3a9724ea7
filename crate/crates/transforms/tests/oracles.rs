use std::f64::consts::PI;

use num_complex::Complex64;
use tomo_core::{AxisGrid, AxisKind, OpticalTomogram1, PhaseSpaceDensity, Tolerances};
use tomo_transforms::{
    classify, project_angle, radon_forward, reconstruct_density_matrix,
    reconstruct_phase_space, reconstruct_phase_space_on, reconstruct_wigner,
    tomogram_from_density_matrix, tomogram_from_wavefunction, Admissibility, RampFilterSpec,
};

fn phase_axes(half: f64, n: usize) -> (AxisGrid, AxisGrid) {
    let q = AxisGrid::centered(AxisKind::PhaseQ, half, n).unwrap();
    (q.clone(), q.with_kind(AxisKind::PhaseP).unwrap())
}

fn gaussian_density(q0: f64, p0: f64, sq: f64, sp: f64) -> PhaseSpaceDensity {
    let (q, p) = phase_axes(8.0, 128);
    PhaseSpaceDensity::from_fn(q, p, |q, p| {
        (-(q - q0).powi(2) / (2.0 * sq * sq) - (p - p0).powi(2) / (2.0 * sp * sp)).exp()
            / (2.0 * PI * sq * sp)
    })
    .unwrap()
}

fn gaussian_tomogram(x: &AxisGrid, t: &AxisGrid, q0: f64, p0: f64, vq: f64, vp: f64) -> OpticalTomogram1 {
    OpticalTomogram1::from_fn(x.clone(), t.clone(), |x, th| {
        let (c, s) = (th.cos(), th.sin());
        let v = vq * c * c + vp * s * s;
        (-(x - q0 * c - p0 * s).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
    })
    .unwrap()
}

fn linf(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    a.zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn ground_psi(axis: &AxisGrid) -> Vec<Complex64> {
    axis.points()
        .iter()
        .map(|&x| Complex64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0))
        .collect()
}

fn fock1_psi(axis: &AxisGrid) -> Vec<Complex64> {
    axis.points()
        .iter()
        .map(|&x| Complex64::new(2f64.sqrt() * PI.powf(-0.25) * x * (-x * x / 2.0).exp(), 0.0))
        .collect()
}

#[test]
fn forward_gaussian_matches_line_integral() {
    let f = gaussian_density(1.0, -0.5, 0.6, 0.9);
    let x = AxisGrid::default_position();
    let t = AxisGrid::default_angles();
    let w = radon_forward(&f, &x, &t).unwrap();
    let want = gaussian_tomogram(&x, &t, 1.0, -0.5, 0.36, 0.81);
    assert!(linf(w.values().iter().copied(), want.values().iter().copied()) < 1e-10);
    assert!(w.check(&Tolerances::DEFAULT).is_ok());
}

#[test]
fn forward_mean_follows_center() {
    let f = gaussian_density(2.0, 0.0, 0.8, 0.8);
    let w = radon_forward(&f, &AxisGrid::default_position(), &AxisGrid::default_angles()).unwrap();
    for (j, m) in tomo_transforms::radon::angle_means(&w).iter().enumerate() {
        let th = w.theta_axis().point(j);
        assert!((m - 2.0 * th.cos()).abs() < 1e-9);
    }
}

#[test]
fn extension_symmetry_of_projections() {
    let f = gaussian_density(1.5, 0.7, 0.5, 1.1);
    let v = f.values2().unwrap();
    let x = AxisGrid::default_position();
    let (q, p) = (&f.q_axes()[0], &f.p_axes()[0]);
    for &th in &[0.0, 0.4, 1.3, 2.9] {
        let a = project_angle(v, q, p, &x, th);
        let b = project_angle(v, q, p, &x, th + PI);
        let worst = (0..x.len()).fold(0.0f64, |m, i| m.max((a[i] - b[x.mirror_index(i)]).abs()));
        assert!(worst < 1e-9, "{th}: {worst}");
    }
}

#[test]
fn gaussian_round_trip() {
    let f = gaussian_density(1.0, -0.5, 1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt());
    let w = radon_forward(&f, &AxisGrid::default_position(), &AxisGrid::default_angles()).unwrap();
    let back = reconstruct_phase_space(&w, &RampFilterSpec::default()).unwrap();
    let err = linf(back.values().iter().copied(), f.values().iter().copied());
    assert!(err <= 1e-3, "{err}");
    assert!(back.sign_floor() >= -1e-6);
    assert!((back.integral() - 1.0).abs() < 1e-8);
}

#[test]
fn uniform_disk_ringing_is_bounded() {
    let (q, p) = phase_axes(8.0, 128);
    let r = 2.0;
    let f = PhaseSpaceDensity::from_fn(q, p, |q, p| {
        if q * q + p * p <= r * r { 1.0 / (PI * r * r) } else { 0.0 }
    })
    .unwrap()
    .normalize()
    .unwrap();
    let w = radon_forward(&f, &AxisGrid::default_position(), &AxisGrid::default_angles()).unwrap();
    let back = reconstruct_phase_space(&w, &RampFilterSpec::hann(0.5)).unwrap();
    assert!(back.sign_floor() >= -5e-3 * back.max_value(), "{}", back.sign_floor() / back.max_value());
}

#[test]
fn fock1_wigner_is_negative_at_origin() {
    let x = AxisGrid::default_position();
    let t = AxisGrid::default_angles();
    let w = OpticalTomogram1::from_fn(x, t, |x, _| 2.0 / PI.sqrt() * x * x * (-x * x).exp()).unwrap();
    let wig = reconstruct_wigner(&w, &RampFilterSpec::default()).unwrap();
    let origin = wig.nearest(0.0, 0.0);
    assert!((origin + 1.0 / PI).abs() < 1e-3, "{origin}");
    assert!((wig.min_value() + 1.0 / PI).abs() < 1e-3);
}

#[test]
fn ground_state_density_matrix() {
    let x = AxisGrid::default_position();
    let t = AxisGrid::default_angles();
    let w = OpticalTomogram1::from_fn(x.clone(), t, |x, _| (-x * x).exp() / PI.sqrt()).unwrap();
    let bridge = AxisGrid::centered(AxisKind::MatrixX, 8.0, 128).unwrap();
    let rho = reconstruct_density_matrix(&w, &bridge).unwrap();
    let psi = ground_psi(&bridge);
    let mut err = 0.0f64;
    for ((i, j), z) in rho.values().indexed_iter() {
        err = err.max((z - psi[i] * psi[j].conj()).norm());
    }
    assert!(err < 1e-3, "{err}");
    assert!((rho.purity() - 1.0).abs() < 1e-3);
    assert!((rho.trace() - 1.0).abs() < 1e-12);
    assert!(rho.is_quantum_admissible(1e-6));
}

#[test]
fn thermal_state_is_mixed_but_admissible() {
    let x = AxisGrid::default_position();
    let t = AxisGrid::default_angles();
    let w = gaussian_tomogram(&x, &t, 0.0, 0.0, 1.0, 1.0);
    let rho = reconstruct_density_matrix(&w, &x.with_kind(AxisKind::MatrixX).unwrap()).unwrap();
    assert!(rho.is_quantum_admissible(1e-6));
    // purity of a Gaussian state is 1/(2 sqrt(det Σ)) = 0.5
    assert!((rho.purity() - 0.5).abs() < 1e-3, "{}", rho.purity());
}

#[test]
fn oversqueezed_classical_gaussian_is_not_a_density_matrix() {
    let x = AxisGrid::default_position();
    let t = AxisGrid::default_angles();
    let w = gaussian_tomogram(&x, &t, 0.0, 0.0, 0.01, 0.01);
    let rho = reconstruct_density_matrix(&w, &x.with_kind(AxisKind::MatrixX).unwrap()).unwrap();
    assert!(!rho.is_quantum_admissible(1e-6), "{}", rho.eigen_floor());
}

#[test]
fn wavefunction_tomograms() {
    let src = AxisGrid::centered(AxisKind::MatrixX, 10.0, 512).unwrap();
    let x = AxisGrid::default_position();
    let t = AxisGrid::default_angles();
    let w0 = tomogram_from_wavefunction(&ground_psi(&src), &src, &x, &t).unwrap();
    let e0 = linf(w0.values().iter().copied(), w0.values().indexed_iter().map(|((i, _), _)| {
        let v = x.point(i);
        (-v * v).exp() / PI.sqrt()
    }));
    assert!(e0 < 1e-10, "{e0}");
    let w1 = tomogram_from_wavefunction(&fock1_psi(&src), &src, &x, &t).unwrap();
    let e1 = linf(w1.values().iter().copied(), w1.values().indexed_iter().map(|((i, _), _)| {
        let v = x.point(i);
        2.0 / PI.sqrt() * v * v * (-v * v).exp()
    }));
    assert!(e1 < 1e-10, "{e1}");
    // coherent state at (q0, p0): Gaussian with variance 1/2 centered at q0 cos θ + p0 sin θ
    let (q0, p0) = (2.0, 0.5);
    let psi: Vec<Complex64> = src
        .points()
        .iter()
        .map(|&v| Complex64::from_polar(PI.powf(-0.25) * (-(v - q0).powi(2) / 2.0).exp(), p0 * v))
        .collect();
    let wc = tomogram_from_wavefunction(&psi, &src, &x, &t).unwrap();
    let want = gaussian_tomogram(&x, &t, q0, p0, 0.5, 0.5);
    assert!(linf(wc.values().iter().copied(), want.values().iter().copied()) < 1e-8);
}

#[test]
fn position_slice_is_the_position_density() {
    let src = AxisGrid::centered(AxisKind::MatrixX, 8.0, 128).unwrap();
    let x = src.with_kind(AxisKind::Position).unwrap();
    let psi = fock1_psi(&src);
    let w = tomogram_from_wavefunction(&psi, &src, &x, &AxisGrid::default_angles()).unwrap();
    for i in 0..x.len() {
        assert_eq!(w.values()[[i, 0]], psi[i].norm_sqr());
    }
}

#[test]
fn density_matrix_route_matches_wavefunction_route() {
    let src = AxisGrid::centered(AxisKind::MatrixX, 8.0, 96).unwrap();
    let x = AxisGrid::centered(AxisKind::Position, 8.0, 64).unwrap();
    let t = AxisGrid::angles(16).unwrap();
    let psi: Vec<Complex64> = src
        .points()
        .iter()
        .map(|&v| Complex64::from_polar(PI.powf(-0.25) * (-(v + 1.0).powi(2) / 2.0).exp(), -0.7 * v))
        .collect();
    let a = tomogram_from_wavefunction(&psi, &src, &x, &t).unwrap();
    let rho = tomo_core::DensityMatrix::pure(src.clone(), &psi).unwrap();
    let b = tomogram_from_density_matrix(&rho, &x, &t).unwrap();
    assert!(linf(a.values().iter().copied(), b.values().iter().copied()) < 1e-10);
}

#[test]
fn truth_table_single_particle() {
    let x = AxisGrid::default_position();
    let t = AxisGrid::default_angles();
    let coherent = gaussian_tomogram(&x, &t, 2.0, 0.0, 0.5, 0.5);
    assert_eq!(classify(&coherent).unwrap().label, Admissibility::Both);
    let fock1 =
        OpticalTomogram1::from_fn(x.clone(), t.clone(), |x, _| 2.0 / PI.sqrt() * x * x * (-x * x).exp())
            .unwrap();
    assert_eq!(classify(&fock1).unwrap().label, Admissibility::QuantumOnly);
    let fine = AxisGrid::centered(AxisKind::Position, 3.0, 256).unwrap();
    let narrow = gaussian_tomogram(&fine, &AxisGrid::angles(128).unwrap(), 0.0, 0.0, 0.01, 0.01);
    let d = classify(&narrow).unwrap();
    assert_eq!(d.label, Admissibility::ClassicalOnly, "{d:?}");
}

#[test]
fn classification_survives_reflection() {
    // X → −X together with θ → θ + π is the identity on the stored data
    // when the tomogram is built from a phase-space density, so rebuilding
    // through the reflection must give the same label.
    let x = AxisGrid::default_position();
    let t = AxisGrid::default_angles();
    let w = gaussian_tomogram(&x, &t, 1.0, 1.0, 0.5, 0.5);
    let n = t.len();
    let reflected = OpticalTomogram1::new(
        x.clone(),
        t.clone(),
        ndarray::Array2::from_shape_fn((x.len(), n), |(i, j)| {
            // w(X, θ) = w(−X, θ + π) read back through the extension rule
            w.extended(x.mirror_index(i), j + n)
        }),
    )
    .unwrap();
    assert_eq!(reflected.values(), w.values());
    assert_eq!(classify(&reflected).unwrap().label, classify(&w).unwrap().label);
}

#[test]
fn quantum_fixture_integrates_to_one_classically() {
    let x = AxisGrid::default_position();
    let t = AxisGrid::default_angles();
    let w = OpticalTomogram1::from_fn(x.clone(), t, |x, _| 2.0 / PI.sqrt() * x * x * (-x * x).exp())
        .unwrap();
    let (q, p) = phase_axes(8.0, 128);
    let f = reconstruct_phase_space_on(&w, &RampFilterSpec::default(), &q, &p).unwrap();
    assert!((f.integral() - 1.0).abs() < 1e-8, "{}", f.integral());
}
