use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;

use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64;
use proptest::prelude::*;
use tomo_core::{normalize, AxisGrid, AxisKind, Category, Error, OpticalTomogram1, PhaseSpaceDensity, Tolerances};
use tomo_evolution::{StepLog, Trajectory};
use tomo_hybrid::compose_product;
use tomo_io::{read_container, write_container, Container, Dtype, Kind, Object, Payload};
use tomo_states::{laguerre, make_density_matrix, make_tomogram, make_wavefunction, StateSpec};

fn default_tomogram(q0: f64) -> OpticalTomogram1 {
    let spec = StateSpec::Coherent { q0, p0: 0.5 };
    make_tomogram(&spec, &AxisGrid::default_position(), &AxisGrid::default_angles()).unwrap()
}

fn small(q0: f64) -> OpticalTomogram1 {
    let x = AxisGrid::centered(AxisKind::Position, 6.0, 24).unwrap();
    make_tomogram(&StateSpec::Coherent { q0, p0: 0.0 }, &x, &AxisGrid::angles(8).unwrap()).unwrap()
}

fn tol() -> Tolerances {
    Tolerances::DEFAULT
}

fn round_trip(object: &Object) -> (Object, Vec<u8>, Vec<u8>) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obj.tomo");
    let mut meta = BTreeMap::new();
    meta.insert("origin".to_string(), "test".to_string());
    write_container(object, meta.clone(), &path, &tol()).unwrap();
    let loaded = read_container(&path, &tol()).unwrap();
    assert!(!loaded.is_quarantined(), "{}", loaded.report.summary());
    assert_eq!(loaded.metadata.get("origin").map(String::as_str), Some("test"));
    let original = object.to_container(meta).unwrap();
    let reread = loaded.object.to_container(loaded.metadata.clone()).unwrap();
    assert_eq!(reread.header, original.header);
    (loaded.object, original.to_bytes().unwrap(), reread.to_bytes().unwrap())
}

#[test]
fn default_grid_tomogram_round_trips_bitwise() {
    let w = Object::Optical1(default_tomogram(1.0));
    let (back, a, b) = round_trip(&w);
    assert_eq!(back, w);
    assert_eq!(a, b);
    let Object::Optical1(wb) = back else { unreachable!() };
    let Object::Optical1(wa) = w else { unreachable!() };
    assert!(wa.values().iter().zip(wb.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn every_kind_round_trips() {
    let x = AxisGrid::centered(AxisKind::MatrixX, 6.0, 24).unwrap();
    let coherent = StateSpec::Coherent { q0: 0.5, p0: -0.5 };
    let q = AxisGrid::centered(AxisKind::PhaseQ, 6.0, 12).unwrap();
    let p = q.with_kind(AxisKind::PhaseP).unwrap();
    let gauss = |v: f64| (-v * v).exp();
    let cell = q.step() * p.step();
    let norm1 = (0..12).flat_map(|i| (0..12).map(move |j| (i, j))).map(|(i, j)| gauss(q.point(i)) * gauss(p.point(j))).sum::<f64>() * cell;
    let f1 = PhaseSpaceDensity::from_fn(q.clone(), p.clone(), |a, b| gauss(a) * gauss(b) / norm1).unwrap();
    let v2 = ArrayD::from_shape_fn(IxDyn(&[12, 12, 12, 12]), |ix| {
        gauss(q.point(ix[0])) * gauss(p.point(ix[1])) * gauss(q.point(ix[2])) * gauss(p.point(ix[3])) / (norm1 * norm1)
    });
    let f2 = PhaseSpaceDensity::new(vec![q.clone(), q.clone()], vec![p.clone(), p.clone()], v2).unwrap();
    let w2 = compose_product(&small(1.0), &small(-1.0)).unwrap();
    let log = StepLog { steps: 3, substeps: 2, h: 0.05, dt_max: 0.1, spectral_radius: 28.0, max_drift: 1e-13, drifts: vec![0.0, 1e-13], rank: 1 };
    let objects = [
        Object::Optical1(small(0.3)),
        Object::Optical2(w2.clone()),
        Object::PhaseSpace(f1),
        Object::PhaseSpace(f2),
        Object::DensityMatrix(make_density_matrix(&coherent, &x).unwrap()),
        Object::Wavefunction { psi: make_wavefunction(&coherent, &x).unwrap(), axis: x.clone() },
        Object::Trajectory1(Trajectory { times: vec![0.0, 0.3], snapshots: vec![small(0.0), small(0.1)], log: log.clone() }),
        Object::Trajectory2(Trajectory { times: vec![0.0, 0.1, 0.3], snapshots: vec![w2.clone(), w2.clone(), w2], log }),
    ];
    let mut kinds: Vec<Kind> = objects.iter().map(Object::kind).collect();
    kinds.dedup();
    assert_eq!(kinds, Kind::ALL.to_vec());
    for o in &objects {
        let (back, a, b) = round_trip(o);
        assert_eq!(&back, o, "{}", o.kind());
        assert_eq!(a, b, "{}", o.kind());
    }
}

#[test]
fn density_matrix_payload_is_complex_with_primed_axes() {
    let x = AxisGrid::centered(AxisKind::MatrixX, 4.0, 8).unwrap();
    let rho = make_density_matrix(&StateSpec::Fock { n: 1 }, &x).unwrap();
    let c = Object::DensityMatrix(rho).to_container(BTreeMap::new()).unwrap();
    assert_eq!(c.header.dtype, Dtype::Complex128);
    let names: Vec<&str> = c.header.axes.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["x", "x'"]);
    assert_eq!(c.to_bytes().unwrap().len() - header_len(&c), 64 * 16);
}

fn header_len(c: &Container) -> usize {
    let bytes = c.to_bytes().unwrap();
    bytes.windows(2).position(|w| w == b"\n\n").unwrap() + 2
}

#[test]
fn truncated_payload_names_expected_and_actual_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.tomo");
    write_container(&Object::Optical1(default_tomogram(0.0)), BTreeMap::new(), &path, &tol()).unwrap();
    let mut bytes = fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 5);
    fs::write(&path, &bytes).unwrap();
    let err = read_container(&path, &tol()).unwrap_err();
    let expected = 128 * 64 * 8;
    assert!(matches!(err, Error::PayloadLength { expected: e, actual: a } if e == expected && a == expected - 5), "{err}");
    assert!(err.to_string().contains(&format!("expected {expected} bytes, found {}", expected - 5)));
    assert_eq!(err.category(), Category::Format);

    bytes.extend([0u8; 13]);
    let err = Container::from_bytes(&bytes).unwrap_err();
    assert!(matches!(err, Error::PayloadLength { actual, .. } if actual == expected + 8));
}

#[test]
fn header_errors_are_format_errors() {
    let c = Object::Optical1(small(0.0)).to_container(BTreeMap::new()).unwrap();
    let good = c.to_bytes().unwrap();
    let with = |from: &str, to: &str| {
        let text = String::from_utf8_lossy(&good[..header_len(&c)]).replace(from, to);
        let mut bytes = text.into_bytes();
        bytes.extend(&good[header_len(&c)..]);
        bytes
    };
    let cases = [
        with("TOMO1", "TOMO2"),
        with("TOMO1", "JUNK!"),
        with("kind: optical1", "kind: hologram"),
        with("dtype: real64", "dtype: real32"),
        with("dtype: real64\n", ""),
        with("axis: X position-X", "axis: X position-Y"),
        with("axis: theta angle-theta 0.0", "axis: theta angle-theta 0.5"),
        with("axis: theta", "axes: theta"),
        good[..header_len(&c) - 1].to_vec(),
    ];
    for (k, bytes) in cases.iter().enumerate() {
        let err = Container::from_bytes(bytes).and_then(|c| Object::from_container(&c)).unwrap_err();
        assert_eq!(err.category(), Category::Format, "case {k}: {err}");
    }
}

#[test]
fn dtype_must_match_the_kind() {
    let mut c = Object::Optical1(small(0.0)).to_container(BTreeMap::new()).unwrap();
    c.header.dtype = Dtype::Complex128;
    let Payload::Real(v) = &c.payload else { unreachable!() };
    c.payload = Payload::Complex(v.iter().map(|&x| Complex64::new(x, 0.0)).collect());
    let err = Object::from_container(&Container::from_bytes(&c.to_bytes().unwrap()).unwrap()).unwrap_err();
    assert!(matches!(err, Error::Format(_)), "{err}");
}

/// Slice of the Fock-1 Wigner function along lines at distance `s` from the origin,
/// renormalized per angle: a normalized payload with a negative lobe.
fn fock1_wigner_slice() -> OpticalTomogram1 {
    let s = 0.5;
    let wigner = |q: f64, p: f64| {
        let r2 = q * q + p * p;
        -(-r2).exp() * laguerre(1, 2.0 * r2) / PI
    };
    let x = AxisGrid::default_position();
    let theta = AxisGrid::default_angles();
    let values = Array2::from_shape_fn((x.len(), theta.len()), |(i, j)| {
        let (c, sn) = (theta.point(j).cos(), theta.point(j).sin());
        let xi = x.point(i);
        wigner(xi * c - s * sn, xi * sn + s * c)
    });
    normalize(&OpticalTomogram1::new(x, theta, values).unwrap()).unwrap()
}

#[test]
fn negative_lobe_tomogram_loads_quarantined() {
    let w = fock1_wigner_slice();
    assert!(w.sign_floor() < -0.1 * w.max_value());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lobe.tomo");
    let object = Object::Optical1(w);
    let err = write_container(&object, BTreeMap::new(), &path, &tol()).unwrap_err();
    assert_eq!(err.category(), Category::Invariant);
    assert!(!path.exists());

    object.to_container(BTreeMap::new()).unwrap().write(&path).unwrap();
    let loaded = read_container(&path, &tol()).unwrap();
    assert!(loaded.is_quarantined());
    assert_eq!(loaded.object, object);
    let failures: Vec<&str> = loaded.report.failures().map(|c| c.name).collect();
    assert_eq!(failures, ["sign_floor"]);
    let floor = loaded.report.checks.iter().find(|c| c.name == "sign_floor").unwrap();
    assert!(floor.value < 0.0);
    assert!(loaded.report.summary().contains("sign_floor"));
    let err = loaded.require_valid().unwrap_err();
    assert_eq!(err.category(), Category::Invariant);
}

#[test]
fn trajectory_metadata_is_required() {
    let log = StepLog { steps: 1, substeps: 1, h: 0.1, dt_max: 1.0, spectral_radius: 1.0, max_drift: 0.0, drifts: vec![0.0], rank: 0 };
    let t = Object::Trajectory1(Trajectory { times: vec![0.0], snapshots: vec![small(0.0)], log });
    let mut c = t.to_container(BTreeMap::new()).unwrap();
    assert_eq!(c.header.axes[0].count, 1);
    assert_eq!(Object::from_container(&c).unwrap(), t);
    c.header.metadata.remove("trajectory.times");
    assert!(matches!(Object::from_container(&c), Err(Error::Format(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metadata_survives_any_text(key in "[a-z][a-z0-9_.]{0,12}", value in "\\PC*(\n\\PC*)*") {
        let mut meta = BTreeMap::new();
        meta.insert(key.clone(), value.clone());
        let c = Object::Optical1(small(0.0)).to_container(meta).unwrap();
        let back = Container::from_bytes(&c.to_bytes().unwrap()).unwrap();
        prop_assert_eq!(back.header.metadata.get(&key), Some(&value));
        prop_assert_eq!(back, c);
    }
}
