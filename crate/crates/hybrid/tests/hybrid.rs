use std::f64::consts::PI;

use proptest::prelude::*;
use tomo_core::{marginal, AxisGrid, AxisKind, Error, OpticalTomogram1, Tolerances, Which};
use tomo_hybrid::{
    branch_covariance, compose_entangled, compose_mixture, compose_product, covariance,
    toy_entanglement_bounds, two_branch_covariance, Branch, HybridSpec,
};
use tomo_states::{make_tomogram, StateSpec};
use tomo_transforms::{classify, classify2, Admissibility, ClassifyOptions};

fn axes(nx: usize, nt: usize) -> (AxisGrid, AxisGrid) {
    (
        AxisGrid::centered(AxisKind::Position, 8.0, nx).unwrap(),
        AxisGrid::angles(nt).unwrap(),
    )
}

fn tomo(spec: StateSpec, nx: usize, nt: usize) -> OpticalTomogram1 {
    let (x, t) = axes(nx, nt);
    make_tomogram(&spec, &x, &t).unwrap()
}

fn coherent(q0: f64, p0: f64) -> StateSpec {
    StateSpec::Coherent { q0, p0 }
}

fn max_diff<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn product_marginals_and_zero_covariance() {
    let a = tomo(coherent(1.0, -0.5), 64, 32);
    let b = tomo(StateSpec::Thermal { nbar: 0.3 }, 64, 32);
    let w = compose_product(&a, &b).unwrap();
    assert!(w.check(&Tolerances::DEFAULT).is_ok());
    let m1 = marginal(&w, Which::First).unwrap();
    let m2 = marginal(&w, Which::Second).unwrap();
    assert!(max_diff(m1.values().iter(), a.values().iter()) < 1e-12);
    assert!(max_diff(m2.values().iter(), b.values().iter()) < 1e-12);
    let t = w.theta1_axis().points();
    for &t1 in &t {
        for &t2 in &t {
            let c = covariance(&w, t1, t2).unwrap();
            assert!(!c.interpolated);
            assert!(c.value.abs() <= 1e-10, "{t1} {t2} {}", c.value);
        }
    }
}

#[test]
fn product_of_coherent_and_fock_classifies_per_particle() {
    // The strict admissibility slacks need Δx ≲ 0.2 and about 48 angles.
    let x = AxisGrid::centered(AxisKind::Position, 6.0, 64).unwrap();
    let t = AxisGrid::angles(48).unwrap();
    let a = make_tomogram(&coherent(2.0, 0.0), &x, &t).unwrap();
    let b = make_tomogram(&StateSpec::Fock { n: 1 }, &x, &t).unwrap();
    let w = compose_product(&a, &b).unwrap();
    let first = classify(&marginal(&w, Which::First).unwrap()).unwrap();
    let second = classify(&marginal(&w, Which::Second).unwrap()).unwrap();
    assert_eq!(first.label, Admissibility::Both);
    assert_eq!(second.label, Admissibility::QuantumOnly);
}

#[test]
fn single_branch_mixture_is_the_product() {
    let a = tomo(coherent(0.5, 0.5), 32, 16);
    let b = tomo(StateSpec::Fock { n: 2 }, 32, 16);
    let mix = compose_mixture(&HybridSpec::mixture(vec![Branch::new(1.0, a.clone(), b.clone())])).unwrap();
    assert_eq!(mix, compose_product(&a, &b).unwrap());
}

fn displaced_pair(a: f64, p: f64, nx: usize, nt: usize) -> Vec<Branch> {
    let plus = tomo(coherent(a, 0.0), nx, nt);
    let minus = tomo(coherent(-a, 0.0), nx, nt);
    vec![Branch::new(p, plus.clone(), plus), Branch::new(1.0 - p, minus.clone(), minus)]
}

#[test]
fn displaced_mixture_covariance() {
    let w = compose_mixture(&HybridSpec::mixture(displaced_pair(2.0, 0.5, 64, 32))).unwrap();
    assert!(w.check(&Tolerances::DEFAULT).is_ok());
    let t = w.theta1_axis().points();
    for &t1 in &t {
        for &t2 in &t {
            let c = covariance(&w, t1, t2).unwrap().value;
            assert!((c - 4.0 * t1.cos() * t2.cos()).abs() <= 1e-3, "{t1} {t2} {c}");
        }
    }
    assert!(covariance(&w, PI / 2.0, 0.0).unwrap().value.abs() <= 1e-3);
}

#[test]
fn off_grid_angles_are_flagged() {
    let w = compose_mixture(&HybridSpec::mixture(displaced_pair(2.0, 0.5, 64, 32))).unwrap();
    let c = covariance(&w, 0.05, 0.0).unwrap();
    assert!(c.interpolated);
    assert!((c.value - 4.0 * 0.05f64.cos()).abs() < 2e-2);
    // Beyond π the reflection rule flips X₁, so the covariance changes sign.
    let flipped = covariance(&w, PI, 0.0).unwrap();
    assert!(!flipped.interpolated);
    assert!((flipped.value + 4.0).abs() <= 1e-3);
}

#[test]
fn mixture_marginal_is_the_weighted_sum() {
    let (a, abar) = (tomo(coherent(1.0, 0.0), 32, 16), tomo(StateSpec::Fock { n: 1 }, 32, 16));
    let (b, bbar) = (tomo(coherent(0.0, 1.0), 32, 16), tomo(StateSpec::Thermal { nbar: 1.0 }, 32, 16));
    let w = compose_mixture(&HybridSpec::mixture(vec![
        Branch::new(0.3, a.clone(), b),
        Branch::new(0.7, abar.clone(), bbar),
    ]))
    .unwrap();
    let m = marginal(&w, Which::First).unwrap();
    let want = a.values() * 0.3 + abar.values() * 0.7;
    assert!(max_diff(m.values().iter(), want.iter()) < 1e-12);
}

#[test]
fn weights_are_validated() {
    let a = tomo(coherent(0.0, 0.0), 32, 16);
    let bad = HybridSpec::mixture(vec![
        Branch::new(0.5, a.clone(), a.clone()),
        Branch::new(0.6, a.clone(), a.clone()),
    ]);
    assert!(matches!(compose_mixture(&bad), Err(Error::Weight(_))));
    let negative = HybridSpec::mixture(vec![Branch::new(-0.1, a.clone(), a.clone())]);
    assert!(matches!(compose_mixture(&negative), Err(Error::Weight(_))));
    let mu = HybridSpec::entangled(vec![Branch::new(1.0, a.clone(), a.clone())], vec![], -1.0);
    assert!(matches!(compose_entangled(&mu), Err(Error::Domain(_))));
    let other = tomo(coherent(0.0, 0.0), 64, 16);
    let mismatch = HybridSpec::mixture(vec![
        Branch::new(0.5, a.clone(), a.clone()),
        Branch::new(0.5, other.clone(), other),
    ]);
    assert!(matches!(compose_mixture(&mismatch), Err(Error::GridMismatch(_))));
}

#[test]
fn entangled_reductions() {
    let branches = displaced_pair(2.0, 0.5, 32, 16);
    let mix = compose_mixture(&HybridSpec::mixture(branches.clone())).unwrap();
    let zero = compose_entangled(&HybridSpec::entangled(branches.clone(), vec![], 0.0)).unwrap();
    assert_eq!(zero.tomogram, mix);
    let same = compose_entangled(&HybridSpec::entangled(branches.clone(), branches, 1.7)).unwrap();
    assert!(max_diff(same.tomogram.values().iter(), mix.values().iter()) < 1e-12);
}

#[test]
fn entangled_negativity_report() {
    let branches = displaced_pair(2.0, 0.5, 32, 16);
    let centered = tomo(coherent(0.0, 0.0), 32, 16);
    let neg = vec![Branch::new(1.0, centered.clone(), centered)];
    let e = compose_entangled(&HybridSpec::entangled(branches, neg, 0.5)).unwrap();
    assert_eq!(e.minima.dim(), (16, 16));
    assert!(e.has_negative);
    assert!(e.min_value < 0.0);
    let integrals = e.tomogram.angle_integrals();
    assert!(integrals.iter().all(|i| (i - 1.0).abs() < 1e-8));
    let scanned = e.minima.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(scanned, e.tomogram.sign_floor());
}

#[test]
fn toy_lattice_has_no_counterexamples() {
    let mut bad = 0;
    for i in 0..=100 {
        for j in 0..=100 {
            for k in 0..=20 {
                let (x, y, mu) = (i as f64 / 100.0, j as f64 / 100.0, k as f64 / 5.0);
                let b = toy_entanglement_bounds(x, y, mu).unwrap();
                if b.in_range != b.x_within(x) {
                    bad += 1;
                }
            }
        }
    }
    assert_eq!(bad, 0);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn two_branch_formula_matches_general_covariance(
        p in 0.0f64..1.0,
        c in prop::array::uniform8(-2.0f64..2.0),
        s in prop::array::uniform4(0.6f64..1.2),
        j1 in 0usize..16, j2 in 0usize..16,
    ) {
        let g = |i: usize| StateSpec::ClassicalGaussian {
            sigma_q: s[i], sigma_p: 1.8 - s[i], q0: c[2 * i], p0: c[2 * i + 1],
        };
        let (a, b, abar, bbar) = (tomo(g(0), 64, 16), tomo(g(1), 64, 16), tomo(g(2), 64, 16), tomo(g(3), 64, 16));
        let branches = vec![Branch::new(p, a.clone(), b.clone()), Branch::new(1.0 - p, abar.clone(), bbar.clone())];
        let w = compose_mixture(&HybridSpec::mixture(branches.clone())).unwrap();
        let (t1, t2) = (j1 as f64 * PI / 16.0, j2 as f64 * PI / 16.0);
        let general = covariance(&w, t1, t2).unwrap().value;
        let two = two_branch_covariance(p, (&a, &b), (&abar, &bbar), t1, t2).unwrap();
        let sum = branch_covariance(&branches, t1, t2).unwrap();
        prop_assert!((general - two).abs() <= 1e-8, "{} vs {}", general, two);
        prop_assert!((sum - two).abs() <= 1e-8);
    }

    #[test]
    fn product_covariance_vanishes(q in -2.0f64..2.0, r in -2.0f64..2.0, j1 in 0usize..16, j2 in 0usize..16) {
        let w = compose_product(&tomo(coherent(q, r), 32, 16), &tomo(coherent(r, q), 32, 16)).unwrap();
        let c = covariance(&w, j1 as f64 * PI / 16.0, j2 as f64 * PI / 16.0).unwrap();
        prop_assert!(c.value.abs() <= 1e-10);
    }

    #[test]
    fn toy_characterizations_agree(x in 0.0f64..=1.0, y in 0.0f64..=1.0, mu in 0.0f64..10.0) {
        let b = toy_entanglement_bounds(x, y, mu).unwrap();
        prop_assert_eq!(b.in_range, b.x_within(x));
    }
}

#[test]
fn joint_classification_of_product_and_negative_forms() {
    let x = AxisGrid::centered(AxisKind::Position, 6.0, 64).unwrap();
    let t = AxisGrid::angles(48).unwrap();
    let make = |s: StateSpec| make_tomogram(&s, &x, &t).unwrap();
    let opts = ClassifyOptions::default();
    let product = compose_product(&make(coherent(1.0, 0.0)), &make(coherent(-1.0, 0.5))).unwrap();
    let c = classify2(&product, &opts).unwrap();
    assert_eq!(c.label, Admissibility::Both, "{c:?}");

    let plus = make(coherent(3.0, 0.0));
    let minus = make(coherent(-3.0, 0.0));
    let entangled = compose_entangled(&HybridSpec::entangled(
        vec![Branch::new(0.5, plus.clone(), plus.clone()), Branch::new(0.5, minus.clone(), minus.clone())],
        vec![Branch::new(0.5, plus.clone(), minus.clone()), Branch::new(0.5, minus, plus)],
        4.0,
    ))
    .unwrap();
    let eps = opts.tol.grid_rel * entangled.tomogram.max_value();
    assert!(entangled.min_value < -10.0 * eps);
    let c = classify2(&entangled.tomogram, &opts).unwrap();
    assert_eq!(c.label, Admissibility::Neither);
    assert_eq!(c.joint.label, Admissibility::Neither);
}
