//! Product, mixture and entangled-form two-particle tomograms.

use ndarray::{Array2, Array4};
use tomo_core::{AxisGrid, Error, OpticalTomogram1, OpticalTomogram2, Result};

/// Slack on `Σ P_k = 1`.
pub const WEIGHT_TOL: f64 = 1e-12;

/// One product term `P · Ω₁ ⊗ Ω₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub first: OpticalTomogram1,
    pub second: OpticalTomogram1,
}

impl Branch {
    pub fn new(weight: f64, first: OpticalTomogram1, second: OpticalTomogram1) -> Self {
        Branch { weight, first, second }
    }
}

/// Weighted product terms, optionally with a subtracted list scaled by `mu_ent`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridSpec {
    pub branches: Vec<Branch>,
    pub mu_ent: f64,
    pub negative_branches: Vec<Branch>,
}

impl HybridSpec {
    pub fn mixture(branches: Vec<Branch>) -> Self {
        HybridSpec { branches, mu_ent: 0.0, negative_branches: Vec::new() }
    }

    pub fn entangled(branches: Vec<Branch>, negative_branches: Vec<Branch>, mu_ent: f64) -> Self {
        HybridSpec { branches, mu_ent, negative_branches }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_ent >= 0.0 && self.mu_ent.is_finite()) {
            return Err(Error::Domain(format!("mu_ent must be nonnegative, got {}", self.mu_ent)));
        }
        check_weights(&self.branches, "branches")?;
        if !self.negative_branches.is_empty() {
            check_weights(&self.negative_branches, "negative branches")?;
        }
        let axes = grids(&self.branches[0]);
        for b in self.branches.iter().chain(&self.negative_branches) {
            let other = grids(b);
            for (a, o) in axes.iter().zip(&other) {
                a.require_same(o, "branch grids")?;
            }
        }
        Ok(())
    }
}

fn grids(b: &Branch) -> [&AxisGrid; 4] {
    [b.first.x_axis(), b.second.x_axis(), b.first.theta_axis(), b.second.theta_axis()]
}

fn check_weights(branches: &[Branch], what: &str) -> Result<()> {
    if branches.is_empty() {
        return Err(Error::Weight(format!("{what}: empty list")));
    }
    if let Some(b) = branches.iter().find(|b| !(0.0..=1.0).contains(&b.weight)) {
        return Err(Error::Weight(format!("{what}: weight {} outside [0, 1]", b.weight)));
    }
    let total: f64 = branches.iter().map(|b| b.weight).sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::Weight(format!("{what}: weights sum to {total}")));
    }
    Ok(())
}

/// Adds `scale · a(X₁, θ₁) b(X₂, θ₂)` into `out`.
fn add_product(out: &mut Array4<f64>, scale: f64, a: &Array2<f64>, b: &Array2<f64>) {
    let (n1, m1) = a.dim();
    let (n2, m2) = b.dim();
    for i in 0..n1 {
        for k in 0..n2 {
            for j in 0..m1 {
                let s = scale * a[[i, j]];
                for l in 0..m2 {
                    out[[i, k, j, l]] += s * b[[k, l]];
                }
            }
        }
    }
}

fn weighted_sum(branches: &[Branch], scale: f64) -> Array4<f64> {
    let b0 = &branches[0];
    let shape = (
        b0.first.x_axis().len(),
        b0.second.x_axis().len(),
        b0.first.theta_axis().len(),
        b0.second.theta_axis().len(),
    );
    let mut out = Array4::zeros(shape);
    for b in branches {
        add_product(&mut out, scale * b.weight, b.first.values(), b.second.values());
    }
    out
}

fn assemble(b0: &Branch, values: Array4<f64>) -> Result<OpticalTomogram2> {
    OpticalTomogram2::new(
        b0.first.x_axis().clone(),
        b0.second.x_axis().clone(),
        b0.first.theta_axis().clone(),
        b0.second.theta_axis().clone(),
        values,
    )
}

/// Uncorrelated joint tomogram `a(X₁, θ₁) · b(X₂, θ₂)`.
pub fn compose_product(a: &OpticalTomogram1, b: &OpticalTomogram1) -> Result<OpticalTomogram2> {
    compose_mixture(&HybridSpec::mixture(vec![Branch::new(1.0, a.clone(), b.clone())]))
}

/// Convex sum `Σ P_k Ω₁⁽ᵏ⁾ Ω₂⁽ᵏ⁾`.
pub fn compose_mixture(spec: &HybridSpec) -> Result<OpticalTomogram2> {
    if spec.mu_ent != 0.0 || !spec.negative_branches.is_empty() {
        return Err(Error::InvalidArgument(
            "a mixture takes no entanglement parameter or subtracted branches".into(),
        ));
    }
    spec.validate()?;
    assemble(&spec.branches[0], weighted_sum(&spec.branches, 1.0))
}

/// Entangled-form tomogram together with its negativity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledTomogram {
    pub tomogram: OpticalTomogram2,
    /// Grid minimum per `(θ₁, θ₂)`.
    pub minima: Array2<f64>,
    pub min_value: f64,
    pub has_negative: bool,
}

/// `(1+μ) Σ P_k Ω₁⁽ᵏ⁾Ω₂⁽ᵏ⁾ − μ Σ P_k′ Ω₁⁽ᵏ′⁾Ω₂⁽ᵏ′⁾`; negative values are reported, not rejected.
pub fn compose_entangled(spec: &HybridSpec) -> Result<EntangledTomogram> {
    spec.validate()?;
    let tomogram = if spec.mu_ent == 0.0 {
        compose_mixture(&HybridSpec::mixture(spec.branches.clone()))?
    } else {
        if spec.negative_branches.is_empty() {
            return Err(Error::Weight("mu_ent > 0 needs subtracted branches".into()));
        }
        let mut values = weighted_sum(&spec.branches, 1.0 + spec.mu_ent);
        values -= &weighted_sum(&spec.negative_branches, spec.mu_ent);
        assemble(&spec.branches[0], values)?
    };
    let minima = tomogram.angle_minima();
    let min_value = minima.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EntangledTomogram { tomogram, minima, min_value, has_negative: min_value < 0.0 })
}
