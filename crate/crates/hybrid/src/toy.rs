//! Two-outcome analogue of the entangled form: `z = (1+μ)x − μy`.

use tomo_core::{Error, Result};

/// Slack applied to both range tests so lattice points on the boundary agree.
pub const TOY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyDistribution {
    pub x: f64,
    pub y: f64,
    pub mu_ent: f64,
    pub z: f64,
}

impl ToyDistribution {
    pub fn new(x: f64, y: f64, mu_ent: f64) -> Result<Self> {
        for (name, v) in [("x", x), ("y", y)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !(mu_ent >= 0.0 && mu_ent.is_finite()) {
            return Err(Error::Domain(format!("mu_ent = {mu_ent} must be nonnegative")));
        }
        Ok(ToyDistribution { x, y, mu_ent, z: (1.0 + mu_ent) * x - mu_ent * y })
    }

    /// `1 − z` computed from the complementary outcomes.
    pub fn complement(&self) -> f64 {
        (1.0 + self.mu_ent) * (1.0 - self.x) - self.mu_ent * (1.0 - self.y)
    }

    pub fn bounds(&self) -> (f64, f64) {
        let m = self.mu_ent;
        (self.y * m / (1.0 + m), (1.0 + self.y * m) / (m + 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyBounds {
    pub z: f64,
    pub in_range: bool,
    pub lower: f64,
    pub upper: f64,
}

impl ToyBounds {
    /// Whether `x` lies between the bounds, with the same slack as `in_range`.
    pub fn x_within(&self, x: f64) -> bool {
        self.lower - TOY_EPS <= x && x <= self.upper + TOY_EPS
    }
}

pub fn toy_entanglement_bounds(x: f64, y: f64, mu_ent: f64) -> Result<ToyBounds> {
    let d = ToyDistribution::new(x, y, mu_ent)?;
    let (lower, upper) = d.bounds();
    Ok(ToyBounds { z: d.z, in_range: (-TOY_EPS..=1.0 + TOY_EPS).contains(&d.z), lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_cases() {
        let b = toy_entanglement_bounds(0.2, 0.5, 1.0).unwrap();
        assert!((b.z + 0.1).abs() < 1e-15);
        assert!(!b.in_range && b.x_within(0.2) == b.in_range);
        assert!((b.lower - 0.25).abs() < 1e-15 && (b.upper - 0.75).abs() < 1e-15);
        assert!(0.2 < b.lower);
        let same = toy_entanglement_bounds(0.3, 0.3, 2.5).unwrap();
        assert!((same.z - 0.3).abs() < 1e-15 && same.in_range);
    }

    #[test]
    fn complement_matches_one_minus_z() {
        let d = ToyDistribution::new(0.7, 0.1, 3.0).unwrap();
        assert!((d.complement() - (1.0 - d.z)).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(matches!(toy_entanglement_bounds(1.1, 0.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(toy_entanglement_bounds(0.5, -0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(toy_entanglement_bounds(0.5, 0.5, -1.0), Err(Error::Domain(_))));
    }
}
