//! Position covariance `⟨X₁X₂⟩ − ⟨X₁⟩⟨X₂⟩` at fixed angles.

use std::f64::consts::PI;

use ndarray::Array2;
use tomo_core::{trapezoid, trapezoid_weight, AxisGrid, Error, OpticalTomogram1, OpticalTomogram2, Result};

use crate::compose::Branch;

/// Relative distance from a grid angle below which no interpolation happens.
const ON_GRID: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariance {
    pub value: f64,
    /// Set when an angle fell between grid points and the slice was interpolated.
    pub interpolated: bool,
}

/// Neighbouring angle indices on the `[0, 2π)` extension and the linear weight of the upper one.
fn bracket(theta_axis: &AxisGrid, theta: f64) -> Result<(usize, usize, f64)> {
    if !theta.is_finite() {
        return Err(Error::InvalidArgument("angle must be finite".into()));
    }
    let n = theta_axis.len();
    let u = theta.rem_euclid(2.0 * PI) / theta_axis.step();
    let mut lo = u.floor();
    let mut frac = u - lo;
    if frac > 1.0 - ON_GRID {
        lo += 1.0;
        frac = 0.0;
    } else if frac < ON_GRID {
        frac = 0.0;
    }
    let lo = lo as usize % (2 * n);
    Ok((lo, (lo + 1) % (2 * n), frac))
}

/// Maps an extended angle index to the stored index and whether X is mirrored.
fn fold(j: usize, n: usize) -> (usize, bool) {
    if j < n {
        (j, false)
    } else {
        (j - n, true)
    }
}

fn require_centered(axis: &AxisGrid, mirrored: bool) -> Result<()> {
    if mirrored && !axis.is_centered() {
        return Err(Error::Axis("angles beyond π need a centered X axis".into()));
    }
    Ok(())
}

/// Column `w(·, θ)` of a single-particle tomogram, interpolated between grid angles.
pub fn column_at(w: &OpticalTomogram1, theta: f64) -> Result<(Vec<f64>, bool)> {
    let x = w.x_axis();
    let n = w.theta_axis().len();
    let (lo, hi, frac) = bracket(w.theta_axis(), theta)?;
    let pick = |j: usize| -> Result<Vec<f64>> {
        let (j, m) = fold(j, n);
        require_centered(x, m)?;
        Ok((0..x.len())
            .map(|i| w.values()[[if m { x.mirror_index(i) } else { i }, j]])
            .collect())
    };
    let a = pick(lo)?;
    if frac == 0.0 {
        return Ok((a, false));
    }
    let b = pick(hi)?;
    Ok((a.iter().zip(&b).map(|(u, v)| (1.0 - frac) * u + frac * v).collect(), true))
}

/// Slice `w(·, ·, θ₁, θ₂)` of a two-particle tomogram, bilinear between grid angles.
pub fn slice_at(w: &OpticalTomogram2, theta1: f64, theta2: f64) -> Result<(Array2<f64>, bool)> {
    let (x1, x2) = (w.x1_axis(), w.x2_axis());
    let (n1, n2) = (w.theta1_axis().len(), w.theta2_axis().len());
    let (a0, a1, fa) = bracket(w.theta1_axis(), theta1)?;
    let (b0, b1, fb) = bracket(w.theta2_axis(), theta2)?;
    let mut out = Array2::zeros((x1.len(), x2.len()));
    for (ja, wa) in [(a0, 1.0 - fa), (a1, fa)] {
        for (jb, wb) in [(b0, 1.0 - fb), (b1, fb)] {
            let s = wa * wb;
            if s == 0.0 {
                continue;
            }
            let (j, m1) = fold(ja, n1);
            let (k, m2) = fold(jb, n2);
            require_centered(x1, m1)?;
            require_centered(x2, m2)?;
            for i in 0..x1.len() {
                let si = if m1 { x1.mirror_index(i) } else { i };
                for l in 0..x2.len() {
                    let sl = if m2 { x2.mirror_index(l) } else { l };
                    out[[i, l]] += s * w.values()[[si, sl, j, k]];
                }
            }
        }
    }
    Ok((out, fa != 0.0 || fb != 0.0))
}

/// Covariance by 2-D trapezoid quadrature, with moments taken relative to the slice mass.
pub fn covariance(w: &OpticalTomogram2, theta1: f64, theta2: f64) -> Result<Covariance> {
    let (slice, interpolated) = slice_at(w, theta1, theta2)?;
    if interpolated {
        log::warn!("covariance at ({theta1}, {theta2}) uses interpolated angles");
    }
    let (x1, x2) = (w.x1_axis().points(), w.x2_axis().points());
    let (n1, n2) = (x1.len(), x2.len());
    let h = w.x1_axis().step() * w.x2_axis().step();
    let (mut mass, mut m1, mut m2, mut m12) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n1 {
        let wi = trapezoid_weight(i, n1);
        for l in 0..n2 {
            let v = wi * trapezoid_weight(l, n2) * h * slice[[i, l]];
            mass += v;
            m1 += v * x1[i];
            m2 += v * x2[l];
            m12 += v * x1[i] * x2[l];
        }
    }
    if mass.abs() < f64::EPSILON {
        return Err(Error::DegenerateTomogram { index: 0, integral: mass });
    }
    let value = m12 / mass - (m1 / mass) * (m2 / mass);
    Ok(Covariance { value, interpolated })
}

/// Mean `∫ X Ω(X, θ) dX` of one factor.
pub fn mean_at(w: &OpticalTomogram1, theta: f64) -> Result<f64> {
    let (col, _) = column_at(w, theta)?;
    let xs = w.x_axis().points();
    let mass = trapezoid(col.iter().copied(), w.x_axis().step());
    let first = trapezoid(col.iter().zip(&xs).map(|(v, x)| v * x), w.x_axis().step());
    Ok(first / mass)
}

/// Covariance of a convex sum from per-branch means: `Σ P m₁m₂ − (Σ P m₁)(Σ P m₂)`.
pub fn branch_covariance(branches: &[Branch], theta1: f64, theta2: f64) -> Result<f64> {
    let (mut s12, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for b in branches {
        let m1 = mean_at(&b.first, theta1)?;
        let m2 = mean_at(&b.second, theta2)?;
        s12 += b.weight * m1 * m2;
        s1 += b.weight * m1;
        s2 += b.weight * m2;
    }
    Ok(s12 - s1 * s2)
}

/// Two-branch covariance `P(1−P)(m₁ − m̄₁)(m₂ − m̄₂)`.
pub fn two_branch_covariance(
    p: f64,
    branch: (&OpticalTomogram1, &OpticalTomogram1),
    other: (&OpticalTomogram1, &OpticalTomogram1),
    theta1: f64,
    theta2: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Weight(format!("weight {p} outside [0, 1]")));
    }
    let d1 = mean_at(branch.0, theta1)? - mean_at(other.0, theta1)?;
    let d2 = mean_at(branch.1, theta2)? - mean_at(other.1, theta2)?;
    Ok(p * (1.0 - p) * d1 * d2)
}
