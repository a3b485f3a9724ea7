//! Forward map from phase-space densities to optical tomograms.
//!
//! Each angle is evaluated through the Fourier slice theorem: the 2-D DFT of
//! the sampled density along the ray `k·(cos θ, sin θ)` gives the spectrum of
//! the projection at the X-axis frequencies, which is then summed back onto
//! the X samples. This is exact for band-limited densities.

use std::f64::consts::PI;

use ndarray::{Array2, Array4, ArrayView2, Axis};
use num_complex::Complex64;
use tomo_core::{
    trapezoid, AxisGrid, Error, Normalize, OpticalTomogram1, OpticalTomogram2, PhaseSpaceDensity,
    Result,
};

use crate::spectral::dirichlet_sum;

/// Fraction of the mass allowed to fall outside the X range at any angle.
pub const FRAC_LEAK: f64 = 1e-6;

/// Projection of a single-particle density at one angle, without clean-up.
pub fn project_angle(
    f: ArrayView2<'_, f64>,
    q_axis: &AxisGrid,
    p_axis: &AxisGrid,
    x_axis: &AxisGrid,
    theta: f64,
) -> Vec<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    let n = x_axis.len();
    let d = x_axis.step();
    let cell = q_axis.step() * p_axis.step();
    let qs = q_axis.points();
    let ps = p_axis.points();
    let xs = x_axis.points();
    let half = n / 2;
    let mut out = vec![0.0; n];
    let mut ep = vec![Complex64::new(0.0, 0.0); ps.len()];
    for m in 0..=half {
        let k = 2.0 * PI * m as f64 / (n as f64 * d);
        for (e, &p) in ep.iter_mut().zip(&ps) {
            *e = Complex64::from_polar(1.0, -k * s * p);
        }
        let mut spec = Complex64::new(0.0, 0.0);
        for (row, &q) in f.outer_iter().zip(&qs) {
            let mut g = Complex64::new(0.0, 0.0);
            for (v, e) in row.iter().zip(&ep) {
                g += e * *v;
            }
            spec += g * Complex64::from_polar(1.0, -k * c * q);
        }
        spec *= cell;
        let mult = if m == 0 || (n % 2 == 0 && m == half) { 1.0 } else { 2.0 };
        for (o, &x) in out.iter_mut().zip(&xs) {
            *o += mult * (spec * Complex64::from_polar(1.0, k * x)).re;
        }
    }
    let scale = 1.0 / (n as f64 * d);
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

fn leak_mask(q_axis: &AxisGrid, p_axis: &AxisGrid, x_axis: &AxisGrid, theta: f64) -> Array2<bool> {
    let lo = x_axis.start() - 0.5 * x_axis.step();
    let hi = x_axis.last() + 0.5 * x_axis.step();
    let (c, s) = (theta.cos(), theta.sin());
    Array2::from_shape_fn((q_axis.len(), p_axis.len()), |(a, b)| {
        let x = q_axis.point(a) * c + p_axis.point(b) * s;
        x < lo || x > hi
    })
}

fn clamp_columns(values: &mut Array2<f64>) {
    values.mapv_inplace(|v| v.max(0.0));
}

/// Optical tomogram of a single-particle density.
pub fn radon_forward(
    f: &PhaseSpaceDensity,
    x_axis: &AxisGrid,
    theta_axis: &AxisGrid,
) -> Result<OpticalTomogram1> {
    let v = f.values2()?;
    let (q_axis, p_axis) = (&f.q_axes()[0], &f.p_axes()[0]);
    let total: f64 = v.iter().map(|x| x.abs()).sum();
    let mut values = Array2::zeros((x_axis.len(), theta_axis.len()));
    for (j, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
        let theta = theta_axis.point(j);
        let mask = leak_mask(q_axis, p_axis, x_axis, theta);
        let leak: f64 =
            v.iter().zip(mask.iter()).filter(|(_, &m)| m).map(|(x, _)| x.abs()).sum::<f64>() / total;
        if leak > FRAC_LEAK {
            return Err(Error::SupportOverflow { index: j, leak });
        }
        let proj = project_angle(v, q_axis, p_axis, x_axis, theta);
        col.iter_mut().zip(proj).for_each(|(o, p)| *o = p);
    }
    clamp_columns(&mut values);
    OpticalTomogram1::new(x_axis.clone(), theta_axis.clone(), values)?.normalize()
}

/// Linear map from a flattened `(q, p)` density to a flattened `(X, θ)` tomogram.
///
/// Entries are the band-limited line integrals used by [`radon_forward`].
pub fn projection_matrix(
    q_axis: &AxisGrid,
    p_axis: &AxisGrid,
    x_axis: &AxisGrid,
    theta_axis: &AxisGrid,
) -> Array2<f64> {
    let n = x_axis.len();
    let d = x_axis.step();
    let (nq, np, nt) = (q_axis.len(), p_axis.len(), theta_axis.len());
    let scale = q_axis.step() * p_axis.step() / (n as f64 * d);
    let period = n as f64 * d;
    let mut r = Array2::zeros((n * nt, nq * np));
    for j in 0..nt {
        let theta = theta_axis.point(j);
        let (c, s) = (theta.cos(), theta.sin());
        for a in 0..nq {
            for b in 0..np {
                let u = q_axis.point(a) * c + p_axis.point(b) * s;
                for i in 0..n {
                    let alpha = 2.0 * PI * (x_axis.point(i) - u) / period;
                    r[[i * nt + j, a * np + b]] = scale * dirichlet_sum(alpha, n);
                }
            }
        }
    }
    r
}

/// Joint optical tomogram of a two-particle density `f(q₁, p₁, q₂, p₂)`.
pub fn radon_forward2(
    f: &PhaseSpaceDensity,
    x1_axis: &AxisGrid,
    x2_axis: &AxisGrid,
    theta1_axis: &AxisGrid,
    theta2_axis: &AxisGrid,
) -> Result<OpticalTomogram2> {
    if f.particles() != 2 {
        return Err(Error::Shape("two-particle density expected".into()));
    }
    let (q1, p1, q2, p2) = (&f.q_axes()[0], &f.p_axes()[0], &f.q_axes()[1], &f.p_axes()[1]);
    let (n1, n2) = (q1.len() * p1.len(), q2.len() * p2.len());
    let fm = f
        .values()
        .view()
        .into_shape_with_order((n1, n2))
        .map_err(|e| Error::Shape(e.to_string()))?;
    let abs = fm.mapv(f64::abs);
    let total = abs.sum();
    let masks = |q: &AxisGrid, p: &AxisGrid, x: &AxisGrid, t: &AxisGrid| {
        let mut m = Array2::zeros((t.len(), q.len() * p.len()));
        for j in 0..t.len() {
            let mask = leak_mask(q, p, x, t.point(j));
            for (k, &b) in mask.iter().enumerate() {
                m[[j, k]] = if b { 1.0 } else { 0.0 };
            }
        }
        m
    };
    let m1 = masks(q1, p1, x1_axis, theta1_axis);
    let m2 = masks(q2, p2, x2_axis, theta2_axis);
    // mass with either coordinate outside: m1·F·1 + 1·F·m2 − m1·F·m2
    let out1 = m1.dot(&abs.sum_axis(Axis(1)));
    let out2 = m2.dot(&abs.sum_axis(Axis(0)));
    let both = m1.dot(&abs).dot(&m2.t());
    for ((j, k), b) in both.indexed_iter() {
        let leak = (out1[j] + out2[k] - b) / total;
        if leak > FRAC_LEAK {
            return Err(Error::SupportOverflow { index: j * theta2_axis.len() + k, leak });
        }
    }
    let r1 = projection_matrix(q1, p1, x1_axis, theta1_axis);
    let r2 = projection_matrix(q2, p2, x2_axis, theta2_axis);
    let joint = r1.dot(&fm.dot(&r2.t()));
    let (nx1, nt1, nx2, nt2) = (x1_axis.len(), theta1_axis.len(), x2_axis.len(), theta2_axis.len());
    let mut values = Array4::zeros((nx1, nx2, nt1, nt2));
    for ((r, c), &v) in joint.indexed_iter() {
        values[[r / nt1, c / nt2, r % nt1, c % nt2]] = v.max(0.0);
    }
    OpticalTomogram2::new(
        x1_axis.clone(),
        x2_axis.clone(),
        theta1_axis.clone(),
        theta2_axis.clone(),
        values,
    )?
    .normalize()
}

/// Mean of `X` per angle, a cheap diagnostic.
pub fn angle_means(w: &OpticalTomogram1) -> Vec<f64> {
    let h = w.x_axis().step();
    let xs = w.x_axis().points();
    w.values()
        .axis_iter(Axis(1))
        .map(|col| trapezoid(col.iter().zip(&xs).map(|(v, x)| v * x), h))
        .collect()
}
