//! Exact evolution for potentials of degree at most two.
//!
//! The flow of `H = p²/2 + U(q)` is affine, `z(t) = M z₀ + d`, so
//! `w_t(X, μ, ν) = w₀(X − (μ, ν)·d, Mᵀ(μ, ν))`. Writing `Mᵀ(cosθ, sinθ) = λ(cosθ′, sinθ′)`
//! and using `w(λX, λμ, λν) = w(X, μ, ν)/|λ|` gives
//! `w_t(X, θ) = w₀((X − d_θ)/λ, θ′)/λ`, evaluated by band-limited interpolation
//! in `θ` on the reflection-extended circle and in `X` on the periodic window.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, Array4};
use tomo_core::{AxisGrid, Error, OpticalTomogram1, OpticalTomogram2, Result};
use tomo_transforms::spectral::periodic_sinc;

use crate::potential::PolynomialPotential;

/// Affine phase-space flow of `H = p²/2 + c₂q² + c₁q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFlow {
    /// Row-major `[[M₁₁, M₁₂], [M₂₁, M₂₂]]`.
    pub m: [[f64; 2]; 2],
    pub d: [f64; 2],
}

/// `(cos(√κ t), sin(√κ t)/√κ, (1 − cos(√κ t))/κ)`, continued through `κ ≤ 0`.
fn flow_functions(kappa: f64, t: f64) -> (f64, f64, f64) {
    let z = kappa * t * t;
    if z.abs() < 1e-2 {
        // Series in z: C = Σ (−z)^n/(2n)!, S = t Σ (−z)^n/(2n+1)!, (1−C)/κ = t² Σ (−z)^n/(2n+2)!.
        let (mut c, mut s, mut r) = (0.0, 0.0, 0.0);
        let mut term = 1.0;
        for n in 0..12 {
            let k = 2 * n as i32;
            let f = |j: i32| (1..=j).map(|i| i as f64).product::<f64>();
            term = if n == 0 { 1.0 } else { term * -z };
            c += term / f(k);
            s += term / f(k + 1);
            r += term / f(k + 2);
        }
        return (c, s * t, r * t * t);
    }
    if kappa > 0.0 {
        let w = kappa.sqrt();
        let (sn, cs) = (w * t).sin_cos();
        (cs, sn / w, (1.0 - cs) / kappa)
    } else {
        let g = (-kappa).sqrt();
        let (sh, ch) = ((g * t).sinh(), (g * t).cosh());
        (ch, sh / g, (1.0 - ch) / kappa)
    }
}

impl QuadraticFlow {
    pub fn new(u: &PolynomialPotential, t: f64) -> Result<Self> {
        if u.degree() > 2 {
            return Err(Error::Degree { degree: u.degree(), max: 2 });
        }
        let kappa = 2.0 * u.coeff(2);
        let c1 = u.coeff(1);
        let (c, s, r) = flow_functions(kappa, t);
        Ok(QuadraticFlow { m: [[c, s], [-kappa * s, c]], d: [-c1 * r, -c1 * s] })
    }
}

/// Interpolation weights for one output angle.
struct AngleMap {
    /// Weight per extended angle index `0..2Nθ`.
    theta_weights: Vec<f64>,
    /// `w_t(X_i) = Σ_k x_weights[i, k]·g(X_k)`, including the `1/λ` Jacobian.
    x_weights: Array2<f64>,
}

/// Linear map `w₀ ↦ w_t` on one particle's `(X, θ)` grid.
pub struct QuadraticMap {
    x_axis: AxisGrid,
    nt: usize,
    angles: Vec<AngleMap>,
}

impl QuadraticMap {
    pub fn new(x_axis: &AxisGrid, theta_axis: &AxisGrid, u: &PolynomialPotential, t: f64) -> Result<Self> {
        if !x_axis.is_centered() {
            return Err(Error::Axis("exact evolution needs a centered X axis".into()));
        }
        let flow = QuadraticFlow::new(u, t)?;
        let nt = theta_axis.len();
        let dth = theta_axis.step();
        let nx = x_axis.len();
        let period = nx as f64 * x_axis.step();
        let xs = x_axis.points();
        let angles = theta_axis
            .points()
            .into_iter()
            .map(|th| {
                let (s, c) = th.sin_cos();
                let mu = flow.m[0][0] * c + flow.m[1][0] * s;
                let nu = flow.m[0][1] * c + flow.m[1][1] * s;
                let lambda = mu.hypot(nu);
                let target = nu.atan2(mu).rem_euclid(2.0 * PI);
                let theta_weights =
                    (0..2 * nt).map(|e| periodic_sinc(target - e as f64 * dth, 2 * nt)).collect();
                let shift = c * flow.d[0] + s * flow.d[1];
                let x_weights = Array2::from_shape_fn((nx, nx), |(i, k)| {
                    let y = (xs[i] - shift) / lambda;
                    if y < x_axis.start() - x_axis.step() || y > x_axis.start() + period {
                        0.0
                    } else {
                        periodic_sinc(2.0 * PI * (y - xs[k]) / period, nx) / lambda
                    }
                });
                AngleMap { theta_weights, x_weights }
            })
            .collect();
        Ok(QuadraticMap { x_axis: x_axis.clone(), nt, angles })
    }

    pub fn apply(&self, w: &Array2<f64>) -> Array2<f64> {
        let x = &self.x_axis;
        let nx = x.len();
        let mut out = Array2::zeros((nx, self.nt));
        let mut column = Array1::zeros(nx);
        for (j, a) in self.angles.iter().enumerate() {
            column.fill(0.0);
            for (e, &we) in a.theta_weights.iter().enumerate() {
                let (src, mirrored) = if e < self.nt { (e, false) } else { (e - self.nt, true) };
                for (i, v) in column.iter_mut().enumerate() {
                    let si = if mirrored { x.mirror_index(i) } else { i };
                    *v += we * w[[si, src]];
                }
            }
            out.column_mut(j).assign(&a.x_weights.dot(&column));
        }
        out
    }
}

/// Exact evolution of a single-particle tomogram.
pub fn evolve_quadratic_exact(
    w0: &OpticalTomogram1,
    u: &PolynomialPotential,
    t: f64,
) -> Result<OpticalTomogram1> {
    let map = QuadraticMap::new(w0.x_axis(), w0.theta_axis(), u, t)?;
    OpticalTomogram1::new(w0.x_axis().clone(), w0.theta_axis().clone(), map.apply(w0.values()))
}

/// Exact evolution of a two-particle tomogram, applying each particle's map to its own axes.
pub fn evolve_quadratic_exact2(
    w0: &OpticalTomogram2,
    u: [&PolynomialPotential; 2],
    t: f64,
) -> Result<OpticalTomogram2> {
    let m1 = QuadraticMap::new(w0.x1_axis(), w0.theta1_axis(), u[0], t)?;
    let m2 = QuadraticMap::new(w0.x2_axis(), w0.theta2_axis(), u[1], t)?;
    let (n1, n2, t1, t2) = w0.values().dim();
    let mut mid = Array4::zeros((n1, n2, t1, t2));
    for k in 0..n2 {
        for l in 0..t2 {
            let slice = w0.values().slice(ndarray::s![.., k, .., l]).to_owned();
            mid.slice_mut(ndarray::s![.., k, .., l]).assign(&m1.apply(&slice));
        }
    }
    let mut out = Array4::zeros((n1, n2, t1, t2));
    for i in 0..n1 {
        for j in 0..t1 {
            let slice = mid.slice(ndarray::s![i, .., j, ..]).to_owned();
            out.slice_mut(ndarray::s![i, .., j, ..]).assign(&m2.apply(&slice));
        }
    }
    OpticalTomogram2::new(
        w0.x1_axis().clone(),
        w0.x2_axis().clone(),
        w0.theta1_axis().clone(),
        w0.theta2_axis().clone(),
        out,
    )
}
