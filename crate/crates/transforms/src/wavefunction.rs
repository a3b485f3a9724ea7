//! Optical tomograms of pure and mixed quantum states.
//!
//! The quadrature distribution at angle `φ` is `|⟨X|U(φ)|ψ⟩|²`, with
//! `U(φ)` the fractional Fourier transform
//! `⟨X|U|x⟩ = exp(i(x² cot φ / 2 − X x / sin φ)) / sqrt(2π i sin φ)`.
//! The chirp is only well sampled for `φ` near `π/2`, so angles outside
//! `[π/4, 3π/4]` are computed from the momentum wavefunction at `φ − π/2`.

use std::f64::consts::{FRAC_PI_4, PI};

use ndarray::Array2;
use num_complex::Complex64;
use tomo_core::{
    trapezoid, AxisGrid, AxisKind, DensityMatrix, Error, OpticalTomogram1, Result,
};

/// Largest tolerated per-angle norm deviation.
pub const NORM_TOL: f64 = 1e-6;

/// Kernel rows `K[i, j] = Δx·⟨X_i|U(φ)|x_j⟩` up to a global phase.
fn frft_kernel(phi: f64, xs: &[f64], src: &[f64], dx: f64) -> Array2<Complex64> {
    let (s, c) = phi.sin_cos();
    let cot = c / s;
    let amp = dx / (2.0 * PI * s.abs()).sqrt();
    Array2::from_shape_fn((xs.len(), src.len()), |(i, j)| {
        let x = src[j];
        Complex64::from_polar(amp, 0.5 * x * x * cot - xs[i] * x / s)
    })
}

/// Momentum representation `ψ̃(p) = Δx/√(2π) Σ e^{−ipx} ψ(x)` on a grid with the layout of `x`.
fn momentum_matrix(src: &[f64], dx: f64) -> Array2<Complex64> {
    let amp = dx / (2.0 * PI).sqrt();
    Array2::from_shape_fn((src.len(), src.len()), |(l, j)| {
        Complex64::from_polar(amp, -src[l] * src[j])
    })
}

fn uses_direct(theta: f64) -> bool {
    (FRAC_PI_4 - 1e-12..=3.0 * FRAC_PI_4 + 1e-12).contains(&theta)
}

fn check_norms(values: &Array2<f64>, x_axis: &AxisGrid) -> Result<()> {
    for col in values.columns() {
        let deviation = (trapezoid(col.iter().copied(), x_axis.step()) - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NormLoss { deviation });
        }
    }
    Ok(())
}

fn apply(k: &Array2<Complex64>, psi: &[Complex64]) -> Vec<f64> {
    k.rows()
        .into_iter()
        .map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr())
        .collect()
}

/// Tomogram `|U(θ)ψ|²` of a wavefunction sampled on `psi_axis`.
pub fn tomogram_from_wavefunction(
    psi: &[Complex64],
    psi_axis: &AxisGrid,
    x_axis: &AxisGrid,
    theta_axis: &AxisGrid,
) -> Result<OpticalTomogram1> {
    psi_axis.require_kind(AxisKind::MatrixX)?;
    if psi.len() != psi_axis.len() {
        return Err(Error::Shape("wavefunction length differs from its axis".into()));
    }
    let dx = psi_axis.step();
    let norm = trapezoid(psi.iter().map(|z| z.norm_sqr()), dx);
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NormLoss { deviation: (norm - 1.0).abs() });
    }
    let src = psi_axis.points();
    let xs = x_axis.points();
    let psi_p: Vec<Complex64> = {
        let f = momentum_matrix(&src, dx);
        f.rows().into_iter().map(|row| row.iter().zip(psi).map(|(a, b)| a * b).sum()).collect()
    };
    let same_axis = psi_axis.same_layout(x_axis);
    let mut values = Array2::zeros((xs.len(), theta_axis.len()));
    for j in 0..theta_axis.len() {
        let theta = theta_axis.point(j);
        let col = if theta == 0.0 && same_axis {
            psi.iter().map(|z| z.norm_sqr()).collect()
        } else if uses_direct(theta) {
            apply(&frft_kernel(theta, &xs, &src, dx), psi)
        } else {
            apply(&frft_kernel(theta - PI / 2.0, &xs, &src, dx), &psi_p)
        };
        values.column_mut(j).iter_mut().zip(col).for_each(|(o, v)| *o = v);
    }
    check_norms(&values, x_axis)?;
    OpticalTomogram1::new(x_axis.clone(), theta_axis.clone(), values)
}

/// Tomogram `diag(U ρ U†)` of a single-mode density matrix.
pub fn tomogram_from_density_matrix(
    rho: &DensityMatrix,
    x_axis: &AxisGrid,
    theta_axis: &AxisGrid,
) -> Result<OpticalTomogram1> {
    if rho.x_axes().len() != 1 {
        return Err(Error::Shape("single-mode density matrix expected".into()));
    }
    let axis = &rho.x_axes()[0];
    let dx = axis.step();
    let src = axis.points();
    let xs = x_axis.points();
    let r = rho.values();
    // ρ̃ = F ρ F† with F the discrete momentum map; the Δx of the operator is folded into F.
    let f = momentum_matrix(&src, dx);
    let rho_p = {
        let fr = matmul(&f, r);
        matmul(&fr, &f.t().mapv(|z| z.conj()))
    };
    let mut values = Array2::zeros((xs.len(), theta_axis.len()));
    for j in 0..theta_axis.len() {
        let theta = theta_axis.point(j);
        let (k, m) = if uses_direct(theta) {
            (frft_kernel(theta, &xs, &src, dx), r.clone())
        } else {
            (frft_kernel(theta - PI / 2.0, &xs, &src, dx), rho_p.clone())
        };
        let km = matmul(&k, &m);
        for i in 0..xs.len() {
            let v: Complex64 = km.row(i).iter().zip(k.row(i)).map(|(a, b)| a * b.conj()).sum();
            values[[i, j]] = v.re;
        }
    }
    check_norms(&values, x_axis)?;
    OpticalTomogram1::new(x_axis.clone(), theta_axis.clone(), values)
}

fn matmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ai) = (a.mapv(|z| z.re), a.mapv(|z| z.im));
    let (br, bi) = (b.mapv(|z| z.re), b.mapv(|z| z.im));
    let re = ar.dot(&br) - ai.dot(&bi);
    let im = ar.dot(&bi) + ai.dot(&br);
    let mut out = Array2::zeros(re.dim());
    out.zip_mut_with(&re, |o: &mut Complex64, &r| o.re = r);
    out.zip_mut_with(&im, |o: &mut Complex64, &i| o.im = i);
    out
}
