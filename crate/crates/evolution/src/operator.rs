//! Generator of the optical-tomogram equation for one particle on its `(X, θ)` grid.
//!
//! `∂w/∂t = K w + V w` with the kinetic part `K = cos²θ ∂θ − sinθ cosθ (1 + X ∂X)`
//! and the potential part assembled from [`expansion_table`] terms
//! `coef · A^a ((sinθ/2)^m ∂X^m w)`, where `A = X cosθ + sinθ (∂X)⁻¹ ∂θ`
//! is the tomographic image of `q`. The X derivative is applied first.

use std::sync::Arc;

use ndarray::{Array2, ArrayView2, Zip};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use tomo_core::{AxisGrid, AxisKind, Error, Result};
use tomo_transforms::spectral::{angular_frequencies, signed_index};

use crate::config::ThetaDerivative;
use crate::potential::{expansion_table, ExpansionTerm, PolynomialPotential};

/// RK4 stability radius used for the step bound, below the imaginary-axis limit `2√2`.
pub const RK4_RADIUS: f64 = 2.5;

/// Power iterations behind the spectral radius estimate.
const POWER_ITERATIONS: usize = 60;

pub struct ModeGenerator {
    nx: usize,
    nt: usize,
    xs: Vec<f64>,
    mirror: Vec<usize>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    dtheta_step: f64,
    /// `i k` per X bin.
    ik: Vec<Complex64>,
    /// `i m` per bin of the `2Nθ` extension, Nyquist zeroed.
    im: Vec<Complex64>,
    terms: Vec<ExpansionTerm>,
    derivative: ThetaDerivative,
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    ft: Arc<dyn Fft<f64>>,
    it: Arc<dyn Fft<f64>>,
}

impl ModeGenerator {
    pub fn new(
        x_axis: &AxisGrid,
        theta_axis: &AxisGrid,
        u: &PolynomialPotential,
        quantum: bool,
        derivative: ThetaDerivative,
    ) -> Result<Self> {
        x_axis.require_kind(AxisKind::Position)?;
        theta_axis.require_kind(AxisKind::Angle)?;
        if !x_axis.is_centered() {
            return Err(Error::Axis("evolution needs a centered X axis".into()));
        }
        let (nx, nt) = (x_axis.len(), theta_axis.len());
        if nx % 2 != 0 || nt < 4 {
            return Err(Error::Axis("evolution needs an even X count and at least 4 angles".into()));
        }
        let thetas = theta_axis.points();
        let ik = angular_frequencies(nx, x_axis.step()).into_iter().map(|k| Complex64::new(0.0, k)).collect();
        let im = (0..2 * nt)
            .map(|m| if m == nt { 0.0 } else { signed_index(m, 2 * nt) as f64 })
            .map(|m| Complex64::new(0.0, m))
            .collect();
        let mut planner = FftPlanner::new();
        Ok(ModeGenerator {
            nx,
            nt,
            xs: x_axis.points(),
            mirror: (0..nx).map(|i| x_axis.mirror_index(i)).collect(),
            cos: thetas.iter().map(|t| t.cos()).collect(),
            sin: thetas.iter().map(|t| t.sin()).collect(),
            dtheta_step: theta_axis.step(),
            ik,
            im,
            terms: expansion_table(u, quantum),
            derivative,
            fx: planner.plan_fft_forward(nx),
            ix: planner.plan_fft_inverse(nx),
            ft: planner.plan_fft_forward(2 * nt),
            it: planner.plan_fft_inverse(2 * nt),
        })
    }

    pub fn terms(&self) -> &[ExpansionTerm] {
        &self.terms
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.nt)
    }

    /// Applies a multiplier per X frequency to every angle column.
    fn x_filter(&self, w: ArrayView2<f64>, factor: impl Fn(usize) -> Complex64) -> Array2<f64> {
        let (nx, nt) = (self.nx, self.nt);
        let mut buf: Vec<Complex64> = Vec::with_capacity(nx * nt);
        for j in 0..nt {
            buf.extend(w.column(j).iter().map(|&v| Complex64::new(v, 0.0)));
        }
        self.fx.process(&mut buf);
        for chunk in buf.chunks_mut(nx) {
            for (m, z) in chunk.iter_mut().enumerate() {
                *z *= factor(m);
            }
        }
        self.ix.process(&mut buf);
        let scale = 1.0 / nx as f64;
        Array2::from_shape_fn((nx, nt), |(i, j)| buf[j * nx + i].re * scale)
    }

    /// `∂X^n w`; odd orders drop the Nyquist bin.
    pub fn dx(&self, w: ArrayView2<f64>, n: usize) -> Array2<f64> {
        let nyq = self.nx / 2;
        self.x_filter(w, |m| {
            if n % 2 == 1 && m == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                self.ik[m].powu(n as u32)
            }
        })
    }

    /// Spectral antiderivative with the zero and Nyquist bins dropped, pinned to zero at the first X point.
    pub fn dx_inverse(&self, w: ArrayView2<f64>) -> Array2<f64> {
        let nyq = self.nx / 2;
        let mut g = self.x_filter(w, |m| {
            if m == 0 || m == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                1.0 / self.ik[m]
            }
        });
        for mut col in g.columns_mut() {
            let g0 = col[0];
            col.mapv_inplace(|v| v - g0);
        }
        g
    }

    /// `∂θ w` with the reflection rule `w(X, θ+π) = w(−X, θ)`.
    pub fn dtheta(&self, w: ArrayView2<f64>) -> Array2<f64> {
        match self.derivative {
            ThetaDerivative::Spectral => self.dtheta_spectral(w),
            ThetaDerivative::FourthOrder => self.dtheta_fd4(w),
        }
    }

    fn dtheta_spectral(&self, w: ArrayView2<f64>) -> Array2<f64> {
        let (nx, nt) = (self.nx, self.nt);
        let len = 2 * nt;
        let mut buf: Vec<Complex64> = Vec::with_capacity(nx * len);
        for i in 0..nx {
            let r = self.mirror[i];
            buf.extend(w.row(i).iter().map(|&v| Complex64::new(v, 0.0)));
            buf.extend(w.row(r).iter().map(|&v| Complex64::new(v, 0.0)));
        }
        self.ft.process(&mut buf);
        for chunk in buf.chunks_mut(len) {
            for (z, f) in chunk.iter_mut().zip(&self.im) {
                *z *= f;
            }
        }
        self.it.process(&mut buf);
        let scale = 1.0 / len as f64;
        Array2::from_shape_fn((nx, nt), |(i, j)| buf[i * len + j].re * scale)
    }

    fn dtheta_fd4(&self, w: ArrayView2<f64>) -> Array2<f64> {
        let nt = self.nt as isize;
        let at = |i: usize, j: isize| -> f64 {
            if j < 0 {
                w[[self.mirror[i], (j + nt) as usize]]
            } else if j >= nt {
                w[[self.mirror[i], (j - nt) as usize]]
            } else {
                w[[i, j as usize]]
            }
        };
        let h = 12.0 * self.dtheta_step;
        Array2::from_shape_fn((self.nx, self.nt), |(i, j)| {
            let j = j as isize;
            (-at(i, j + 2) + 8.0 * at(i, j + 1) - 8.0 * at(i, j - 1) + at(i, j - 2)) / h
        })
    }

    /// `A w = X cosθ w + sinθ (∂X)⁻¹ ∂θ w`.
    pub fn a_op(&self, w: ArrayView2<f64>) -> Array2<f64> {
        let mut out = self.dx_inverse(self.dtheta(w).view());
        Zip::indexed(&mut out).and(&w).for_each(|(i, j), o, &v| {
            *o = self.cos[j] * self.xs[i] * v + self.sin[j] * *o;
        });
        out
    }

    pub fn kinetic(&self, w: ArrayView2<f64>) -> Array2<f64> {
        let mut out = self.dtheta(w);
        let dxw = self.dx(w, 1);
        Zip::indexed(&mut out).and(&w).and(&dxw).for_each(|(i, j), o, &v, &d| {
            let (c, s) = (self.cos[j], self.sin[j]);
            *o = c * c * *o - s * c * (v + self.xs[i] * d);
        });
        out
    }

    /// Potential part, evaluated per X-derivative order by Horner's rule in `A`.
    pub fn potential(&self, w: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.nx, self.nt));
        let mut orders: Vec<usize> = self.terms.iter().map(|t| t.dx_order).collect();
        orders.dedup();
        for m in orders {
            let mut v = self.dx(w, m);
            for (j, mut col) in v.columns_mut().into_iter().enumerate() {
                let f = (0.5 * self.sin[j]).powi(m as i32);
                col.mapv_inplace(|x| x * f);
            }
            let top = self.terms.iter().filter(|t| t.dx_order == m).map(|t| t.a_power).max().unwrap_or(0);
            let coef = |p: usize| {
                self.terms.iter().find(|t| t.dx_order == m && t.a_power == p).map_or(0.0, |t| t.coef)
            };
            let mut acc = v.mapv(|x| x * coef(top));
            for p in (0..top).rev() {
                acc = self.a_op(acc.view());
                acc.scaled_add(coef(p), &v);
            }
            out += &acc;
        }
        out
    }

    pub fn apply(&self, w: ArrayView2<f64>) -> Array2<f64> {
        let mut out = self.kinetic(w);
        if !self.terms.is_empty() {
            out += &self.potential(w);
        }
        out
    }

    /// Estimate of the largest eigenvalue modulus by power iteration from a fixed start.
    pub fn spectral_radius(&self) -> f64 {
        let mut v = Array2::from_shape_fn((self.nx, self.nt), |(i, j)| {
            (1.3 * i as f64 + 0.7 * j as f64 + 0.11 * (i * j) as f64).sin()
        });
        let norm = |a: &Array2<f64>| a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut lambda = 0.0;
        for _ in 0..POWER_ITERATIONS {
            let u = self.apply(v.view());
            let (nu, nv) = (norm(&u), norm(&v));
            if nu == 0.0 || !nu.is_finite() {
                break;
            }
            lambda = nu / nv;
            v = u / nu;
        }
        lambda
    }

    /// Largest stable RK4 step, `RK4_RADIUS / ρ`.
    pub fn dt_max(&self) -> f64 {
        let rho = self.spectral_radius();
        if rho > 0.0 { RK4_RADIUS / rho } else { f64::INFINITY }
    }

    pub fn rk4(&self, w: &Array2<f64>, h: f64) -> Array2<f64> {
        let k1 = self.apply(w.view());
        let k2 = self.apply((w + &(&k1 * (0.5 * h))).view());
        let k3 = self.apply((w + &(&k2 * (0.5 * h))).view());
        let k4 = self.apply((w + &(&k3 * h)).view());
        let mut out = w.clone();
        Zip::from(&mut out).and(&k1).and(&k2).and(&k3).and(&k4).for_each(|o, a, b, c, d| {
            *o += h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> (AxisGrid, AxisGrid) {
        (
            AxisGrid::centered(AxisKind::Position, 8.0, 64).unwrap(),
            AxisGrid::angles(32).unwrap(),
        )
    }

    fn coherent(x: &AxisGrid, t: &AxisGrid, shift: f64) -> Array2<f64> {
        Array2::from_shape_fn((x.len(), t.len()), |(i, j)| {
            let th = t.point(j) + shift;
            let m = th.cos() + 0.5 * th.sin();
            (-(x.point(i) - m).powi(2)).exp() / PI.sqrt()
        })
    }

    #[test]
    fn harmonic_generator_is_rotation() {
        let (x, t) = grid();
        let g = ModeGenerator::new(&x, &t, &PolynomialPotential::harmonic(1.0), true, ThetaDerivative::Spectral).unwrap();
        let w = coherent(&x, &t, 0.0);
        let lhs = g.apply(w.view());
        let rhs = g.dtheta(w.view());
        let err = (&lhs - &rhs).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn theta_derivative_matches_analytic() {
        let (x, t) = grid();
        let w = coherent(&x, &t, 0.0);
        let h = 1e-6;
        let fd = (coherent(&x, &t, h) - coherent(&x, &t, -h)) / (2.0 * h);
        for (d, tol) in [(ThetaDerivative::Spectral, 1e-6), (ThetaDerivative::FourthOrder, 5e-3)] {
            let g = ModeGenerator::new(&x, &t, &PolynomialPotential::zero(), true, d).unwrap();
            let err = (&g.dtheta(w.view()) - &fd).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(err < tol, "{d}: {err}");
        }
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let (x, t) = grid();
        let g = ModeGenerator::new(&x, &t, &PolynomialPotential::zero(), true, ThetaDerivative::Spectral).unwrap();
        let w = coherent(&x, &t, 0.3);
        let back = g.dx_inverse(g.dx(w.view(), 1).view());
        let err = (&back - &w).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn free_generator_conserves_normalization() {
        let (x, t) = grid();
        let g = ModeGenerator::new(&x, &t, &PolynomialPotential::zero(), true, ThetaDerivative::Spectral).unwrap();
        let w = coherent(&x, &t, 0.0);
        let d = g.apply(w.view());
        for col in d.columns() {
            assert!(col.sum().abs() * x.step() < 1e-10);
        }
    }
}
