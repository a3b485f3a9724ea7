//! Small FFT helpers over `rustfft`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Cached forward and inverse plans keyed by length.
pub struct FftCache {
    planner: FftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

impl Default for FftCache {
    fn default() -> Self {
        FftCache { planner: FftPlanner::new(), forward: HashMap::new(), inverse: HashMap::new() }
    }
}

impl FftCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        let n = data.len();
        let planner = &mut self.planner;
        self.forward.entry(n).or_insert_with(|| planner.plan_fft_forward(n)).process(data);
    }

    /// Unnormalized inverse transform in place.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let n = data.len();
        let planner = &mut self.planner;
        self.inverse.entry(n).or_insert_with(|| planner.plan_fft_inverse(n)).process(data);
    }

    pub fn forward_plan(&mut self, n: usize) -> Arc<dyn Fft<f64>> {
        let planner = &mut self.planner;
        self.forward.entry(n).or_insert_with(|| planner.plan_fft_forward(n)).clone()
    }

    pub fn inverse_plan(&mut self, n: usize) -> Arc<dyn Fft<f64>> {
        let planner = &mut self.planner;
        self.inverse.entry(n).or_insert_with(|| planner.plan_fft_inverse(n)).clone()
    }
}

/// Signed FFT bin index: `0, 1, …, n/2, -(n/2 - 1), …, -1` (Nyquist kept positive).
pub fn signed_index(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Angular frequencies `2π m / (n d)` in FFT order.
pub fn angular_frequencies(n: usize, d: f64) -> Vec<f64> {
    (0..n).map(|m| 2.0 * PI * signed_index(m, n) as f64 / (n as f64 * d)).collect()
}

/// Band-limited periodic interpolation kernel for `n` samples per period.
///
/// For even `n` the Nyquist mode enters as a cosine, so the kernel is
/// `sin(n u/2) / (n tan(u/2))` with `u` the phase offset in radians.
pub fn periodic_sinc(u: f64, n: usize) -> f64 {
    let u = u.rem_euclid(2.0 * PI);
    let t = (0.5 * u).tan();
    if t.abs() < 1e-12 || (u - 2.0 * PI).abs() < 1e-12 {
        return 1.0;
    }
    let nf = n as f64;
    if n % 2 == 0 {
        (0.5 * nf * u).sin() / (nf * t)
    } else {
        (0.5 * nf * u).sin() / (nf * (0.5 * u).sin())
    }
}

/// `Σ_m cos(m α)` over the `n` FFT bins of an even-length transform, Nyquist included once.
pub fn dirichlet_sum(alpha: f64, n: usize) -> f64 {
    let a = alpha.rem_euclid(2.0 * PI);
    let s = (0.5 * a).sin();
    let nf = n as f64;
    if s.abs() < 1e-9 {
        let half = (n / 2) as i64;
        return (-half..half).map(|m| (m as f64 * a).cos()).sum();
    }
    ((nf - 1.0) * 0.5 * a).sin() / s + (0.5 * nf * a).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = FftCache::new();
        let orig: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let mut v = orig.clone();
        c.forward(&mut v);
        c.inverse(&mut v);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a / 12.0 - b).norm() < 1e-13);
        }
    }

    #[test]
    fn sinc_reproduces_samples_and_trig_polynomials() {
        let n = 16;
        for k in 0..n {
            let u = 2.0 * PI * k as f64 / n as f64;
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((periodic_sinc(u, n) - want).abs() < 1e-12);
        }
        let f = |x: f64| 1.0 + (3.0 * x).cos() - 0.5 * (2.0 * x).sin();
        let x0 = 0.37;
        let interp: f64 = (0..n)
            .map(|k| {
                let xk = 2.0 * PI * k as f64 / n as f64;
                f(xk) * periodic_sinc(x0 - xk, n)
            })
            .sum();
        assert!((interp - f(x0)).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_matches_direct_sum() {
        for &a in &[0.0, 1e-12, 0.3, 2.0, PI, 2.0 * PI - 1e-13, 7.0] {
            let direct: f64 = (-8i64..8).map(|m| (m as f64 * a).cos()).sum();
            assert!((dirichlet_sum(a, 16) - direct).abs() < 1e-8, "{a}");
        }
    }
}
