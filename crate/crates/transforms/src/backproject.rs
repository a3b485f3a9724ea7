//! Filtered back-projection on arbitrary evaluation points.

use std::f64::consts::PI;

use ndarray::ArrayView2;
use num_complex::Complex64;
use tomo_core::AxisGrid;

use crate::filter::RampFilterSpec;
use crate::spectral::FftCache;

const PAD: usize = 4;
const UPSAMPLE: usize = 4;

/// Six-point Lagrange weights for fractional offset `u ∈ [2, 3)` on nodes `0..6`.
fn lagrange6(u: f64) -> [f64; 6] {
    let mut w = [1.0; 6];
    for (j, wj) in w.iter_mut().enumerate() {
        for k in 0..6 {
            if k != j {
                *wj *= (u - k as f64) / (j as f64 - k as f64);
            }
        }
    }
    w
}

/// Ramp-filtered projections resampled on a fine, zero-padded X grid.
pub struct FilteredProjections {
    /// `fine[j]` holds the filtered projection at angle `j`.
    fine: Vec<Vec<f64>>,
    fine_start: f64,
    fine_step: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    weight: f64,
}

/// Zero-pads a column, applies the ramp and band-limited upsampling.
struct Filterer {
    n: usize,
    offset: usize,
    response: Vec<f64>,
    fft: FftCache,
}

impl Filterer {
    fn new(n: usize, d: f64, filter: &RampFilterSpec) -> Self {
        let p = PAD * n;
        let mut fft = FftCache::new();
        let response = filter.response(p, d, &mut fft);
        Filterer { n, offset: (p - n) / 2, response, fft }
    }

    fn apply(&mut self, column: impl Iterator<Item = f64>) -> Vec<f64> {
        let p = PAD * self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); p];
        for (i, v) in column.enumerate() {
            buf[self.offset + i] = Complex64::new(v, 0.0);
        }
        self.fft.forward(&mut buf);
        let m = p * UPSAMPLE;
        let h = p / 2;
        let mut up = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..h {
            up[k] = buf[k] * self.response[k];
        }
        for k in h + 1..p {
            up[m - p + k] = buf[k] * self.response[k];
        }
        let nyq = buf[h] * self.response[h] * 0.5;
        up[h] = nyq;
        up[m - h] = nyq;
        self.fft.inverse(&mut up);
        let scale = 1.0 / p as f64;
        up.iter().map(|z| z.re * scale).collect()
    }
}

impl FilteredProjections {
    /// Filters every angle column of `values` (shape `[X, θ]`).
    pub fn new(
        values: ArrayView2<'_, f64>,
        x_axis: &AxisGrid,
        theta_axis: &AxisGrid,
        filter: &RampFilterSpec,
    ) -> Self {
        let n = x_axis.len();
        let d = x_axis.step();
        let mut f = Filterer::new(n, d, filter);
        let fine = (0..theta_axis.len()).map(|j| f.apply(values.column(j).iter().copied())).collect();
        let mut out = Self::empty(x_axis, theta_axis, f.offset);
        out.fine = fine;
        out
    }

    fn empty(x_axis: &AxisGrid, theta_axis: &AxisGrid, offset: usize) -> Self {
        let d = x_axis.step();
        let th = theta_axis.points();
        FilteredProjections {
            fine: Vec::new(),
            fine_start: x_axis.start() - offset as f64 * d,
            fine_step: d / UPSAMPLE as f64,
            cos: th.iter().map(|t| t.cos()).collect(),
            sin: th.iter().map(|t| t.sin()).collect(),
            weight: PI / theta_axis.len() as f64,
        }
    }

    /// Interpolated value of a fine line at `x`; `shift` rotates the line circularly.
    fn sample(&self, line: &[f64], x: f64, shift: usize) -> f64 {
        let t = (x - self.fine_start) / self.fine_step;
        let fl = t.floor();
        let w = lagrange6(t - fl + 2.0);
        let base = fl as i64 - 2;
        let m = line.len() as i64;
        let shift = shift as i64;
        let mut acc = 0.0;
        for (k, wk) in w.iter().enumerate() {
            let idx = base + k as i64;
            if idx >= 0 && idx < m {
                acc += wk * line[(idx - shift).rem_euclid(m) as usize];
            }
        }
        acc
    }

    /// Back-projected value at `(q, p)`.
    pub fn eval(&self, q: f64, p: f64) -> f64 {
        let mut acc = 0.0;
        for (j, line) in self.fine.iter().enumerate() {
            acc += self.sample(line, q * self.cos[j] + p * self.sin[j], 0);
        }
        acc * self.weight
    }
}

/// Response of the pipeline to a unit sample at `X_a` in a single angle column.
///
/// Filtering is shift-invariant on the padded grid, so one filtered impulse
/// serves every `a` by shifting the fine-grid index by `a·UPSAMPLE`.
pub struct ImpulseResponse {
    proj: FilteredProjections,
    line: Vec<f64>,
}

impl ImpulseResponse {
    pub fn new(x_axis: &AxisGrid, theta_axis: &AxisGrid, filter: &RampFilterSpec) -> Self {
        let n = x_axis.len();
        let mut f = Filterer::new(n, x_axis.step(), filter);
        let line = f.apply((0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }));
        let proj = FilteredProjections::empty(x_axis, theta_axis, f.offset);
        ImpulseResponse { proj, line }
    }

    /// Contribution at `(q, p)` of a unit value at `(X_a, θ_j)`.
    pub fn eval(&self, a: usize, j: usize, q: f64, p: f64) -> f64 {
        let x = q * self.proj.cos[j] + p * self.proj.sin[j];
        self.proj.weight * self.proj.sample(&self.line, x, a * UPSAMPLE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use tomo_core::AxisKind;

    #[test]
    fn lagrange_reproduces_quintic() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) - 0.1 * x.powi(5);
        let u = 2.37;
        let w = lagrange6(u);
        let v: f64 = (0..6).map(|k| w[k] * f(k as f64)).sum();
        assert!((v - f(u)).abs() < 1e-10);
    }

    #[test]
    fn impulse_response_matches_full_pipeline() {
        let x = AxisGrid::centered(AxisKind::Position, 4.0, 32).unwrap();
        let t = AxisGrid::angles(8).unwrap();
        let filter = RampFilterSpec::default();
        let imp = ImpulseResponse::new(&x, &t, &filter);
        let (a, j) = (11, 3);
        let mut v = Array2::zeros((32, 8));
        v[[a, j]] = 1.0;
        let full = FilteredProjections::new(v.view(), &x, &t, &filter);
        for &(q, p) in &[(0.0, 0.0), (0.7, -1.3), (-2.2, 0.4)] {
            assert!((imp.eval(a, j, q, p) - full.eval(q, p)).abs() < 1e-13);
        }
    }
}
