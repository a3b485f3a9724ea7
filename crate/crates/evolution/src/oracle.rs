//! Reference solvers: classical Liouville flow and quantum split-step propagation.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use tomo_core::{
    AxisGrid, AxisKind, DensityMatrix, Error, OpticalTomogram1, PhaseSpaceDensity, Result,
};
use tomo_transforms::spectral::angular_frequencies;
use tomo_transforms::{tomogram_from_density_matrix, tomogram_from_wavefunction};

use crate::potential::PolynomialPotential;

/// Leapfrog stability limit on `dt·√max|U″|`.
pub const LEAPFROG_LIMIT: f64 = 2.0;

/// Largest tolerated share of the norm in the top eighth of the momentum band.
pub const ALIASING_TOL: f64 = 1e-8;

/// 4-point Lagrange weights at fractional offset `f ∈ [0, 1)` for nodes −1, 0, 1, 2.
fn cubic_weights(f: f64) -> [f64; 4] {
    [
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    ]
}

fn bicubic(values: &Array2<f64>, qa: &AxisGrid, pa: &AxisGrid, q: f64, p: f64) -> f64 {
    let u = (q - qa.start()) / qa.step();
    let v = (p - pa.start()) / pa.step();
    let (i0, j0) = (u.floor(), v.floor());
    let (wu, wv) = (cubic_weights(u - i0), cubic_weights(v - j0));
    let (nq, np) = (qa.len() as isize, pa.len() as isize);
    let mut acc = 0.0;
    for (a, wa) in wu.iter().enumerate() {
        let i = i0 as isize - 1 + a as isize;
        if i < 0 || i >= nq {
            continue;
        }
        for (b, wb) in wv.iter().enumerate() {
            let j = j0 as isize - 1 + b as isize;
            if j < 0 || j >= np {
                continue;
            }
            acc += wa * wb * values[[i as usize, j as usize]];
        }
    }
    acc
}

/// Classical density after time `t`: each grid point is traced back along its
/// characteristic with leapfrog steps of at most `dt`, then `f₀` is interpolated there.
pub fn evolve_liouville_oracle(
    f0: &PhaseSpaceDensity,
    u: &PolynomialPotential,
    t: f64,
    dt: f64,
) -> Result<PhaseSpaceDensity> {
    if f0.particles() != 1 {
        return Err(Error::Shape("single-particle density expected".into()));
    }
    if !(dt > 0.0 && dt.is_finite() && t.is_finite()) {
        return Err(Error::InvalidArgument("dt must be positive and t finite".into()));
    }
    let (qa, pa) = (&f0.q_axes()[0], &f0.p_axes()[0]);
    let force = u.derivative();
    let curvature = force.derivative();
    let stiff = qa.points().iter().map(|&q| curvature.eval(q).abs()).fold(0.0, f64::max);
    if dt * stiff.sqrt() >= LEAPFROG_LIMIT {
        return Err(Error::CflViolation(format!(
            "dt·sqrt(max|U''|) = {} must stay below {LEAPFROG_LIMIT}",
            dt * stiff.sqrt()
        )));
    }
    let n = (t.abs() / dt).ceil().max(1.0) as usize;
    let h = -t / n as f64;
    let values = f0.values2()?.to_owned();
    let out = Array2::from_shape_fn((qa.len(), pa.len()), |(i, j)| {
        let (mut q, mut p) = (qa.point(i), pa.point(j));
        if t != 0.0 {
            for _ in 0..n {
                p -= 0.5 * h * force.eval(q);
                q += h * p;
                p -= 0.5 * h * force.eval(q);
            }
        }
        bicubic(&values, qa, pa, q, p)
    });
    PhaseSpaceDensity::single(qa.clone(), pa.clone(), out)
}

/// Quantum oracle state: a wavefunction or a density matrix on a matrix-x axis.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure { axis: AxisGrid, psi: Vec<Complex64> },
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn axis(&self) -> &AxisGrid {
        match self {
            QuantumState::Pure { axis, .. } => axis,
            QuantumState::Mixed(rho) => &rho.x_axes()[0],
        }
    }

    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        match self {
            QuantumState::Pure { axis, psi } => DensityMatrix::pure(axis.clone(), psi),
            QuantumState::Mixed(rho) => Ok(rho.clone()),
        }
    }

    pub fn tomogram(&self, x_axis: &AxisGrid, theta_axis: &AxisGrid) -> Result<OpticalTomogram1> {
        match self {
            QuantumState::Pure { axis, psi } => tomogram_from_wavefunction(psi, axis, x_axis, theta_axis),
            QuantumState::Mixed(rho) => tomogram_from_density_matrix(rho, x_axis, theta_axis),
        }
    }

    /// `Δx·tr ρ` or `Δx·Σ|ψ|²`.
    pub fn norm(&self) -> f64 {
        match self {
            QuantumState::Pure { axis, psi } => axis.step() * psi.iter().map(|z| z.norm_sqr()).sum::<f64>(),
            QuantumState::Mixed(rho) => rho.trace(),
        }
    }
}

struct SplitStep {
    kinetic: Vec<Complex64>,
    potential: Vec<Complex64>,
    steps: usize,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
    k: Vec<f64>,
}

impl SplitStep {
    fn new(axis: &AxisGrid, u: &PolynomialPotential, t: f64, dt: f64) -> Result<Self> {
        axis.require_kind(AxisKind::MatrixX)?;
        if !(dt > 0.0 && dt.is_finite() && t.is_finite()) {
            return Err(Error::InvalidArgument("dt must be positive and t finite".into()));
        }
        let n = axis.len();
        let steps = (t.abs() / dt).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let k = angular_frequencies(n, axis.step());
        let kinetic = k.iter().map(|&k| Complex64::from_polar(1.0 / n as f64, -k * k * h / 4.0)).collect();
        let potential = axis.points().iter().map(|&x| Complex64::from_polar(1.0, -u.eval(x) * h)).collect();
        let mut planner = FftPlanner::new();
        Ok(SplitStep { kinetic, potential, steps, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), k })
    }

    fn half_kick(&self, psi: &mut [Complex64]) {
        self.fwd.process(psi);
        psi.iter_mut().zip(&self.kinetic).for_each(|(z, f)| *z *= f);
        self.inv.process(psi);
    }

    fn propagate(&self, psi: &mut [Complex64]) {
        for _ in 0..self.steps {
            self.half_kick(psi);
            psi.iter_mut().zip(&self.potential).for_each(|(z, f)| *z *= f);
            self.half_kick(psi);
        }
    }

    fn high_band(&self) -> impl Iterator<Item = bool> + '_ {
        let kmax = self.k.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        self.k.iter().map(move |k| k.abs() > 0.875 * kmax)
    }

    /// Share of the norm with `|k|` in the top eighth of the band.
    fn tail(&self, psi: &[Complex64]) -> f64 {
        let mut spec = psi.to_vec();
        self.fwd.process(&mut spec);
        share(spec.iter().map(|z| z.norm_sqr()).zip(self.high_band()))
    }

    /// Share of the trace with `|k|` in the top eighth, from the diagonal of `F ρ F†`.
    fn mixed_tail(&self, rho: &Array2<Complex64>) -> f64 {
        let mut m = rho.clone();
        for _ in 0..2 {
            for mut col in m.columns_mut() {
                let mut buf = col.to_vec();
                self.fwd.process(&mut buf);
                col.iter_mut().zip(&buf).for_each(|(o, v)| *o = *v);
            }
            m = m.t().mapv(|z| z.conj());
        }
        share(m.diag().iter().map(|z| z.re).zip(self.high_band()))
    }

    fn check(&self, psi: &[Complex64]) -> Result<()> {
        aliasing(self.tail(psi))
    }
}

fn share(weights: impl Iterator<Item = (f64, bool)>) -> f64 {
    let (high, total) = weights.fold((0.0, 0.0), |(h, t), (w, hi)| (if hi { h + w } else { h }, t + w));
    if total > 0.0 { high / total } else { 0.0 }
}

fn aliasing(tail: f64) -> Result<()> {
    if tail > ALIASING_TOL {
        return Err(Error::GridAliasing { tail });
    }
    Ok(())
}

/// Propagates a wavefunction by Strang splitting with kinetic half-steps.
pub fn evolve_wavefunction(
    psi: &[Complex64],
    axis: &AxisGrid,
    u: &PolynomialPotential,
    t: f64,
    dt: f64,
) -> Result<Vec<Complex64>> {
    if psi.len() != axis.len() {
        return Err(Error::Shape("wavefunction length differs from its axis".into()));
    }
    let stepper = SplitStep::new(axis, u, t, dt)?;
    let mut out = psi.to_vec();
    stepper.check(&out)?;
    stepper.propagate(&mut out);
    stepper.check(&out)?;
    Ok(out)
}

/// Propagates a pure or mixed state; mixed states are propagated on both indices.
pub fn evolve_vonneumann_oracle(
    state: &QuantumState,
    u: &PolynomialPotential,
    t: f64,
    dt: f64,
) -> Result<QuantumState> {
    match state {
        QuantumState::Pure { axis, psi } => {
            Ok(QuantumState::Pure { axis: axis.clone(), psi: evolve_wavefunction(psi, axis, u, t, dt)? })
        }
        QuantumState::Mixed(rho) => {
            if rho.x_axes().len() != 1 {
                return Err(Error::Shape("single-mode density matrix expected".into()));
            }
            let axis = &rho.x_axes()[0];
            let stepper = SplitStep::new(axis, u, t, dt)?;
            let n = axis.len();
            // U ρ, column by column, then (U (U ρ)†)† = U ρ U†.
            aliasing(stepper.mixed_tail(rho.values()))?;
            let mut m = rho.values().clone();
            for _ in 0..2 {
                for j in 0..n {
                    let mut col: Vec<Complex64> = m.column(j).to_vec();
                    stepper.propagate(&mut col);
                    m.column_mut(j).iter_mut().zip(&col).for_each(|(o, v)| *o = *v);
                }
                m = m.t().mapv(|z| z.conj());
            }
            aliasing(stepper.mixed_tail(&m))?;
            Ok(QuantumState::Mixed(DensityMatrix::from_kernel(vec![axis.clone()], m)?))
        }
    }
}
