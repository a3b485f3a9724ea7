//! Analytic fixtures: classical densities, Wigner functions, wavefunctions,
//! density matrices and their exact optical tomograms.

use std::f64::consts::PI;
use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use tomo_core::{
    AxisGrid, AxisKind, DensityMatrix, Error, Normalize, OpticalTomogram1, PhaseSpaceDensity,
    Result,
};

/// Largest supported Fock number.
pub const MAX_FOCK: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Coherent { q0: f64, p0: f64 },
    Fock { n: u32 },
    Thermal { nbar: f64 },
    SqueezedGaussian { sigma_q: f64, sigma_p: f64, q0: f64, p0: f64 },
    ClassicalGaussian { sigma_q: f64, sigma_p: f64, q0: f64, p0: f64 },
    ClassicalUniformDisk { radius: f64 },
}

impl StateSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            StateSpec::Coherent { .. } => "coherent",
            StateSpec::Fock { .. } => "fock",
            StateSpec::Thermal { .. } => "thermal",
            StateSpec::SqueezedGaussian { .. } => "squeezed-gaussian",
            StateSpec::ClassicalGaussian { .. } => "classical-gaussian",
            StateSpec::ClassicalUniformDisk { .. } => "classical-uniform-disk",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be finite")))
            }
        };
        match *self {
            StateSpec::Coherent { q0, p0 } => {
                finite("q0", q0)?;
                finite("p0", p0)
            }
            StateSpec::Fock { n } if n > MAX_FOCK => {
                Err(Error::InvalidArgument(format!("Fock number {n} exceeds {MAX_FOCK}")))
            }
            StateSpec::Fock { .. } => Ok(()),
            StateSpec::Thermal { nbar } => positive("nbar", nbar),
            StateSpec::SqueezedGaussian { sigma_q, sigma_p, q0, p0 }
            | StateSpec::ClassicalGaussian { sigma_q, sigma_p, q0, p0 } => {
                positive("sigma_q", sigma_q)?;
                positive("sigma_p", sigma_p)?;
                finite("q0", q0)?;
                finite("p0", p0)
            }
            StateSpec::ClassicalUniformDisk { radius } => positive("radius", radius),
        }
    }

    /// Gaussian parameters `(q0, p0, σ_q², σ_p²)` for the Gaussian kinds.
    pub fn gaussian(&self) -> Option<(f64, f64, f64, f64)> {
        match *self {
            StateSpec::Coherent { q0, p0 } => Some((q0, p0, 0.5, 0.5)),
            StateSpec::Thermal { nbar } => Some((0.0, 0.0, nbar + 0.5, nbar + 0.5)),
            StateSpec::SqueezedGaussian { sigma_q, sigma_p, q0, p0 }
            | StateSpec::ClassicalGaussian { sigma_q, sigma_p, q0, p0 } => {
                Some((q0, p0, sigma_q * sigma_q, sigma_p * sigma_p))
            }
            _ => None,
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StateSpec::Coherent { q0, p0 } => write!(f, "coherent(q0={q0}, p0={p0})"),
            StateSpec::Fock { n } => write!(f, "fock(n={n})"),
            StateSpec::Thermal { nbar } => write!(f, "thermal(nbar={nbar})"),
            StateSpec::SqueezedGaussian { sigma_q, sigma_p, q0, p0 } => write!(
                f,
                "squeezed-gaussian(sigma_q={sigma_q}, sigma_p={sigma_p}, q0={q0}, p0={p0})"
            ),
            StateSpec::ClassicalGaussian { sigma_q, sigma_p, q0, p0 } => write!(
                f,
                "classical-gaussian(sigma_q={sigma_q}, sigma_p={sigma_p}, q0={q0}, p0={p0})"
            ),
            StateSpec::ClassicalUniformDisk { radius } => {
                write!(f, "classical-uniform-disk(radius={radius})")
            }
        }
    }
}

/// Laguerre polynomial `L_n(x)`.
pub fn laguerre(n: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 1.0 - x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let k = k as f64;
        let c = ((2.0 * k + 1.0 - x) * b - k * a) / (k + 1.0);
        a = b;
        b = c;
    }
    b
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = 2.0 * x * b - 2.0 * k as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// Oscillator eigenfunction `ψ_n(x)`.
pub fn fock_wavefunction(n: u32, x: f64) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let norm = (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt();
    hermite(n, x) * (-x * x / 2.0).exp() / norm
}

fn gaussian_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// Phase-space density; the Wigner function for quantum kinds.
///
/// The uniform disk is rescaled so its grid integral is exactly one.
pub fn make_phase_space(
    spec: &StateSpec,
    q_axis: &AxisGrid,
    p_axis: &AxisGrid,
) -> Result<PhaseSpaceDensity> {
    spec.validate()?;
    let q_axis = q_axis.with_kind(AxisKind::PhaseQ)?;
    let p_axis = p_axis.with_kind(AxisKind::PhaseP)?;
    let f = match *spec {
        StateSpec::Fock { n } => PhaseSpaceDensity::from_fn(q_axis, p_axis, |q, p| {
            let r2 = q * q + p * p;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign / PI * (-r2).exp() * laguerre(n, 2.0 * r2)
        })?,
        StateSpec::ClassicalUniformDisk { radius } => {
            let inside = 1.0 / (PI * radius * radius);
            PhaseSpaceDensity::from_fn(q_axis, p_axis, |q, p| {
                if q * q + p * p <= radius * radius { inside } else { 0.0 }
            })?
            .normalize()?
        }
        _ => {
            let (q0, p0, vq, vp) = spec.gaussian().expect("Gaussian kind");
            PhaseSpaceDensity::from_fn(q_axis, p_axis, |q, p| {
                gaussian_pdf(q, q0, vq) * gaussian_pdf(p, p0, vp)
            })?
        }
    };
    Ok(f)
}

/// Exact optical tomogram, renormalized per angle on the grid.
pub fn make_tomogram(
    spec: &StateSpec,
    x_axis: &AxisGrid,
    theta_axis: &AxisGrid,
) -> Result<OpticalTomogram1> {
    spec.validate()?;
    let w = match *spec {
        StateSpec::Fock { n } => OpticalTomogram1::from_fn(x_axis.clone(), theta_axis.clone(), |x, _| {
            fock_wavefunction(n, x).powi(2)
        })?,
        StateSpec::ClassicalUniformDisk { radius } => {
            let r2 = radius * radius;
            OpticalTomogram1::from_fn(x_axis.clone(), theta_axis.clone(), |x, _| {
                if x * x < r2 { 2.0 / (PI * r2) * (r2 - x * x).sqrt() } else { 0.0 }
            })?
        }
        _ => {
            let (q0, p0, vq, vp) = spec.gaussian().expect("Gaussian kind");
            OpticalTomogram1::from_fn(x_axis.clone(), theta_axis.clone(), |x, th| {
                let (c, s) = (th.cos(), th.sin());
                gaussian_pdf(x, q0 * c + p0 * s, vq * c * c + vp * s * s)
            })?
        }
    };
    w.normalize()
}

/// Wavefunction of the pure kinds (coherent, Fock, minimum-uncertainty squeezed).
pub fn make_wavefunction(spec: &StateSpec, axis: &AxisGrid) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let xs = axis.points();
    match *spec {
        StateSpec::Fock { n } => {
            Ok(xs.iter().map(|&x| Complex64::new(fock_wavefunction(n, x), 0.0)).collect())
        }
        StateSpec::Coherent { .. } | StateSpec::SqueezedGaussian { .. } => {
            let (q0, p0, vq, vp) = spec.gaussian().expect("Gaussian kind");
            if (4.0 * vq * vp - 1.0).abs() > 1e-12 {
                return Err(Error::UnsupportedKind(format!("{spec} is not a pure state")));
            }
            let amp = (2.0 * PI * vq).powf(-0.25);
            Ok(xs
                .iter()
                .map(|&x| Complex64::from_polar(amp * (-(x - q0).powi(2) / (4.0 * vq)).exp(), p0 * x))
                .collect())
        }
        _ => Err(Error::UnsupportedKind(format!("{spec} has no wavefunction"))),
    }
}

/// Density matrix `ρ(x, x′)`; for Gaussian kinds from the Fourier transform of the Wigner function.
pub fn make_density_matrix(spec: &StateSpec, axis: &AxisGrid) -> Result<DensityMatrix> {
    spec.validate()?;
    let axis = axis.with_kind(AxisKind::MatrixX)?;
    if let StateSpec::Fock { .. } = spec {
        return DensityMatrix::pure(axis.clone(), &make_wavefunction(spec, &axis)?);
    }
    let Some((q0, p0, vq, vp)) = spec.gaussian() else {
        return Err(Error::UnsupportedKind(format!("{spec} has no closed-form density matrix")));
    };
    let xs = axis.points();
    let values = Array2::from_shape_fn((xs.len(), xs.len()), |(i, j)| {
        let (a, b) = (xs[i], xs[j]);
        let d = a - b;
        Complex64::from_polar(
            gaussian_pdf(0.5 * (a + b), q0, vq) * (-0.5 * vp * d * d).exp(),
            p0 * d,
        )
    });
    DensityMatrix::from_kernel(vec![axis], values)
}
