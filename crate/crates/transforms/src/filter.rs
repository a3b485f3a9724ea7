use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use tomo_core::{Error, Result};

use crate::spectral::{angular_frequencies, signed_index, FftCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Apodization {
    /// Hard cut at the cutoff frequency.
    None,
    /// Flat band followed by a half-cosine roll-off that reaches zero at the cutoff.
    RaisedCosine,
}

impl Apodization {
    pub fn as_str(self) -> &'static str {
        match self {
            Apodization::None => "none",
            Apodization::RaisedCosine => "raised-cosine",
        }
    }
}

impl FromStr for Apodization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Apodization::None),
            "raised-cosine" => Ok(Apodization::RaisedCosine),
            other => Err(Error::InvalidArgument(format!("unknown apodization '{other}'"))),
        }
    }
}

/// Band limit of the `|η|` ramp used by filtered back-projection.
///
/// `cutoff_fraction` is relative to the Nyquist frequency of the X axis.
/// With raised-cosine apodization the last `rolloff` fraction of the band
/// tapers to zero; `rolloff = 1` is a full Hann window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampFilterSpec {
    pub cutoff_fraction: f64,
    pub apodization: Apodization,
    pub rolloff: f64,
}

impl Default for RampFilterSpec {
    fn default() -> Self {
        RampFilterSpec { cutoff_fraction: 0.9, apodization: Apodization::RaisedCosine, rolloff: 0.5 }
    }
}

impl RampFilterSpec {
    pub fn new(cutoff_fraction: f64, apodization: Apodization, rolloff: f64) -> Result<Self> {
        let spec = RampFilterSpec { cutoff_fraction, apodization, rolloff };
        spec.validate()?;
        Ok(spec)
    }

    /// Full Hann window, suited to densities with sharp edges.
    pub fn hann(cutoff_fraction: f64) -> Self {
        RampFilterSpec { cutoff_fraction, apodization: Apodization::RaisedCosine, rolloff: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff_fraction > 0.0 && self.cutoff_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff fraction must lie in (0, 1], got {}",
                self.cutoff_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::InvalidArgument(format!(
                "rolloff must lie in [0, 1], got {}",
                self.rolloff
            )));
        }
        Ok(())
    }

    /// Window value at angular frequency `eta` for sample spacing `d`.
    pub fn window(&self, eta: f64, d: f64) -> f64 {
        let edge = self.cutoff_fraction * PI / d;
        let a = eta.abs();
        if a >= edge {
            return 0.0;
        }
        match self.apodization {
            Apodization::None => 1.0,
            Apodization::RaisedCosine => {
                let flat = (1.0 - self.rolloff) * edge;
                if a <= flat {
                    1.0
                } else {
                    0.5 * (1.0 + (PI * (a - flat) / (edge - flat)).cos())
                }
            }
        }
    }

    /// Ramp response sampled on `p` FFT bins of spacing `d`.
    ///
    /// The ramp is the transform of the sampled spatial kernel
    /// `h(0) = 1/(4d²)`, `h(odd n) = -1/(π² n² d²)`, which keeps the zero
    /// frequency at its consistent finite value instead of forcing it to 0.
    pub fn response(&self, p: usize, d: f64, fft: &mut FftCache) -> Vec<f64> {
        let mut h: Vec<Complex64> = (0..p)
            .map(|m| {
                let n = signed_index(m, p);
                let v = if n == 0 {
                    1.0 / (4.0 * d * d)
                } else if n % 2 != 0 {
                    -1.0 / (PI * PI * (n * n) as f64 * d * d)
                } else {
                    0.0
                };
                Complex64::new(v, 0.0)
            })
            .collect();
        fft.forward(&mut h);
        let eta = angular_frequencies(p, d);
        h.iter().zip(eta).map(|(z, e)| z.re * d * self.window(e, d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_approximates_ramp() {
        let d = 0.1;
        let p = 256;
        let spec = RampFilterSpec::new(1.0, Apodization::None, 0.0).unwrap();
        let h = spec.response(p, d, &mut FftCache::new());
        let eta = angular_frequencies(p, d);
        for m in 1..p / 4 {
            let rel = (h[m] - eta[m].abs() / (2.0 * PI)).abs() / (eta[m].abs() / (2.0 * PI));
            assert!(rel < 0.05, "m={m} rel={rel}");
        }
        assert!(h[0] > 0.0 && h[0] < 0.01 / d);
    }

    #[test]
    fn window_shape() {
        let s = RampFilterSpec::default();
        let d = 1.0;
        assert_eq!(s.window(0.0, d), 1.0);
        assert_eq!(s.window(0.4 * PI, d), 1.0);
        assert!((s.window(0.675 * PI, d) - 0.5).abs() < 1e-12);
        assert_eq!(s.window(0.9 * PI, d), 0.0);
    }

    #[test]
    fn rejects_bad_cutoff() {
        assert!(RampFilterSpec::new(0.0, Apodization::None, 0.0).is_err());
        assert!(RampFilterSpec::new(1.2, Apodization::None, 0.0).is_err());
        assert!(RampFilterSpec::new(0.5, Apodization::RaisedCosine, 1.5).is_err());
    }
}
