//! Polynomial potentials `U(q) = Σ c_j q^j` and their tomographic expansion tables.

use std::fmt;
use std::str::FromStr;

use tomo_core::{Error, Result};

/// Highest supported degree.
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolynomialPotential {
    coeffs: Vec<f64>,
}

impl PolynomialPotential {
    /// Coefficients `c₀, c₁, …`; trailing zeros are dropped.
    pub fn new(coeffs: &[f64]) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Potential(format!("coefficient {c} is not finite")));
        }
        let mut coeffs = coeffs.to_vec();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::Degree { degree: coeffs.len() - 1, max: MAX_DEGREE });
        }
        Ok(PolynomialPotential { coeffs })
    }

    pub fn zero() -> Self {
        PolynomialPotential::default()
    }

    /// `ω² q² / 2`.
    pub fn harmonic(omega: f64) -> Self {
        PolynomialPotential { coeffs: vec![0.0, 0.0, 0.5 * omega * omega] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `q^j` (zero beyond the degree).
    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * q + c)
    }

    pub fn derivative(&self) -> PolynomialPotential {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect();
        PolynomialPotential { coeffs }
    }

    /// Rejects even-degree potentials whose leading coefficient is negative.
    pub fn require_confining(&self) -> Result<()> {
        let d = self.degree();
        if d >= 2 && d % 2 == 0 && self.coeffs[d] < 0.0 {
            return Err(Error::Potential(format!(
                "leading coefficient {} of degree-{d} potential must be nonnegative",
                self.coeffs[d]
            )));
        }
        Ok(())
    }
}

impl fmt::Display for PolynomialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            match (first, sign) {
                (true, "-") => write!(f, "-")?,
                (true, _) => {}
                (false, s) => write!(f, " {s} ")?,
            }
            match j {
                0 => write!(f, "{mag:?}")?,
                1 => write!(f, "{mag:?}*q")?,
                _ => write!(f, "{mag:?}*q^{j}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FromStr for PolynomialPotential {
    type Err = Error;

    /// Parses terms `c*q^k`, `c*q`, `q^k`, `q` or `c` joined by `+` and `-`.
    fn from_str(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(Error::Potential("empty potential".into()));
        }
        let mut coeffs = [0.0; MAX_DEGREE + 1];
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = text.as_bytes();
        for i in 1..bytes.len() {
            let prev = bytes[i - 1];
            let exponent_sign = matches!(prev, b'e' | b'E') && i >= 2 && bytes[i - 2].is_ascii_digit();
            let after_operator = matches!(prev, b'+' | b'-' | b'^' | b'*');
            if matches!(bytes[i], b'+' | b'-') && !exponent_sign && !after_operator {
                terms.push(&text[start..i]);
                start = i;
            }
        }
        terms.push(&text[start..]);
        for term in terms {
            let (degree, c) = parse_term(term)?;
            if degree > MAX_DEGREE {
                return Err(Error::Degree { degree, max: MAX_DEGREE });
            }
            coeffs[degree] += c;
        }
        PolynomialPotential::new(&coeffs)
    }
}

fn parse_term(term: &str) -> Result<(usize, f64)> {
    let bad = || Error::Potential(format!("cannot parse term '{term}'"));
    let (sign, body) = match term.as_bytes().first() {
        Some(b'+') => (1.0, &term[1..]),
        Some(b'-') => (-1.0, &term[1..]),
        _ => (1.0, term),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let Some(qpos) = body.find('q') else {
        return Ok((0, sign * body.parse::<f64>().map_err(|_| bad())?));
    };
    let coef = match &body[..qpos] {
        "" => 1.0,
        c => c.strip_suffix('*').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
    };
    let degree = match &body[qpos + 1..] {
        "" => 1,
        rest => rest.strip_prefix('^').ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?,
    };
    Ok((degree, sign * coef))
}

/// One term `coef · A^a_power ((sinθ/2)^dx_order ∂_X^dx_order w)` of the potential part of the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerm {
    pub coef: f64,
    pub dx_order: usize,
    pub a_power: usize,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Expansion of the potential term for one particle.
///
/// A quantum particle keeps every odd order `m` of the operator argument's
/// imaginary part, `2 C(j, m) (−1)^{(m−1)/2} u_j`; a classical particle keeps
/// the first order only, which is the derivative `U′` substituted afterwards.
/// Terms with equal `(dx_order, a_power)` are merged.
pub fn expansion_table(u: &PolynomialPotential, quantum: bool) -> Vec<ExpansionTerm> {
    let mut table: Vec<ExpansionTerm> = Vec::new();
    for j in 1..=u.degree() {
        let uj = u.coeff(j);
        if uj == 0.0 {
            continue;
        }
        let top = if quantum { j } else { 1 };
        for m in (1..=top).step_by(2) {
            let sign = if (m - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
            let coef = 2.0 * binomial(j, m) * sign * uj;
            match table.iter_mut().find(|t| t.dx_order == m && t.a_power == j - m) {
                Some(t) => t.coef += coef,
                None => table.push(ExpansionTerm { coef, dx_order: m, a_power: j - m }),
            }
        }
    }
    table.sort_by_key(|t| (t.dx_order, t.a_power));
    table
}
