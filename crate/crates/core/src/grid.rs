use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// What a sample axis measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisKind {
    Position,
    Angle,
    PhaseQ,
    PhaseP,
    MatrixX,
    Time,
}

impl AxisKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisKind::Position => "position-X",
            AxisKind::Angle => "angle-theta",
            AxisKind::PhaseQ => "phase-q",
            AxisKind::PhaseP => "phase-p",
            AxisKind::MatrixX => "matrix-x",
            AxisKind::Time => "time",
        }
    }
}

impl fmt::Display for AxisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "position-X" => AxisKind::Position,
            "angle-theta" => AxisKind::Angle,
            "phase-q" => AxisKind::PhaseQ,
            "phase-p" => AxisKind::PhaseP,
            "matrix-x" => AxisKind::MatrixX,
            "time" => AxisKind::Time,
            other => return Err(Error::Axis(format!("unknown axis kind '{other}'"))),
        })
    }
}

const UNIFORM_TOL: f64 = 1e-12;

/// Uniformly spaced sample axis.
///
/// Angle axes always cover `[0, π)` with `count` samples; values at `θ + π`
/// follow from the reflection rule `w(X, θ + π) = w(-X, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisGrid {
    kind: AxisKind,
    start: f64,
    step: f64,
    count: usize,
}

impl AxisGrid {
    pub fn new(kind: AxisKind, start: f64, step: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && step.is_finite()) || step <= 0.0 {
            return Err(Error::Axis(format!("step must be positive and finite, got {step}")));
        }
        if count < 2 {
            return Err(Error::Axis(format!("need at least two samples, got {count}")));
        }
        if kind == AxisKind::Angle {
            let span = step * count as f64;
            if start.abs() > UNIFORM_TOL || (span - PI).abs() > UNIFORM_TOL * PI {
                return Err(Error::Axis(format!(
                    "angle axis must start at 0 and cover [0, π), got start {start} span {span}"
                )));
            }
        }
        Ok(AxisGrid { kind, start, step, count })
    }

    /// Builds an axis from explicit points, which must be strictly increasing and uniform.
    pub fn from_points(kind: AxisKind, points: &[f64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Axis("need at least two samples".into()));
        }
        let step = (points[points.len() - 1] - points[0]) / (points.len() - 1) as f64;
        for (i, w) in points.windows(2).enumerate() {
            let d = w[1] - w[0];
            if d <= 0.0 {
                return Err(Error::Axis(format!("points not increasing at index {i}")));
            }
            if (d - step).abs() > UNIFORM_TOL * step.abs().max(points[i].abs()) {
                return Err(Error::Axis(format!("non-uniform spacing at index {i}")));
            }
        }
        AxisGrid::new(kind, points[0], step, points.len())
    }

    /// `count` points on `[-half_width, half_width)`, the layout used for periodic spectral work.
    pub fn centered(kind: AxisKind, half_width: f64, count: usize) -> Result<Self> {
        if half_width <= 0.0 {
            return Err(Error::Axis(format!("half width must be positive, got {half_width}")));
        }
        AxisGrid::new(kind, -half_width, 2.0 * half_width / count as f64, count)
    }

    pub fn angles(count: usize) -> Result<Self> {
        AxisGrid::new(AxisKind::Angle, 0.0, PI / count as f64, count)
    }

    /// Default quadrature axis: `[-8, 8)` with 128 points.
    pub fn default_position() -> Self {
        AxisGrid::centered(AxisKind::Position, 8.0, 128).expect("valid default")
    }

    /// Default angle axis: 64 points on `[0, π)`.
    pub fn default_angles() -> Self {
        AxisGrid::angles(64).expect("valid default")
    }

    pub fn kind(&self) -> AxisKind {
        self.kind
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn last(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    /// Same sample layout, different kind.
    pub fn with_kind(&self, kind: AxisKind) -> Result<Self> {
        AxisGrid::new(kind, self.start, self.step, self.count)
    }

    /// Whether the axis is `[-L, L)` so that `-x_i` is the sample `(N - i) mod N`.
    pub fn is_centered(&self) -> bool {
        let half = 0.5 * self.step * self.count as f64;
        self.count % 2 == 0 && (self.start + half).abs() <= UNIFORM_TOL * half.max(1.0)
    }

    /// Index of the sample at `-x_i` on a centered axis (periodic wrap at the edge).
    pub fn mirror_index(&self, i: usize) -> usize {
        (self.count - i) % self.count
    }

    pub fn max_abs(&self) -> f64 {
        self.start.abs().max(self.last().abs())
    }

    /// Layout equality within the uniformity tolerance, ignoring the kind.
    pub fn same_layout(&self, other: &AxisGrid) -> bool {
        let scale = self.step.abs().max(self.start.abs()).max(1.0);
        self.count == other.count
            && (self.start - other.start).abs() <= UNIFORM_TOL * scale
            && (self.step - other.step).abs() <= UNIFORM_TOL * scale
    }

    pub fn require_same(&self, other: &AxisGrid, what: &str) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: ({}, {}, {}) vs ({}, {}, {})",
                self.start, self.step, self.count, other.start, other.step, other.count
            )))
        }
    }

    pub fn require_kind(&self, kind: AxisKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::Axis(format!("expected a {kind} axis, got {}", self.kind)))
        }
    }

    /// Nearest sample index and whether `x` lies on the grid within `1e-9` of a step.
    pub fn locate(&self, x: f64) -> (usize, bool) {
        let u = (x - self.start) / self.step;
        let i = u.round().clamp(0.0, (self.count - 1) as f64) as usize;
        (i, (u - i as f64).abs() <= 1e-9)
    }
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid<I>(values: I, step: f64) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut iter = values.into_iter();
    let Some(first) = iter.next() else { return 0.0 };
    let mut sum = 0.5 * first;
    let mut last = first;
    let mut n = 1usize;
    for v in iter {
        sum += v;
        last = v;
        n += 1;
    }
    if n == 1 {
        return 0.0;
    }
    (sum - 0.5 * last) * step
}

/// Trapezoid weight of sample `i` out of `n`.
pub fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_axes() {
        let x = AxisGrid::default_position();
        assert_eq!(x.len(), 128);
        assert_eq!(x.step(), 0.125);
        assert_eq!(x.point(0), -8.0);
        assert!(x.is_centered());
        assert_eq!(x.mirror_index(0), 0);
        assert_eq!(x.point(x.mirror_index(10)), -x.point(10));
        let t = AxisGrid::default_angles();
        assert!((t.step() * 64.0 - PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(AxisGrid::new(AxisKind::Position, 0.0, -1.0, 4).is_err());
        assert!(AxisGrid::new(AxisKind::Position, 0.0, 1.0, 1).is_err());
        assert!(AxisGrid::new(AxisKind::Angle, 0.1, PI / 4.0, 4).is_err());
        assert!(AxisGrid::from_points(AxisKind::Position, &[0.0, 1.0, 2.5]).is_err());
        assert!(AxisGrid::from_points(AxisKind::Position, &[0.0, -1.0]).is_err());
        let a = AxisGrid::from_points(AxisKind::Position, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(a.step(), 0.5);
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let h = 0.1;
        let v: Vec<f64> = (0..11).map(|i| 3.0 * i as f64 * h + 1.0).collect();
        assert!((trapezoid(v, h) - 2.5).abs() < 1e-14);
        assert_eq!(trapezoid(Vec::<f64>::new(), h), 0.0);
    }

    #[test]
    fn kind_round_trip() {
        for k in [
            AxisKind::Position,
            AxisKind::Angle,
            AxisKind::PhaseQ,
            AxisKind::PhaseP,
            AxisKind::MatrixX,
            AxisKind::Time,
        ] {
            assert_eq!(k.as_str().parse::<AxisKind>().unwrap(), k);
        }
    }

    #[test]
    fn locate_on_and_off_grid() {
        let t = AxisGrid::angles(8).unwrap();
        assert_eq!(t.locate(PI / 4.0), (2, true));
        assert!(!t.locate(0.3).1);
    }
}
