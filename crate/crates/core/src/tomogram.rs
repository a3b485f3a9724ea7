use nalgebra::DMatrix;
use ndarray::{Array2, Array4, ArrayD, Axis, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{trapezoid, trapezoid_weight, AxisGrid, AxisKind};
use crate::tolerance::Tolerances;

/// One named check of a type invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

/// Outcome of checking an object against its invariants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvariantReport {
    pub checks: Vec<Check>,
}

impl InvariantReport {
    fn push(&mut self, name: &'static str, value: f64, limit: f64, passed: bool) {
        self.checks.push(Check { name, value, limit, passed: passed && value.is_finite() });
    }

    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn summary(&self) -> String {
        let parts: Vec<String> = self
            .failures()
            .map(|c| format!("{} = {:e} (limit {:e})", c.name, c.value, c.limit))
            .collect();
        if parts.is_empty() {
            "all invariants hold".to_string()
        } else {
            parts.join("; ")
        }
    }

    fn into_result<T>(self, value: T) -> Result<T> {
        if self.is_ok() {
            Ok(value)
        } else {
            Err(Error::Invariant(self.summary()))
        }
    }
}

/// Per-angle rescaling so every angle integrates to one.
pub trait Normalize: Sized {
    fn normalize(&self) -> Result<Self>;
}

/// Free-function form of [`Normalize::normalize`].
pub fn normalize<T: Normalize>(w: &T) -> Result<T> {
    w.normalize()
}

// Relative distance from one below which a slice is left untouched, so that
// normalizing twice is bit-identical to normalizing once.
const NORMALIZED_SLACK: f64 = 1e-13;

fn rescale_factor(index: usize, integral: f64) -> Result<Option<f64>> {
    if !(integral > 0.0) {
        return Err(Error::DegenerateTomogram { index, integral });
    }
    if (integral - 1.0).abs() <= NORMALIZED_SLACK {
        Ok(None)
    } else {
        Ok(Some(1.0 / integral))
    }
}

fn min_max<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn require_finite<'a>(mut values: impl Iterator<Item = &'a f64>, what: &str) -> Result<()> {
    if values.all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Invariant(format!("{what} contains non-finite values")))
    }
}

/// Single-particle optical tomogram `w(X, θ)`, stored with shape `[X, θ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalTomogram1 {
    x_axis: AxisGrid,
    theta_axis: AxisGrid,
    values: Array2<f64>,
}

impl OpticalTomogram1 {
    /// Wraps values after checking axis kinds, shape and finiteness only.
    pub fn new(x_axis: AxisGrid, theta_axis: AxisGrid, values: Array2<f64>) -> Result<Self> {
        x_axis.require_kind(AxisKind::Position)?;
        theta_axis.require_kind(AxisKind::Angle)?;
        if values.dim() != (x_axis.len(), theta_axis.len()) {
            return Err(Error::Shape(format!(
                "values {:?} vs axes ({}, {})",
                values.dim(),
                x_axis.len(),
                theta_axis.len()
            )));
        }
        require_finite(values.iter(), "tomogram")?;
        Ok(OpticalTomogram1 { x_axis, theta_axis, values })
    }

    /// Fills values from `f(X, θ)`.
    pub fn from_fn(
        x_axis: AxisGrid,
        theta_axis: AxisGrid,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let values = Array2::from_shape_fn((x_axis.len(), theta_axis.len()), |(i, j)| {
            f(x_axis.point(i), theta_axis.point(j))
        });
        OpticalTomogram1::new(x_axis, theta_axis, values)
    }

    pub fn x_axis(&self) -> &AxisGrid {
        &self.x_axis
    }

    pub fn theta_axis(&self) -> &AxisGrid {
        &self.theta_axis
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn angle_integrals(&self) -> Vec<f64> {
        let h = self.x_axis.step();
        self.values.axis_iter(Axis(1)).map(|col| trapezoid(col.iter().copied(), h)).collect()
    }

    /// Most negative (or smallest) value.
    pub fn sign_floor(&self) -> f64 {
        min_max(self.values.iter()).0
    }

    pub fn max_value(&self) -> f64 {
        min_max(self.values.iter()).1
    }

    pub fn check(&self, tol: &Tolerances) -> InvariantReport {
        let mut r = InvariantReport::default();
        let dev = self.angle_integrals().iter().fold(0.0f64, |m, i| m.max((i - 1.0).abs()));
        r.push("normalization", dev, tol.norm, dev <= tol.norm);
        let (lo, hi) = min_max(self.values.iter());
        let eps = tol.grid_rel * hi.abs();
        r.push("sign_floor", lo, -eps, lo >= -eps);
        r
    }

    pub fn validate(self, tol: &Tolerances) -> Result<Self> {
        self.check(tol).into_result(self)
    }

    /// Value at `(X_i, θ_j + π·k)` through the reflection rule; needs a centered X axis.
    pub fn extended(&self, i: usize, j: usize) -> f64 {
        let n = self.theta_axis.len();
        if j < n {
            self.values[[i, j]]
        } else {
            self.values[[self.x_axis.mirror_index(i), j - n]]
        }
    }
}

impl Normalize for OpticalTomogram1 {
    fn normalize(&self) -> Result<Self> {
        let mut out = self.clone();
        for (j, integral) in self.angle_integrals().into_iter().enumerate() {
            if let Some(s) = rescale_factor(j, integral)? {
                out.values.column_mut(j).mapv_inplace(|v| v * s);
            }
        }
        Ok(out)
    }
}

/// Two-particle optical tomogram `w(X₁, X₂, θ₁, θ₂)`, stored with shape `[X₁, X₂, θ₁, θ₂]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalTomogram2 {
    x1_axis: AxisGrid,
    x2_axis: AxisGrid,
    theta1_axis: AxisGrid,
    theta2_axis: AxisGrid,
    values: Array4<f64>,
}

impl OpticalTomogram2 {
    pub fn new(
        x1_axis: AxisGrid,
        x2_axis: AxisGrid,
        theta1_axis: AxisGrid,
        theta2_axis: AxisGrid,
        values: Array4<f64>,
    ) -> Result<Self> {
        x1_axis.require_kind(AxisKind::Position)?;
        x2_axis.require_kind(AxisKind::Position)?;
        theta1_axis.require_kind(AxisKind::Angle)?;
        theta2_axis.require_kind(AxisKind::Angle)?;
        let want = (x1_axis.len(), x2_axis.len(), theta1_axis.len(), theta2_axis.len());
        if values.dim() != want {
            return Err(Error::Shape(format!("values {:?} vs axes {:?}", values.dim(), want)));
        }
        require_finite(values.iter(), "tomogram")?;
        Ok(OpticalTomogram2 { x1_axis, x2_axis, theta1_axis, theta2_axis, values })
    }

    pub fn x1_axis(&self) -> &AxisGrid {
        &self.x1_axis
    }

    pub fn x2_axis(&self) -> &AxisGrid {
        &self.x2_axis
    }

    pub fn theta1_axis(&self) -> &AxisGrid {
        &self.theta1_axis
    }

    pub fn theta2_axis(&self) -> &AxisGrid {
        &self.theta2_axis
    }

    pub fn values(&self) -> &Array4<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array4<f64> {
        self.values
    }

    /// Double integrals over `(X₁, X₂)`, shape `[θ₁, θ₂]`.
    pub fn angle_integrals(&self) -> Array2<f64> {
        let (n1, n2, m1, m2) = self.values.dim();
        let h = self.x1_axis.step() * self.x2_axis.step();
        let mut out = Array2::zeros((m1, m2));
        for a in 0..n1 {
            let wa = trapezoid_weight(a, n1);
            for b in 0..n2 {
                let wab = wa * trapezoid_weight(b, n2) * h;
                let slice = self.values.slice(ndarray::s![a, b, .., ..]);
                out.scaled_add(wab, &slice);
            }
        }
        out
    }

    pub fn sign_floor(&self) -> f64 {
        min_max(self.values.iter()).0
    }

    pub fn max_value(&self) -> f64 {
        min_max(self.values.iter()).1
    }

    /// Grid minimum per angle pair, shape `[θ₁, θ₂]`.
    pub fn angle_minima(&self) -> Array2<f64> {
        let (_, _, m1, m2) = self.values.dim();
        Array2::from_shape_fn((m1, m2), |(j, k)| {
            min_max(self.values.slice(ndarray::s![.., .., j, k]).iter()).0
        })
    }

    pub fn check(&self, tol: &Tolerances) -> InvariantReport {
        let mut r = InvariantReport::default();
        let dev = self.angle_integrals().iter().fold(0.0f64, |m, i| m.max((i - 1.0).abs()));
        r.push("normalization", dev, tol.norm, dev <= tol.norm);
        let (lo, hi) = min_max(self.values.iter());
        let eps = tol.grid_rel * hi.abs();
        r.push("sign_floor", lo, -eps, lo >= -eps);
        r
    }

    pub fn validate(self, tol: &Tolerances) -> Result<Self> {
        self.check(tol).into_result(self)
    }
}

impl Normalize for OpticalTomogram2 {
    fn normalize(&self) -> Result<Self> {
        let integrals = self.angle_integrals();
        let (_, m2) = integrals.dim();
        let mut out = self.clone();
        for ((j, k), &integral) in integrals.indexed_iter() {
            if let Some(s) = rescale_factor(j * m2 + k, integral)? {
                out.values.slice_mut(ndarray::s![.., .., j, k]).mapv_inplace(|v| v * s);
            }
        }
        Ok(out)
    }
}

/// Which particle of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    First,
    Second,
}

impl Which {
    pub fn other(self) -> Which {
        match self {
            Which::First => Which::Second,
            Which::Second => Which::First,
        }
    }
}

/// Single-particle tomogram obtained by integrating out the other particle.
pub fn marginal(w2: &OpticalTomogram2, which: Which) -> Result<OpticalTomogram1> {
    marginal_with_tolerance(w2, which, Tolerances::DEFAULT.marginal)
}

/// [`marginal`] with an explicit bound on the dependence on the dropped angle.
pub fn marginal_with_tolerance(
    w2: &OpticalTomogram2,
    which: Which,
    tol_marg: f64,
) -> Result<OpticalTomogram1> {
    let v = &w2.values;
    let (n1, n2, m1, m2) = v.dim();
    // r[i, j, k]: kept X, kept θ, dropped θ
    let (x_axis, theta_axis, r) = match which {
        Which::First => {
            let h = w2.x2_axis.step();
            let r = ndarray::Array3::from_shape_fn((n1, m1, m2), |(i, j, k)| {
                trapezoid((0..n2).map(|b| v[[i, b, j, k]]), h)
            });
            (w2.x1_axis.clone(), w2.theta1_axis.clone(), r)
        }
        Which::Second => {
            let h = w2.x1_axis.step();
            let r = ndarray::Array3::from_shape_fn((n2, m2, m1), |(i, k, j)| {
                trapezoid((0..n1).map(|a| v[[a, i, j, k]]), h)
            });
            (w2.x2_axis.clone(), w2.theta2_axis.clone(), r)
        }
    };
    let (nx, nt, nd) = r.dim();
    let mut deviation = 0.0f64;
    let mut mean = Array2::zeros((nx, nt));
    for i in 0..nx {
        for j in 0..nt {
            let lane = r.slice(ndarray::s![i, j, ..]);
            let (lo, hi) = min_max(lane.iter());
            deviation = deviation.max(hi - lo);
            mean[[i, j]] = lane.sum() / nd as f64;
        }
    }
    if !(deviation <= tol_marg) {
        return Err(Error::MarginalAngleDependence { deviation, tolerance: tol_marg });
    }
    OpticalTomogram1::new(x_axis, theta_axis, mean)?.normalize()
}

/// Phase-space density `f(q, p)` or `f(q₁, p₁, q₂, p₂)`; negative values allowed (Wigner functions).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceDensity {
    q_axes: Vec<AxisGrid>,
    p_axes: Vec<AxisGrid>,
    values: ArrayD<f64>,
}

impl PhaseSpaceDensity {
    /// Values are laid out as `[q, p]` or `[q₁, p₁, q₂, p₂]`.
    pub fn new(q_axes: Vec<AxisGrid>, p_axes: Vec<AxisGrid>, values: ArrayD<f64>) -> Result<Self> {
        if q_axes.len() != p_axes.len() || q_axes.is_empty() || q_axes.len() > 2 {
            return Err(Error::Shape("one or two (q, p) axis pairs expected".into()));
        }
        let mut shape = Vec::new();
        for (q, p) in q_axes.iter().zip(&p_axes) {
            q.require_kind(AxisKind::PhaseQ)?;
            p.require_kind(AxisKind::PhaseP)?;
            shape.push(q.len());
            shape.push(p.len());
        }
        if values.shape() != shape.as_slice() {
            return Err(Error::Shape(format!("values {:?} vs axes {:?}", values.shape(), shape)));
        }
        require_finite(values.iter(), "phase-space density")?;
        Ok(PhaseSpaceDensity { q_axes, p_axes, values })
    }

    pub fn single(q_axis: AxisGrid, p_axis: AxisGrid, values: Array2<f64>) -> Result<Self> {
        PhaseSpaceDensity::new(vec![q_axis], vec![p_axis], values.into_dyn())
    }

    pub fn from_fn(
        q_axis: AxisGrid,
        p_axis: AxisGrid,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let values = Array2::from_shape_fn((q_axis.len(), p_axis.len()), |(i, j)| {
            f(q_axis.point(i), p_axis.point(j))
        });
        PhaseSpaceDensity::single(q_axis, p_axis, values)
    }

    pub fn particles(&self) -> usize {
        self.q_axes.len()
    }

    pub fn q_axes(&self) -> &[AxisGrid] {
        &self.q_axes
    }

    pub fn p_axes(&self) -> &[AxisGrid] {
        &self.p_axes
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    /// Two-dimensional view for single-particle densities.
    pub fn values2(&self) -> Result<ndarray::ArrayView2<'_, f64>> {
        self.values
            .view()
            .into_dimensionality()
            .map_err(|_| Error::Shape("single-particle density expected".into()))
    }

    pub fn into_values(self) -> ArrayD<f64> {
        self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.q_axes.iter().zip(&self.p_axes).map(|(q, p)| q.step() * p.step()).product()
    }

    /// Trapezoid integral over all axes.
    pub fn integral(&self) -> f64 {
        let shape = self.values.shape().to_vec();
        let mut sum = 0.0;
        for (idx, &v) in self.values.indexed_iter() {
            let w: f64 =
                (0..shape.len()).map(|d| trapezoid_weight(idx[d], shape[d])).product();
            sum += w * v;
        }
        sum * self.cell_volume()
    }

    /// Most negative grid value.
    pub fn sign_floor(&self) -> f64 {
        min_max(self.values.iter()).0
    }

    pub fn max_value(&self) -> f64 {
        min_max(self.values.iter()).1
    }

    /// Nonnegative within `rel · max f`.
    pub fn is_classical_admissible(&self, rel: f64) -> bool {
        self.sign_floor() >= -rel * self.max_value().abs()
    }

    pub fn check(&self, tol: &Tolerances) -> InvariantReport {
        let mut r = InvariantReport::default();
        let dev = (self.integral() - 1.0).abs();
        r.push("normalization", dev, tol.norm, dev <= tol.norm);
        let eps = tol.classical_rel * self.max_value().abs();
        let floor = self.sign_floor();
        r.push("classical_sign_floor", floor, -eps, floor >= -eps);
        r
    }

    pub fn normalize(&self) -> Result<Self> {
        let integral = self.integral();
        let mut out = self.clone();
        if let Some(s) = rescale_factor(0, integral)? {
            out.values.mapv_inplace(|v| v * s);
        }
        Ok(out)
    }

    /// Value at a multi-index; convenience for tests and tools.
    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[IxDyn(idx)]
    }
}

/// Density matrix `ρ(x, x′)` on one mode or on the product basis of two modes.
///
/// `eigenvalues` are those of the discretized operator `Δx·ρ`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    x_axes: Vec<AxisGrid>,
    values: Array2<Complex64>,
    eigenvalues: Vec<f64>,
}

const HERMITIAN_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Wraps a Hermitian matrix and diagonalizes it.
    pub fn new(x_axes: Vec<AxisGrid>, values: Array2<Complex64>) -> Result<Self> {
        if x_axes.is_empty() {
            return Err(Error::Shape("at least one axis expected".into()));
        }
        for a in &x_axes {
            a.require_kind(AxisKind::MatrixX)?;
        }
        let n: usize = x_axes.iter().map(|a| a.len()).product();
        if values.dim() != (n, n) {
            return Err(Error::Shape(format!("matrix {:?} vs basis size {n}", values.dim())));
        }
        if !values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Invariant("density matrix contains non-finite values".into()));
        }
        let defect = hermiticity_defect(&values);
        if defect > HERMITIAN_TOL {
            return Err(Error::Invariant(format!("hermiticity defect {defect:e}")));
        }
        let cell: f64 = x_axes.iter().map(|a| a.step()).product();
        let m = DMatrix::from_fn(n, n, |i, j| values[[i, j]] * cell);
        let mut eigenvalues: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        Ok(DensityMatrix { x_axes, values, eigenvalues })
    }

    /// Replaces the matrix by its Hermitian part `(ρ + ρ†)/2` before wrapping.
    pub fn from_kernel(x_axes: Vec<AxisGrid>, mut values: Array2<Complex64>) -> Result<Self> {
        hermitize(&mut values);
        DensityMatrix::new(x_axes, values)
    }

    /// Pure state `ψ(x)ψ*(x′)`.
    pub fn pure(x_axis: AxisGrid, psi: &[Complex64]) -> Result<Self> {
        if psi.len() != x_axis.len() {
            return Err(Error::Shape("wavefunction length differs from axis".into()));
        }
        let values = Array2::from_shape_fn((psi.len(), psi.len()), |(i, j)| psi[i] * psi[j].conj());
        DensityMatrix::from_kernel(vec![x_axis], values)
    }

    pub fn x_axes(&self) -> &[AxisGrid] {
        &self.x_axes
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    pub fn cell(&self) -> f64 {
        self.x_axes.iter().map(|a| a.step()).product()
    }

    pub fn trace(&self) -> f64 {
        self.values.diag().iter().map(|z| z.re).sum::<f64>() * self.cell()
    }

    pub fn purity(&self) -> f64 {
        let c = self.cell();
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * c * c
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Smallest eigenvalue of `Δx·ρ`.
    pub fn eigen_floor(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn eigen_max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty")
    }

    /// Positive semidefinite within `rel · λ_max`.
    pub fn is_quantum_admissible(&self, rel: f64) -> bool {
        self.eigen_floor() >= -rel * self.eigen_max().abs()
    }

    pub fn normalize_trace(&self) -> Result<Self> {
        let t = self.trace();
        let Some(s) = rescale_factor(0, t)? else { return Ok(self.clone()) };
        Ok(DensityMatrix {
            x_axes: self.x_axes.clone(),
            values: self.values.mapv(|z| z * s),
            eigenvalues: self.eigenvalues.iter().map(|e| e * s).collect(),
        })
    }

    pub fn check(&self, tol: &Tolerances) -> InvariantReport {
        let mut r = InvariantReport::default();
        let h = hermiticity_defect(&self.values);
        r.push("hermiticity", h, HERMITIAN_TOL, h <= HERMITIAN_TOL);
        let dev = (self.trace() - 1.0).abs();
        r.push("trace", dev, tol.norm, dev <= tol.norm);
        let eps = tol.quantum_rel * self.eigen_max().abs();
        r.push("eigen_floor", self.eigen_floor(), -eps, self.eigen_floor() >= -eps);
        r
    }

    /// Diagonal `ρ(x, x)` as a real vector.
    pub fn diagonal(&self) -> Vec<f64> {
        self.values.diag().iter().map(|z| z.re).collect()
    }
}

pub fn hermiticity_defect(values: &Array2<Complex64>) -> f64 {
    let n = values.nrows();
    let mut d = 0.0f64;
    for i in 0..n {
        for j in i..n {
            d = d.max((values[[i, j]] - values[[j, i]].conj()).norm());
        }
    }
    d
}

pub fn hermitize(values: &mut Array2<Complex64>) {
    let n = values.nrows();
    for i in 0..n {
        values[[i, i]].im = 0.0;
        for j in i + 1..n {
            let a = 0.5 * (values[[i, j]] + values[[j, i]].conj());
            values[[i, j]] = a;
            values[[j, i]] = a.conj();
        }
    }
}
