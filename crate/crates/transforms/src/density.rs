//! Density matrices from tomograms through the Wigner function.
//!
//! `ρ(x, x′) = ∫ W((x + x′)/2, p) e^{ip(x − x′)} dp`, with `W` evaluated by
//! back-projection directly at the half-integer midpoints of the bridge axis.

use ndarray::Array2;
use num_complex::Complex64;
use tomo_core::{
    hermitize, trapezoid_weight, AxisGrid, AxisKind, DensityMatrix, Error, OpticalTomogram1,
    OpticalTomogram2, Result,
};

use crate::backproject::{FilteredProjections, ImpulseResponse};
use crate::filter::RampFilterSpec;
use crate::inverse::pair_matrix;

/// Largest tolerated trace deviation before renormalization.
pub const TRACE_TOL: f64 = 1e-2;

/// Largest `Δp·span` accepted by [`BridgeSpec::matching`] without refining the momentum axis.
pub const MATCHED_PHASE: f64 = 2.0;

/// Grids of the Wigner-to-ρ bridge.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeSpec {
    /// Matrix axis of the result.
    pub x_axis: AxisGrid,
    /// Momentum quadrature axis; `Δp · max|x − x′|` must stay below `π`.
    pub p_axis: AxisGrid,
    pub filter: RampFilterSpec,
}

impl BridgeSpec {
    /// Matrix axis with the layout of `x_axis`.
    ///
    /// The momentum axis spans the same range, refined by an integer factor
    /// whenever the tomogram step would leave `Δp·span` above [`MATCHED_PHASE`].
    pub fn matching(x_axis: &AxisGrid, filter: RampFilterSpec) -> Result<Self> {
        let span = x_axis.last() - x_axis.start();
        let refine = (x_axis.step() * span / MATCHED_PHASE).ceil().max(1.0) as usize;
        let p_axis = AxisGrid::new(
            AxisKind::PhaseP,
            x_axis.start(),
            x_axis.step() / refine as f64,
            x_axis.len() * refine,
        )?;
        Ok(BridgeSpec { x_axis: x_axis.with_kind(AxisKind::MatrixX)?, p_axis, filter })
    }

    fn validate(&self) -> Result<()> {
        self.x_axis.require_kind(AxisKind::MatrixX)?;
        self.p_axis.require_kind(AxisKind::PhaseP)?;
        self.filter.validate()?;
        let span = self.x_axis.last() - self.x_axis.start();
        if self.p_axis.step() * span >= std::f64::consts::PI {
            return Err(Error::InvalidArgument(format!(
                "momentum step {} too coarse for matrix span {span}",
                self.p_axis.step()
            )));
        }
        Ok(())
    }

    /// Midpoints `(x_i + x_j)/2`, indexed by `i + j`.
    fn midpoints(&self) -> Vec<f64> {
        let h = 0.5 * self.x_axis.step();
        (0..2 * self.x_axis.len() - 1).map(|k| self.x_axis.start() + h * k as f64).collect()
    }

    /// `Δp·w_l·e^{i p_l Δx m}` for `m = i − j`, stored at `m + n − 1`.
    fn phases(&self) -> Vec<Vec<Complex64>> {
        let n = self.x_axis.len();
        let np = self.p_axis.len();
        let dx = self.x_axis.step();
        let dp = self.p_axis.step();
        (0..2 * n - 1)
            .map(|mm| {
                let m = mm as f64 - (n - 1) as f64;
                (0..np)
                    .map(|l| {
                        let w = dp * trapezoid_weight(l, np);
                        Complex64::from_polar(w, self.p_axis.point(l) * dx * m)
                    })
                    .collect()
            })
            .collect()
    }

    /// Kernel from midpoint Wigner samples `wq[k, l]`.
    fn kernel(&self, wq: &Array2<f64>, phases: &[Vec<Complex64>], out: &mut [Complex64]) {
        let n = self.x_axis.len();
        for i in 0..n {
            for j in 0..n {
                let row = wq.row(i + j);
                let ph = &phases[i + n - 1 - j];
                let mut acc = Complex64::new(0.0, 0.0);
                for (w, e) in row.iter().zip(ph) {
                    acc += e * *w;
                }
                out[i * n + j] = acc;
            }
        }
    }
}

/// Density matrix with bridge axes matching the tomogram's X axis and the default filter.
pub fn reconstruct_density_matrix(
    w: &OpticalTomogram1,
    bridge_axis: &AxisGrid,
) -> Result<DensityMatrix> {
    let spec = BridgeSpec {
        x_axis: bridge_axis.with_kind(AxisKind::MatrixX)?,
        p_axis: w.x_axis().with_kind(AxisKind::PhaseP)?,
        filter: RampFilterSpec::default(),
    };
    reconstruct_density_matrix_with(w, &spec)
}

pub fn reconstruct_density_matrix_with(
    w: &OpticalTomogram1,
    spec: &BridgeSpec,
) -> Result<DensityMatrix> {
    spec.validate()?;
    let proj = FilteredProjections::new(w.values().view(), w.x_axis(), w.theta_axis(), &spec.filter);
    let mids = spec.midpoints();
    let np = spec.p_axis.len();
    let wq = Array2::from_shape_fn((mids.len(), np), |(k, l)| proj.eval(mids[k], spec.p_axis.point(l)));
    let n = spec.x_axis.len();
    let mut kernel = vec![Complex64::new(0.0, 0.0); n * n];
    spec.kernel(&wq, &spec.phases(), &mut kernel);
    let values = Array2::from_shape_vec((n, n), kernel).map_err(|e| Error::Shape(e.to_string()))?;
    finish(vec![spec.x_axis.clone()], values)
}

fn finish(x_axes: Vec<AxisGrid>, mut values: Array2<Complex64>) -> Result<DensityMatrix> {
    hermitize(&mut values);
    let cell: f64 = x_axes.iter().map(|a| a.step()).product();
    let trace = values.diag().iter().map(|z| z.re).sum::<f64>() * cell;
    if !((trace - 1.0).abs() <= TRACE_TOL) {
        return Err(Error::TraceCollapse { trace });
    }
    values.mapv_inplace(|z| z / trace);
    DensityMatrix::new(x_axes, values)
}

/// Linear map from a flattened `(X, θ)` tomogram to the flattened kernel `ρ(x_i, x_j)`
/// (row `i·n + j`), before symmetrization and trace normalization.
pub fn density_operator_matrix(
    x_axis: &AxisGrid,
    theta_axis: &AxisGrid,
    spec: &BridgeSpec,
) -> Result<Array2<Complex64>> {
    spec.validate()?;
    let imp = ImpulseResponse::new(x_axis, theta_axis, &spec.filter);
    let mids = spec.midpoints();
    let phases = spec.phases();
    let n = spec.x_axis.len();
    let np = spec.p_axis.len();
    let (nx, nt) = (x_axis.len(), theta_axis.len());
    let mut l = Array2::zeros((n * n, nx * nt));
    let mut wq = Array2::zeros((mids.len(), np));
    let mut col = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..nx {
        for j in 0..nt {
            for (k, &q) in mids.iter().enumerate() {
                for li in 0..np {
                    wq[[k, li]] = imp.eval(a, j, q, spec.p_axis.point(li));
                }
            }
            spec.kernel(&wq, &phases, &mut col);
            l.column_mut(a * nt + j).iter_mut().zip(&col).for_each(|(o, v)| *o = *v);
        }
    }
    Ok(l)
}

fn complex_sandwich(l1: &Array2<Complex64>, w: &Array2<f64>, l2: &Array2<Complex64>) -> Array2<Complex64> {
    let (r1, i1) = (l1.mapv(|z| z.re), l1.mapv(|z| z.im));
    let (r2, i2) = (l2.mapv(|z| z.re), l2.mapv(|z| z.im));
    let ar = r1.dot(w);
    let ai = i1.dot(w);
    let re = ar.dot(&r2.t()) - ai.dot(&i2.t());
    let im = ar.dot(&i2.t()) + ai.dot(&r2.t());
    let mut out = Array2::zeros(re.dim());
    out.zip_mut_with(&re, |o: &mut Complex64, &r| o.re = r);
    out.zip_mut_with(&im, |o: &mut Complex64, &i| o.im = i);
    out
}

/// Joint two-mode density matrix on the product basis `(x₁, x₂)`.
pub fn reconstruct_density_matrix2(
    w: &OpticalTomogram2,
    specs: [&BridgeSpec; 2],
) -> Result<DensityMatrix> {
    let l1 = density_operator_matrix(w.x1_axis(), w.theta1_axis(), specs[0])?;
    let l2 = density_operator_matrix(w.x2_axis(), w.theta2_axis(), specs[1])?;
    let raw = complex_sandwich(&l1, &pair_matrix(w), &l2);
    let (n1, n2) = (specs[0].x_axis.len(), specs[1].x_axis.len());
    // raw[(i1 j1), (i2 j2)] → ρ[(i1 i2), (j1 j2)]
    let values = Array2::from_shape_fn((n1 * n2, n1 * n2), |(r, c)| {
        let (i1, i2) = (r / n2, r % n2);
        let (j1, j2) = (c / n2, c % n2);
        raw[[i1 * n1 + j1, i2 * n2 + j2]]
    });
    finish(vec![specs[0].x_axis.clone(), specs[1].x_axis.clone()], values)
}

/// Partial trace over one mode of a two-mode density matrix.
pub fn partial_trace(rho: &DensityMatrix, keep_first: bool) -> Result<DensityMatrix> {
    let axes = rho.x_axes();
    if axes.len() != 2 {
        return Err(Error::Shape("two-mode density matrix expected".into()));
    }
    let (n1, n2) = (axes[0].len(), axes[1].len());
    let v = rho.values();
    let (keep, drop_step) = if keep_first { (0, axes[1].step()) } else { (1, axes[0].step()) };
    let values = if keep_first {
        Array2::from_shape_fn((n1, n1), |(a, b)| {
            (0..n2).map(|k| v[[a * n2 + k, b * n2 + k]]).sum::<Complex64>() * drop_step
        })
    } else {
        Array2::from_shape_fn((n2, n2), |(a, b)| {
            (0..n1).map(|k| v[[k * n2 + a, k * n2 + b]]).sum::<Complex64>() * drop_step
        })
    };
    DensityMatrix::from_kernel(vec![axes[keep].clone()], values)
}

