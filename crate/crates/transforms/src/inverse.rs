//! Filtered back-projection from tomograms to phase-space densities.

use ndarray::{Array2, Array4};
use tomo_core::{
    AxisGrid, AxisKind, Error, OpticalTomogram1, OpticalTomogram2, PhaseSpaceDensity, Result,
};

use crate::backproject::{FilteredProjections, ImpulseResponse};
use crate::filter::RampFilterSpec;

/// Largest tolerated relative normalization error of a reconstruction.
pub const FILTER_NORM_TOL: f64 = 1e-3;

/// Wigner function `W(q, p)`; same numbers as the back-projection of a quantum tomogram.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerFunction {
    pub q_axis: AxisGrid,
    pub p_axis: AxisGrid,
    pub values: Array2<f64>,
}

impl WignerFunction {
    pub fn from_density(f: &PhaseSpaceDensity) -> Result<Self> {
        Ok(WignerFunction {
            q_axis: f.q_axes()[0].clone(),
            p_axis: f.p_axes()[0].clone(),
            values: f.values2()?.to_owned(),
        })
    }

    pub fn into_density(self) -> Result<PhaseSpaceDensity> {
        PhaseSpaceDensity::single(self.q_axis, self.p_axis, self.values)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Value at the grid point nearest to `(q, p)`.
    pub fn nearest(&self, q: f64, p: f64) -> f64 {
        self.values[[self.q_axis.locate(q).0, self.p_axis.locate(p).0]]
    }
}

/// Phase-space axes with the layout of the tomogram's X axis.
pub fn default_phase_axes(x_axis: &AxisGrid) -> Result<(AxisGrid, AxisGrid)> {
    Ok((x_axis.with_kind(AxisKind::PhaseQ)?, x_axis.with_kind(AxisKind::PhaseP)?))
}

fn check_norm(f: PhaseSpaceDensity) -> Result<PhaseSpaceDensity> {
    let error = (f.integral() - 1.0).abs();
    if !(error <= FILTER_NORM_TOL) {
        return Err(Error::FilterInstability { error });
    }
    Ok(f)
}

/// Back-projection onto phase axes with the tomogram's X layout.
pub fn reconstruct_phase_space(
    w: &OpticalTomogram1,
    filter: &RampFilterSpec,
) -> Result<PhaseSpaceDensity> {
    let (q, p) = default_phase_axes(w.x_axis())?;
    reconstruct_phase_space_on(w, filter, &q, &p)
}

/// Back-projection onto explicit phase axes.
pub fn reconstruct_phase_space_on(
    w: &OpticalTomogram1,
    filter: &RampFilterSpec,
    q_axis: &AxisGrid,
    p_axis: &AxisGrid,
) -> Result<PhaseSpaceDensity> {
    filter.validate()?;
    q_axis.require_kind(AxisKind::PhaseQ)?;
    p_axis.require_kind(AxisKind::PhaseP)?;
    let proj = FilteredProjections::new(w.values().view(), w.x_axis(), w.theta_axis(), filter);
    let values = Array2::from_shape_fn((q_axis.len(), p_axis.len()), |(a, b)| {
        proj.eval(q_axis.point(a), p_axis.point(b))
    });
    check_norm(PhaseSpaceDensity::single(q_axis.clone(), p_axis.clone(), values)?)
}

/// Wigner function of a quantum tomogram on the tomogram's own X layout.
pub fn reconstruct_wigner(w: &OpticalTomogram1, filter: &RampFilterSpec) -> Result<WignerFunction> {
    WignerFunction::from_density(&reconstruct_phase_space(w, filter)?)
}

/// Matrix of the back-projection as a linear map from a flattened `(X, θ)`
/// tomogram to a flattened `(q, p)` density.
pub fn back_projection_matrix(
    x_axis: &AxisGrid,
    theta_axis: &AxisGrid,
    filter: &RampFilterSpec,
    q_axis: &AxisGrid,
    p_axis: &AxisGrid,
) -> Array2<f64> {
    let imp = ImpulseResponse::new(x_axis, theta_axis, filter);
    let (nx, nt) = (x_axis.len(), theta_axis.len());
    let (nq, np) = (q_axis.len(), p_axis.len());
    let mut k = Array2::zeros((nq * np, nx * nt));
    for a in 0..nq {
        for b in 0..np {
            let (q, p) = (q_axis.point(a), p_axis.point(b));
            let mut row = k.row_mut(a * np + b);
            for i in 0..nx {
                for j in 0..nt {
                    row[i * nt + j] = imp.eval(i, j, q, p);
                }
            }
        }
    }
    k
}

/// Reshapes `w(X₁, X₂, θ₁, θ₂)` into a matrix with rows `(X₁, θ₁)` and columns `(X₂, θ₂)`.
pub fn pair_matrix(w: &OpticalTomogram2) -> Array2<f64> {
    let (n1, n2, m1, m2) = w.values().dim();
    let v = w.values();
    Array2::from_shape_fn((n1 * m1, n2 * m2), |(r, c)| v[[r / m1, c / m2, r % m1, c % m2]])
}

/// Joint phase-space density of a two-particle tomogram.
pub fn reconstruct_phase_space2(
    w: &OpticalTomogram2,
    filter: &RampFilterSpec,
    q_axes: [&AxisGrid; 2],
    p_axes: [&AxisGrid; 2],
) -> Result<PhaseSpaceDensity> {
    filter.validate()?;
    let k1 = back_projection_matrix(w.x1_axis(), w.theta1_axis(), filter, q_axes[0], p_axes[0]);
    let k2 = back_projection_matrix(w.x2_axis(), w.theta2_axis(), filter, q_axes[1], p_axes[1]);
    let joint = k1.dot(&pair_matrix(w)).dot(&k2.t());
    let shape = (q_axes[0].len(), p_axes[0].len(), q_axes[1].len(), p_axes[1].len());
    let values: Array4<f64> =
        joint.into_shape_with_order(shape).map_err(|e| Error::Shape(e.to_string()))?;
    let f = PhaseSpaceDensity::new(
        vec![q_axes[0].clone(), q_axes[1].clone()],
        vec![p_axes[0].clone(), p_axes[1].clone()],
        values.into_dyn(),
    )?;
    check_norm(f)
}
