//! Separated representation `w(X₁, X₂, θ₁, θ₂) = Σ_r a_r(X₁, θ₁) b_r(X₂, θ₂)`.
//!
//! The two particles' generators act on disjoint variables, so each factor
//! can be evolved on its own and the joint state reassembled on demand.

use ndarray::{Array2, Array4, Axis};
use tomo_core::{trapezoid, AxisGrid, OpticalTomogram2, Result};

/// Residual column norm, relative to the largest column, below which the expansion stops.
pub const RANK_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Separated {
    pub first: Vec<Array2<f64>>,
    pub second: Vec<Array2<f64>>,
}

impl Separated {
    /// Pivoted Gram–Schmidt on the matrix with rows `(X₁, θ₁)` and columns `(X₂, θ₂)`.
    pub fn factorize(w: &OpticalTomogram2) -> Self {
        let (n1, n2, m1, m2) = w.values().dim();
        let rows = n1 * m1;
        let cols = n2 * m2;
        let v = w.values();
        let mut r = Array2::from_shape_fn((rows, cols), |(a, b)| v[[a / m1, b / m2, a % m1, b % m2]]);
        let col_norms = |r: &Array2<f64>| -> Vec<f64> {
            r.axis_iter(Axis(1)).map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect()
        };
        let mut norms = col_norms(&r);
        let scale = norms.iter().copied().fold(0.0, f64::max);
        let (mut first, mut second) = (Vec::new(), Vec::new());
        while first.len() < rows.min(cols) {
            let (pivot, &norm) = norms
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty");
            if norm <= RANK_TOL * scale || norm == 0.0 {
                break;
            }
            let q = r.column(pivot).mapv(|x| x / norm);
            let b = q.dot(&r);
            for (mut col, &bc) in r.axis_iter_mut(Axis(1)).zip(&b) {
                col.scaled_add(-bc, &q);
            }
            norms = col_norms(&r);
            first.push(q.into_shape_with_order((n1, m1)).expect("row layout"));
            second.push(b.into_shape_with_order((n2, m2)).expect("column layout"));
        }
        Separated { first, second }
    }

    pub fn rank(&self) -> usize {
        self.first.len()
    }

    /// Per-angle-pair integrals `Σ_r (∫a_r dX₁)(θ₁)·(∫b_r dX₂)(θ₂)`.
    pub fn angle_integrals(&self, x1: &AxisGrid, x2: &AxisGrid) -> Array2<f64> {
        let ints = |f: &Array2<f64>, step: f64| -> Vec<f64> {
            f.columns().into_iter().map(|c| trapezoid(c.iter().copied(), step)).collect()
        };
        let (m1, m2) = match (self.first.first(), self.second.first()) {
            (Some(a), Some(b)) => (a.ncols(), b.ncols()),
            _ => return Array2::zeros((0, 0)),
        };
        let mut out = Array2::zeros((m1, m2));
        for (a, b) in self.first.iter().zip(&self.second) {
            let (ia, ib) = (ints(a, x1.step()), ints(b, x2.step()));
            for j in 0..m1 {
                for l in 0..m2 {
                    out[[j, l]] += ia[j] * ib[l];
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.first.iter().chain(&self.second).all(|f| f.iter().all(|v| v.is_finite()))
    }

    pub fn assemble(&self, like: &OpticalTomogram2) -> Result<OpticalTomogram2> {
        let mut out = Array4::zeros(like.values().dim());
        for (a, b) in self.first.iter().zip(&self.second) {
            for ((i, j), &av) in a.indexed_iter() {
                if av == 0.0 {
                    continue;
                }
                for ((k, l), &bv) in b.indexed_iter() {
                    out[[i, k, j, l]] += av * bv;
                }
            }
        }
        OpticalTomogram2::new(
            like.x1_axis().clone(),
            like.x2_axis().clone(),
            like.theta1_axis().clone(),
            like.theta2_axis().clone(),
            out,
        )
    }
}
