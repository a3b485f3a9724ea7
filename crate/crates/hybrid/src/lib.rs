//! Hybrid two-particle tomograms: products, convex sums, the entangled form,
//! position covariance and the two-outcome toy bound.

mod compose;
mod covariance;
mod toy;

pub use compose::{
    compose_entangled, compose_mixture, compose_product, Branch, EntangledTomogram, HybridSpec,
    WEIGHT_TOL,
};
pub use covariance::{
    branch_covariance, column_at, covariance, mean_at, slice_at, two_branch_covariance,
    Covariance,
};
pub use toy::{toy_entanglement_bounds, ToyBounds, ToyDistribution, TOY_EPS};
