//! Maps between optical tomograms, phase-space densities, Wigner functions,
//! wavefunctions and density matrices, and the admissibility tests built on them.

pub mod backproject;
pub mod classify;
pub mod density;
pub mod filter;
pub mod inverse;
pub mod radon;
pub mod spectral;
pub mod wavefunction;

pub use classify::{
    classify, classify2, classify_with, Admissibility, Classification2, ClassifyOptions,
    Diagnostics,
};
pub use density::{
    density_operator_matrix, partial_trace, reconstruct_density_matrix,
    reconstruct_density_matrix2, reconstruct_density_matrix_with, BridgeSpec, MATCHED_PHASE,
};
pub use filter::{Apodization, RampFilterSpec};
pub use inverse::{
    back_projection_matrix, reconstruct_phase_space, reconstruct_phase_space2,
    reconstruct_phase_space_on, reconstruct_wigner, WignerFunction,
};
pub use radon::{project_angle, radon_forward, radon_forward2};
pub use wavefunction::{tomogram_from_density_matrix, tomogram_from_wavefunction};
