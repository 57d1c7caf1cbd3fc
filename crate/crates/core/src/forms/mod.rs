//! Bilinear forms of the discrete scheme and the stabilisation parameters.

mod coefficients;
mod local;
mod params;
mod patch;

pub use coefficients::{jacobian, ConstantField, FnField, OseenCoefficients, VectorField};
pub use local::{
    b_norm_block, consistent_viscous_block, convection_block, convection_face_defect_block,
    h1_block, normal_jump_block, pressure_coupling, stabilisation_block, stabilisation_residuals,
    viscous_block,
};
pub use params::{
    build_params, build_params_with, gamma, PatchParams, StabilisationConstants,
    StabilisationParams,
};
pub use patch::PatchForms;
