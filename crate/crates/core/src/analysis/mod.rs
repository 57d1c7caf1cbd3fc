//! Norms, errors, convergence rates and diagnostics.

mod errors;
mod infsup;
mod norms;

pub use errors::{compute_errors, compute_rate, fill_rates, ErrorReport};
pub use infsup::{infsup_diagnostic, norm_equivalence_ratio, poincare_ratio, InfSup, DENSE_LIMIT};
pub use norms::{
    norm_1h, norm_b, norm_b_sq, norm_eps, norm_eps_sq, norm_lp, norm_squares, norm_st, norm_st_sq,
    norm_supg, norm_supg_sq, pressure_l2_sq, supg_field, velocity_l2, NormSquares,
};
