//! Global unknowns, assembly, static condensation and the linear solve.

mod assemble;
mod condense;
mod dofs;
mod sparse;

pub use assemble::{assemble, solve, BoundaryCondition, GlobalSystem, Solution};
pub use condense::{solve_condensed, static_condensation, CondensedSystem};
pub use dofs::DofMap;
pub use sparse::{CsrMatrix, TripletBuilder};
