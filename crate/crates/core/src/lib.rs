//! Local-projection-stabilised hybrid high-order discretisation of the Oseen
//! problem on polygonal meshes.

pub mod analysis;
pub mod basis;
pub mod cases;
pub mod discretization;
pub mod error;
pub mod forms;
pub mod mesh;
pub mod operators;
pub mod projection;
pub mod quadrature;
pub mod study;
pub mod system;

pub use discretization::{Discretization, DiscretizationOptions, HybridVelocity, PressureField};
pub use error::{Error, Result};
