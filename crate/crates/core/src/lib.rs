//! Exact finite-level computations around theta lifting for loop groups.

pub mod acceptance;
pub mod error;
pub mod exact_arith;
pub mod linalg;
pub mod loop_symplectic;
pub mod loop_theta;
pub mod metaplectic;
pub mod orbit;
pub mod quaternion;
pub mod sampling;
pub mod weil_phase;

pub use error::{Error, Result};
