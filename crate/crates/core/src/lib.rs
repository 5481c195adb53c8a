//! Validated integration of ordinary differential equations over interval
//! arithmetic, with Poincaré maps and the verification rules used in
//! computer-assisted proofs.

pub mod error;
pub mod interval;
pub mod field;
pub mod linalg;
pub mod sets;
pub mod solver;
pub mod poincare;
pub mod nonrigorous;
pub mod verify;
pub mod cases;

pub use error::{Error, Result};
pub use interval::Interval;
pub use linalg::{IMat, IVec};
