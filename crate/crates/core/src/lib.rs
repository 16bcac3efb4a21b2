//! Exact computations for generalized pairs on complete toric surfaces:
//! fans, divisors, log discrepancies, decompositions and their complexity,
//! and the toric minimal model program.

pub mod complexity;
pub mod divisor;
pub mod error;
pub mod fan;
pub mod genpair;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod lp;
pub mod mmp;
pub mod verify;

pub use error::{Error, Result};
