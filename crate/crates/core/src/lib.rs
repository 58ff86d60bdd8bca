//! Numerical laboratory for the index of summability of multilinear maps
//! and homogeneous polynomials between finite-dimensional normed spaces.

pub mod budget;
pub mod error;
pub mod index_lab;
pub mod maps;
pub mod oracles;
pub mod sampling;
pub mod spaces;
pub mod weak_norms;
pub mod witnesses;

pub use budget::{SearchBudget, DEFAULT_TUPLE_BUDGET};
pub use error::{Error, Result};
