//! Numerical laboratory for the Maxwell-Dirac system reduced to one space
//! dimension, for spinor dimensions `d = 1, 2, 3`.

pub mod cone_solver;
pub mod dirac_algebra;
pub mod error;
pub mod estimates;
pub mod experiments;
pub mod initial_data;
pub mod quadrature;

pub use error::{Error, Result};
