// NaN must fail validation, so `!(x > 0.0)` is used deliberately.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod continuation;
pub mod error;
pub mod expr;
pub mod io;
pub mod operator;
pub mod problem;
pub mod pv;
pub mod solver;
pub mod spectral;
pub mod truncation;

pub use error::{Error, Result};
pub use problem::{Family, ProblemKind, ProblemSpec, ScalarFn};
pub use solver::{NewtonOptions, Solution};
pub use spectral::{PeriodicGrid, SpectralField};
