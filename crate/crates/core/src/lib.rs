//! Randomized Kaczmarz and two-subspace randomized Kaczmarz solvers for
//! overdetermined linear systems, with exact evaluation of the quantities
//! their convergence bounds depend on and a seeded experiment harness.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod matrix;
pub mod solvers;
pub mod tol;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, StandardizedSystem};
pub use solvers::{Method, SolveOptions, SolveTrace};
