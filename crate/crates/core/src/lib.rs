//! Restarted primal-dual hybrid gradient solver for linear programs.
//!
//! Problems are stated as
//!
//! ```text
//! min  c'x   s.t.  Gx >= h,  Ax = b,  l <= x <= u
//! ```
//!
//! and can be built in memory ([`LpProblem`]) or read from MPS files
//! ([`mps`]). [`solve`] runs the full pipeline with a [`SolverConfig`].

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fishnet;
pub mod generate;
pub mod infeasibility;
pub mod instance;
pub mod kkt;
pub mod linalg;
pub mod model;
pub mod mps;
pub mod pdhg;
pub mod restart;
pub mod scaling;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use instance::PreparedLp;
pub use model::{BoundClass, LpProblem};
pub use solver::{solve, SolveResult, SolveStatus, Solver, SolverConfig};
pub use sparse::SparseMatrix;
