//! Quasi-regression Monte-Carlo solver for decoupled Markovian BSDEs.
//!
//! The solution `y_i(x) = u(t_i, x)` of a semi-linear parabolic PDE is
//! approximated backward in time by projecting it onto a Student-cosine
//! orthonormal basis. Projection coefficients are plain Monte-Carlo averages
//! over independently simulated path clouds; no linear system is solved.

pub mod basis;
pub mod bench;
pub mod dist;
pub mod engine;
pub mod error;
pub mod mindex;
mod quad;
pub mod rng;
pub mod solver;
pub mod table;

pub use error::{Error, Result};
pub use solver::{backward_solve, evaluate_solution, MemoryMode, RunConfig};
pub use table::CoefficientTable;
