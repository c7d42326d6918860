//! Pseudospectral laboratory for the mass-critical nonlinear Schrödinger
//! equation `i u_t + Δu = μ|u|^{4/d} u` on periodic boxes in one to three
//! dimensions.

pub mod cli;
pub mod convergence;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod field;
pub mod ground_state;
pub mod io;
pub mod morawetz;
pub mod symmetry;

pub use error::{Error, Result};
pub use field::{ComplexField, Grid, C64};
