//! Exact diagonalization and chaos diagnostics for interacting bosons on a chain,
//! with the two-body embedded random-matrix ensemble and GOE baselines for
//! comparison.

mod assemble;
pub mod baselines;
pub mod bhh;
pub mod chaos;
pub mod compare;
pub mod egoe;
pub mod error;
pub mod fock;
pub mod matrix;
pub mod quad;
pub mod special;
pub mod spectra;

pub use error::{Error, Result};
