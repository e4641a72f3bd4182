//! Numerical tools for redistributing a quantum register between two parties.
//!
//! The crate is organised bottom up:
//!
//! * [`linalg`]: dense complex matrices, Hermitian eigensolver, SVD, spectral functions.
//! * [`states`]: density operators and pure vectors with labelled registers.
//! * [`entropies`]: one-shot entropic quantities with optimizer certificates.
//! * [`protocol`]: the convex-split / position-based-decoding redistribution protocol.
//! * [`verify`]: checkers for the operator inequalities the protocol rests on.
//! * [`cli`]: state files, reports and the `qsrlab` command grammar.

pub mod cli;
pub mod entropies;
pub mod error;
pub mod linalg;
mod numfmt;
pub mod protocol;
pub mod random;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
