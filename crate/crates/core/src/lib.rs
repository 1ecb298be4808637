//! Single-excitation spectrum and eigenvectors of a qubit chain with
//! nearest-neighbour coupling `a` and next-nearest-neighbour coupling `b`.
//!
//! The Hamiltonian block is the pentadiagonal Toeplitz matrix with diagonal
//! `ω₀`. Its characteristic polynomial is evaluated by a five-term minor
//! recurrence, by dense elimination, by an explicit root expansion and by a
//! closed form in Chebyshev polynomials of the second kind.

pub mod chebyshev;
pub mod cli;
pub mod determinant;
pub mod dipole;
pub mod eigvec;
pub mod error;
pub mod model;
pub mod roots;
pub mod spectrum;

#[cfg(test)]
mod invariants;

pub use error::{ChainError, Result};
pub use model::{build_hamiltonian, trace_moments, ChainParams, SymmetricBandMatrix};
