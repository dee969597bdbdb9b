//! Numerical library for monogamy-of-entanglement computations at exactly
//! verifiable scales: k-extendibility tests via alternating projections,
//! explicit separable rounding with information-theoretic error guarantees,
//! multipartite separability testing, classical and non-signaling game
//! values with extendible LP relaxations, support-function bounds over
//! separable states, and tomography from permutation-symmetric inputs.
//!
//! Everything is dense and double precision, aimed at subsystem dimensions
//! up to ~6 and total dimensions up to a few thousand, where the bounds the
//! library reports can be checked against brute-force oracles.

pub mod error;
pub mod linalg;
pub mod qstate;
pub mod random;

pub mod infotheory;
pub mod solver;
pub mod extendibility;
pub mod games;
pub mod tomography;

pub mod io;
pub mod cli;

pub use error::{Error, Result};
