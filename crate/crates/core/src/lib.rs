//! Ground-state correlations of the periodic anisotropic XY chain through
//! its free-fermion solution, the entanglement monotones and noise
//! correlations built from them, and a dense exact-diagonalization oracle.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod config;
pub mod ed;
pub mod engine;
pub mod entanglement;
pub mod error;
pub mod export;
pub mod model;
pub mod noise;
pub mod pauli;
pub mod pfaffian;
pub mod scaling;

pub use error::{Error, Result};
pub use model::{majorana_covariance, MajoranaCovariance, ModelParams, Sector};
pub use pauli::{Axis, PauliString};
