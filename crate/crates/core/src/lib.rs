//! Quantum-Langevin-equation engine for coherent light driving a 1D chain of
//! two-level atoms coupled to left and right photon baths.
//!
//! The state is the vector of expectation values of all `4^N - 1` non-identity
//! products of `{I, σ†, σ, σ†σ}`. Its equation of motion is linear,
//! `dS/dt = Z S + Ω`, and the crate builds `Z`, solves it, and maps solutions
//! to transmission and reflection coefficients.

pub mod dynamics;
pub mod error;
pub mod generator;
pub mod longrange_fit;
pub mod observables;
pub mod scattering;
pub mod spin_ops;

pub use error::{QleError, Result};
