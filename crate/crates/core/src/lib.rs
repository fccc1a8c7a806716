//! Spin coupled to a quantized nanomechanical resonator (NAMR) through a
//! magnetic tip.
//!
//! The crate derives the spin-boson parameters from a physical setup,
//! evaluates the closed-form squeezing and collapse-revival predictions of the
//! large-detuning branch Hamiltonians, evolves the truncated Fock ⊗ spin system
//! exactly as an oracle for those predictions, integrates the damped moment
//! equations and simulates JC / anti-JC switching for single-spin detection.
//!
//! Internally ħ = 1: every Hamiltonian is expressed in angular-frequency units.

// `!(x > 0.0)` is used deliberately so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod damping;
pub mod error;
pub mod evolve;
pub mod hamiltonian;
pub mod hilbert;
pub mod model;
pub mod protocol;
pub mod squeezing;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
