//! Open-system simulation and robust pulse design for Mølmer–Sørensen
//! two-qubit gates on a linear chain of trapped ions.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantum`]: composite qubit ⊗ Fock spaces, operators, density matrices.
//! - [`trap`]: chain model, Lamb-Dicke couplings, pulses and the
//!   interaction-picture drive Hamiltonian.
//! - [`lindblad`]: jump operators, the adaptive master-equation integrator
//!   and gate observables.
//! - [`sota`]: the linear-theory phase-space-closure pulse designer.
//! - [`optimize`]: differential evolution and the robust feasibility search.
//! - [`spectral`]: pulse and trajectory spectra, robustness scans, noise budgets.
//! - [`config`]: the on-disk configuration schema and scenario presets.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod lindblad;
pub mod optimize;
pub mod quantum;
pub mod sota;
pub mod spectral;
pub mod trap;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = ndarray::Array2<C64>;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

/// `2π`, for Hz ↔ rad/s conversions.
pub const TWO_PI: f64 = std::f64::consts::TAU;
