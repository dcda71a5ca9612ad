//! Simulation and analysis of NOON-state generation by adiabatic passage in a
//! network of three cavities joined by two optical fibers.
//!
//! All rates are measured in units of the atom–cavity coupling `g` and all
//! times in units of `1/g`.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: parameters, the ten single-excitation basis labels, state vectors
//! - [`pulses`]: Gaussian drive pulses and effective Raman couplings
//! - [`hamiltonian`]: the 10×10 interaction Hamiltonian and a Fock-space oracle
//! - [`dynamics`]: fixed-step RK4 integration of the Schrödinger equation
//! - [`spectral`]: analytic dark states, instantaneous spectra, adiabaticity
//! - [`fidelity`]: perturbative fiber-loss fidelity and parameter sweeps
//! - [`protocol`]: the multi-round NOON construction and final measurement

pub mod dynamics;
pub mod error;
pub mod fidelity;
pub mod hamiltonian;
pub mod model;
pub mod protocol;
pub mod pulses;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{BasisLabel, Chain, StateVector, SystemParams};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
