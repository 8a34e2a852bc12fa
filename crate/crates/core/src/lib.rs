//! Spectral workbench for the reduced Hartree–Fock model coupled to a
//! self-generated magnetic field.
//!
//! The crate is organised bottom-up:
//!
//! - [`fields`]: periodic cells, FFT-backed fields and spectral operators.
//! - [`pauli`]: the Pauli kinetic operator, nuclear potentials, Hartree and
//!   magnetic energies.
//! - [`density`]: finite-rank density matrices, their observables and the
//!   total energy.
//! - [`scf`]: eigensolver, Fermi filling, vector-potential update and the
//!   self-consistent loop.
//! - [`zero_modes`]: the analytic Loss–Yau family, rank-1 threshold bounds and
//!   the dilation instability scan.
//! - [`tf`]: Thomas–Fermi minimisation and the `z^{7/6}` lower-bound chain.
//! - [`io`]: configuration, result records, checkpoints and subcommands.

pub mod density;
pub mod error;
pub mod fields;
pub mod io;
pub mod pauli;
pub mod quadrature;
pub mod scf;
pub mod tf;
pub mod zero_modes;

mod parallel;

pub use error::{Error, Result};
pub use fields::{Cell, ScalarField, SpinorField, VectorField, C64};
