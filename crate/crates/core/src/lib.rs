//! Dissipative quantum Rabi model realized by Floquet sideband modulation of
//! a qubit coupled to a lossy resonator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod dynamics;
pub mod envelope;
pub mod error;
pub mod hilbert;
pub mod models;
pub mod params;
pub mod simplex;
pub mod tomography;

pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, FockBasis, Operator, Pauli, Qubit, StateVector, C64};
