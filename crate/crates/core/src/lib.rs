//! Trotterized real-time evolution of qubitized lattice models with NISQ
//! noise emulation, transpilation and error mitigation.
//!
//! The pipeline is: build a [`PauliSum`] Hamiltonian ([`models`]), compile
//! it into a first-order Trotter [`Circuit`] ([`compiler`]), optionally lower
//! and route it onto a device topology, execute it on the statevector engine
//! with or without emulated noise ([`noise`]), mitigate, and reduce the
//! samples to observables ([`observables`]). [`exact`] provides the dense
//! exact-diagonalization reference.

pub mod circuit;
pub mod compiler;
pub mod dense;
pub mod error;
pub mod exact;
pub mod models;
pub mod noise;
pub mod observables;
pub mod pauli;
pub mod rng;
pub mod statevec;

pub use circuit::{Circuit, Gate};
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliSum, PauliTerm};
pub use statevec::{Counts, StateVector};
