//! Measurement-only quantum computation via state transfer.
//!
//! This crate simulates, verifies and compiles the measurement-only model in
//! which every unitary is realized by sequences of 1- and 2-qubit projective
//! measurements with a single reusable auxiliary qubit:
//!
//! - [`statevec`]: dense state vectors with gate application and comparison
//!   primitives (all equality is modulo global phase).
//! - [`observables`]: the five measurement axes {X, Y, Z, (X±Y)/√2} and
//!   two-outcome projective measurement, sampled or forced.
//! - [`patterns`]: the measurement patterns — state transfer, generalized
//!   state transfer, CNot, teleportation — each with its closed-form
//!   outcome-to-byproduct rule.
//! - [`automaton`]: full simulation by repeated correction steps until the
//!   residual Pauli is the identity, or classical frame tracking instead.
//! - [`compiler`]: `.qc` circuit parsing and lowering to measurement programs
//!   over the universal observable families O1 and O2, with n+1 physical
//!   qubits for n logical ones.
//! - [`harness`]: branch enumeration against the direct-unitary oracle,
//!   seeded statistical runs and verification reports.
//!
//! Qubit 0 is the least significant bit of every amplitude index; outcomes
//! are encoded ±1; Pauli byproducts carry no phase.

pub mod automaton;
mod cmat;
pub mod compiler;
pub mod error;
pub mod gates;
pub mod harness;
pub mod observables;
pub mod patterns;
pub mod pauli;
pub mod runner;
pub mod statevec;

pub use cmat::CMat;
pub use error::{Error, Result};
pub use gates::GateMatrix;
pub use observables::{Axis, Observable, Outcome};
pub use patterns::{MeasurementPattern, OutcomeVector};
pub use pauli::{PauliBits, PauliOp};
pub use statevec::StateVector;
