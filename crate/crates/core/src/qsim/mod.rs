//! Quantum simulation in two tiers.
//!
//! [`structured`] keeps only the `2^p` coefficients of a GHZ-diagonal state
//! and is what the protocol runs on. [`dense`] is a plain statevector
//! simulator for small instances; [`circuit`] builds the gate lists it runs,
//! so the two tiers can be checked against each other.

pub mod circuit;
pub mod dense;
pub mod structured;
pub mod wht;

pub use circuit::{
    build_phase1_circuit, build_phase1_circuit_with_cap, build_phase3_circuit, build_phase3_circuit_with_cap,
    ghz_prep_gates, ghz_prep_on, Gate, GateList, GateRecord, PhaseCircuit,
};
pub use dense::{extract_register, DenseState, DEFAULT_DENSE_CAP};
pub use structured::{CharacterState, GhzDiagonalState, GhzResource, OutcomeDistribution, Tier, DEFAULT_STRUCTURED_CAP};
pub use wht::wht;
