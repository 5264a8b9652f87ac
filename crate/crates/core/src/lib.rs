//! Simulator and verification suite for a GHZ-based anonymous information
//! exchange among `n` information brokers mediated by a semi-honest Trent.
//!
//! Bottom-up: [`gf2vec`] bit vectors, [`layout`] for the extended secret
//! and aggregated vectors, [`shuffle`] for Trent's block permutations,
//! [`qsim`] for the quantum circuits, and [`protocol`] for the end-to-end
//! run with its trace.

pub mod cli;
pub mod error;
pub mod gf2vec;
pub mod layout;
pub mod protocol;
pub mod qsim;
pub mod shuffle;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use gf2vec::BitVec;
pub use layout::{aggregate, build_extended, expected_blocks, AggregatedVector, Dimensions, ExtendedRecord, ExtendedSecret};
pub use shuffle::{is_block_permutation, random_permutation, shuffle_aggregated, Permutation};
