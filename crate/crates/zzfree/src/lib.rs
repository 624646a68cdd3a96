//! Parasitic-free operating points of a qubit-coupler-qubit circuit.
//!
//! Frequencies are in GHz (cycles per ns) and times in ns, so phases pick
//! up a `2 pi` only inside time evolution. Coherence times are in us.

pub mod circuit;
pub mod cli;
pub mod devices;
pub mod driven;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod operators;
pub mod search;
pub mod spectral;

pub use error::{Error, Result};
