//! Multi-timescale parameter store.
//!
//! An ordinary learner keeps one scalar per parameter and overwrites it on
//! every update, so new experience erases old. Here every parameter is instead
//! the visible end of a short chain of coupled variables with exponentially
//! growing capacities and exponentially shrinking couplings: fast levels track
//! recent updates, slow levels buffer a long history, and diffusion between
//! them both consolidates new values inward and restores old values outward
//! when the surface is disturbed.
//!
//! The crate provides dense arrays of such chains ([`ChainArray`]) with an
//! explicit-Euler integrator ([`ChainArray::consolidate`]) that costs
//! O(chains * levels) per step, supports per-chain modulation of the coupling
//! strengths, and optionally gates backward flow until deep levels have had
//! time to charge. Chain state can be saved and restored bit-exactly
//! ([`write_snapshot`] / [`read_snapshot`]).

mod array;
mod config;
mod snapshot;

pub use array::{ChainArray, Modulation, ModulationKind};
pub use config::{stability_ratio, validate_config, ChainConfig, ChainError, ChainGeometry};
pub use snapshot::{read_snapshot, write_snapshot};
