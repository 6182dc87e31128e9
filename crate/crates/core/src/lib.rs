//! Simulator for two-photon resonant atom-cavity dynamics and NOON-state
//! generation protocols.
//!
//! A single two-level atom crosses two cavities in sequence and exchanges
//! photons with each field mode strictly in pairs. The crate provides:
//!
//! * [`fockspace`] - the joint pure state of (atom, cavity A, cavity B) in a
//!   truncated Fock basis, with projections and inner products;
//! * [`dynamics`] - the closed-form two-photon propagator for either cavity
//!   and classical-field rotations of the atom;
//! * [`oracle`] - an independent dense-matrix propagator (eigendecomposition
//!   of the interaction Hamiltonian) used to validate the closed form;
//! * [`observables`] - atomic inversion, photon distributions, NOON fidelity;
//! * [`protocol`] - a step interpreter with post-selected or sampled atomic
//!   measurements, plus the built-in pair-deposit and NOON programs;
//! * [`dsl`] - a line-oriented text format (`.qproto`) for protocol programs;
//! * [`sweep`] / [`search`] - parameter sweeps and the interaction-time
//!   optimizer behind the command-line tools.
//!
//! All states are immutable values and all operations are pure functions, so
//! everything here is safe to evaluate concurrently. With the default
//! `parallel` feature, sweeps and validation batches run on rayon; without
//! it they fall back to sequential iteration with identical results.

pub mod dsl;
pub mod dynamics;
pub mod fockspace;
pub mod observables;
pub mod oracle;
mod par;
pub mod protocol;
pub mod search;
pub mod sweep;

pub use fockspace::{AtomLevel, CavityLabel, Error, JointState, Params};

/// Norm agreement expected of any operation documented to return a
/// normalized state.
pub const NORM_TOL: f64 = 1e-10;

/// Below this probability an atomic measurement outcome is treated as
/// impossible and refuses to collapse onto it.
pub const IMPOSSIBLE_OUTCOME_THRESHOLD: f64 = 1e-12;

/// Maximum probability mass allowed within two rungs of the Fock cutoff
/// before the propagators refuse to act (the coupling moves amplitude by
/// two rungs, so anything closer would be corrupted by truncation).
pub const LEAKAGE_TOL: f64 = 1e-8;
