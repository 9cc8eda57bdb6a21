//! Simulation of transition-selective pulse experiments on strongly
//! dipolar-coupled nuclear spin systems.
//!
//! The crate builds multi-level spin Hamiltonians for small oriented
//! molecules (a group of two or three equivalent spin-1/2 nuclei plus
//! optional heteronuclear partners), decomposes them into symmetry
//! manifolds, and evolves deviation density matrices under sequences of
//! hard pulses, transition-selective pulses (ideal or time-sliced
//! Gaussian), delays, spin echoes and gradient crushers.  On top of the
//! engine sit controlled phase-shift gates built from pairs of selective
//! π pulses, Bloch-sphere trajectory/solid-angle analysis of the
//! resulting geometric phases, and the Deutsch-Jozsa and parity
//! algorithm pipelines together with stick-spectrum synthesis.
//!
//! The core is `no_std` + `alloc`; all IO, file formats and the command
//! line live in the companion `spinsim-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod algebra;
pub mod algorithms;
pub mod engine;
pub mod geometry;
pub mod spectrum;
pub mod system;

pub use algebra::{Axis, ComplexMatrix, SubspacePair};
pub use engine::{DensityState, ExecModel, PulseEvent, PulseSequence};
pub use spectrum::Spectrum;
pub use system::{LevelScheme, MoleculeTemplate, SpinSystem, SpinSystemSpec, TransitionCatalog};

/// Errors shared across the simulation modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A subspace pair index was out of range or not ordered.
    InvalidPair { r: usize, s: usize, dim: usize },
    /// Two matrices (or a matrix and a state) had incompatible dimensions.
    DimensionMismatch { left: usize, right: usize },
    /// A matrix entry was NaN or infinite.
    NonFinite,
    /// The reference matrix of a global-phase comparison was all zero.
    ZeroReference,
    /// The eigensolver failed to converge.
    NoConvergence,
    /// A spin-system description violated its invariants.
    BadSystem(alloc::string::String),
    /// The Hamiltonian does not commute with the permutation symmetry
    /// of the equivalent group to the required tolerance.
    SymmetryBroken { residual: f64 },
    /// A channel name did not match any declared channel.
    UnknownChannel(alloc::string::String),
    /// A transition label could not be resolved in the catalog.
    UnknownTransition(alloc::string::String),
    /// A pulse-sequence event could not be executed; `index` is the
    /// position of the offending event.
    EventFailed {
        index: usize,
        reason: alloc::boxed::Box<Error>,
    },
    /// A shaped pulse was requested with too coarse a time grid.
    TooFewSlices { slices: usize, min: usize },
    /// An operation required a strictly positive quantity.
    NonPositive(&'static str),
    /// A trajectory handed to the solid-angle routine was not closed.
    OpenLoop,
    /// Trajectory samples left the unit sphere beyond tolerance.
    NotUnitLoop { worst: f64 },
    /// The initial state of a phase decomposition was not a pure state
    /// confined to the requested two-level subspace.
    NotPureInSubspace,
    /// A parity string or oracle request was malformed.
    BadOracle(alloc::string::String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::InvalidPair { r, s, dim } => {
                write!(f, "invalid level pair ({r},{s}) for dimension {dim}")
            }
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::NonFinite => write!(f, "matrix contains non-finite entries"),
            Error::ZeroReference => write!(f, "reference matrix is all zero"),
            Error::NoConvergence => write!(f, "eigensolver failed to converge"),
            Error::BadSystem(msg) => write!(f, "invalid spin system: {msg}"),
            Error::SymmetryBroken { residual } => {
                write!(f, "Hamiltonian breaks group symmetry (residual {residual:.3e})")
            }
            Error::UnknownChannel(ch) => write!(f, "unknown channel '{ch}'"),
            Error::UnknownTransition(label) => write!(f, "unknown transition '{label}'"),
            Error::EventFailed { index, reason } => {
                write!(f, "event {index} failed: {reason}")
            }
            Error::TooFewSlices { slices, min } => {
                write!(f, "{slices} slices requested, at least {min} required")
            }
            Error::NonPositive(what) => write!(f, "{what} must be positive"),
            Error::OpenLoop => write!(f, "trajectory is not a closed loop"),
            Error::NotUnitLoop { worst } => {
                write!(f, "trajectory leaves the unit sphere (worst norm error {worst:.3e})")
            }
            Error::NotPureInSubspace => {
                write!(f, "initial state is not pure within the requested subspace")
            }
            Error::BadOracle(msg) => write!(f, "bad oracle request: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
