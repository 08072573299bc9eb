//! Monte Carlo laboratory for local-hidden-variable (l.h.v.) models of
//! two-particle correlation experiments.
//!
//! The crate implements, trial by trial, the classical models that mimic the
//! singlet-state correlations of a Bell experiment by exploiting the detection
//! loophole (erasing 50% of the hidden-variable values as non-detections), and
//! the Franson-type variant in which the erased values become delayed,
//! non-coincident clicks on perfect detectors. Closed-form references, a
//! deterministic parallel harness, and an acceptance suite verify every
//! quantitative claim these models make.
//!
//! Modules:
//! - [`geometry`]: angles, unit vectors, azimuth projection, sign convention.
//! - [`models`]: Bell-type trial functions (linear, erased circle, sphere
//!   erasure) and the quantum singlet oracle sampler.
//! - [`franson`]: the delayed-detection Franson model, phase schedules, and
//!   the quantum Franson oracle.
//! - [`stats`]: correlation estimators, detection rates, efficiencies, CHSH,
//!   visibility fits.
//! - [`harness`]: counter-based per-trial RNG streams, experiment execution,
//!   sweeps, and the locality audit.
//! - [`verify`]: the acceptance criteria suite behind `lhvlab verify`.
//! - [`cli`]: run configuration, report types, and subcommand implementations.

pub mod cli;
pub mod franson;
pub mod geometry;
pub mod harness;
pub mod models;
pub mod stats;
pub mod verify;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty sample: {0}")]
    EmptySample(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
