//! Simulation and statistical verification for finite-rank deformations of
//! Wigner matrices.
//!
//! The crate is split by responsibility:
//!
//! * [`analytic`] closed-form semicircle calculus and spike predictions,
//! * [`ensemble`] seeded samplers for the deformed ensembles,
//! * [`spectra`] the self-adjoint eigensolver and spectral utilities,
//! * [`stats`] empirical-distribution tests and summaries,
//! * [`quadform`] the quadratic-form CLT checks,
//! * [`harness`] configuration, replication scheduling and reports.

pub mod analytic;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod quadform;
pub mod quadrature;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};

/// Version string embedded in every report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
