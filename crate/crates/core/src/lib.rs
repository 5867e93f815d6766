//! Robustness and resilience evaluation for agents that operate a power grid
//! from sensor observations.
//!
//! The crate bundles a small deterministic grid simulator ([`grid`]), a greedy
//! lookahead operator agent ([`defender`]), three observation attackers
//! ([`perturb`]), the metric suites ([`metrics`]) and a campaign runner that
//! pairs perturbed and unperturbed episodes ([`harness`]).

pub mod defender;
pub mod error;
pub mod grid;
pub mod harness;
pub mod metrics;
pub mod perturb;

pub use error::{Error, Result};
