//! Numerical and combinatorial verification of the Doléans-Dade stochastic
//! exponential `Z(t) = exp(∫ψ dB − ½∫ψ² du)` for a deterministic integrand ψ.
//!
//! The crate is organised around four layers:
//!
//! * [`psi`] describes the integrand, computes `φ(t) = ∫₀ᵗ ψ(u)² du` and
//!   decides the Novikov finiteness criterion.
//! * [`paths`] simulates Brownian increments, Itô integrals, the stochastic
//!   exponential (exact and Euler–Maruyama) and the drifted process
//!   `X(t) = x₀ e^{αt} Z(t)` from a counter-based generator.
//! * [`wick`] enumerates pair partitions and evaluates the truncated moment
//!   and cumulant generating series of the weighted noise `ψ ξ`.
//! * [`estimators`] turns simulated bundles into statistical verdicts.
//!
//! The [`cli`] module holds the subcommand implementations used by the
//! `stochexp` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod export;
pub mod grid;
pub mod paths;
pub mod psi;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod wick;

pub use config::{RunConfig, Scheme};
pub use error::{Error, Result};
pub use estimators::{EstimateReport, MartingaleTestReport};
pub use grid::TimeGrid;
pub use paths::{PathBundle, SeedSpec};
pub use psi::{IntegrandKind, IntegrandSpec, NovikovReport, NovikovVerdict, PhiMethod, PhiProfile};
pub use wick::{PairPartition, SeriesTruncation};
