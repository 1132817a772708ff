//! Variable-order stable subordinators (VOSS) and the generalized
//! space-fractional Poisson process driven by one (GSFPP-VO).
//!
//! The process of interest is `ξ(t) = N(S(t))`, a homogeneous Poisson
//! process with rate `λ` evaluated at an independent subordinator whose
//! stability index `α(·)` is piecewise constant in time. The crate provides
//!
//! * exact-in-distribution samplers for the subordinator and the counting
//!   process ([`stable`], [`montecarlo`]),
//! * closed-form and series evaluators for the pmf, pgf, characteristic
//!   function, hitting-time probabilities and per-segment Lévy measures
//!   ([`analytics`]),
//! * a seeded statistical harness that cross-checks the series formulas
//!   against an independent convolution oracle and Monte Carlo
//!   ([`verify`]).

pub mod analytics;
pub mod config;
pub mod montecarlo;
pub mod rng;
pub mod schedule;
pub mod stable;
pub mod stats;
pub mod verify;

mod error;

pub use error::Error;
pub use schedule::{AlphaSchedule, Rate};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
