//! Concentration bounds for the missing mass of a finite discrete
//! distribution, together with the machinery used to check them
//! numerically: exact and Monte-Carlo deviation probabilities, the
//! split/absorb threshold construction, Chernoff entropies of tilted
//! distributions, and negative-association diagnostics.
//!
//! Every numeric routine is generic over a [`Real`] scalar (`f32` or `f64`).
//! The `f64` aliases below are what the CLI and the acceptance suite use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod distributions;
pub mod error;
pub mod lambert;
pub mod missing_mass;
pub mod na_checks;
pub mod real;
pub mod sampling;
pub mod stats;
pub mod tilt_entropy;

pub use error::{Error, Result};
pub use real::Real;

pub type Distribution = distributions::DiscreteDistribution<f64>;
pub type Threshold = distributions::ThresholdPartition<f64>;
pub type Stats = missing_mass::MissingMassStats<f64>;
pub type Deviation = missing_mass::DeviationEstimate<f64>;
pub type ExactDistribution = missing_mass::ExactDistribution<f64>;
pub type Bound = bounds::BoundResult<f64>;
pub type Comparator = bounds::ComparatorSpec<f64>;
pub type Pmf = tilt_entropy::FinitePmf<f64>;
pub type LambertW = lambert::WResult<f64>;
pub type NaReport = na_checks::NaReport<f64>;
