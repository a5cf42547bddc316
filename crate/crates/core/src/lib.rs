//! Exact distribution of the maximum cell occupancy when `r` balls are
//! dropped independently into `n` cells.
//!
//! The main entry point is [`cdf_scaled`], which evaluates
//! `P(r, n, m) = Pr(no cell holds more than m balls)` in `O(m r)` time with
//! `O(m)` state. [`cdf_rational`] gives the same quantity as an exact
//! fraction, [`cdf_weighted`] handles unequal cell probabilities, and
//! [`p_value`] / [`build_table`] turn CDF values into P-values for an
//! observed maximum. [`estimate_cdf`] simulates the same quantity and the
//! [`oracle`] module holds brute-force references for small inputs.
//!
//! The recurrences are generic over the scalar type: [`series`] runs over
//! any [`Field`] (floats or [`Rational`]), the normalized engine over any
//! [`Real`] (`f64`, `f32`).

pub mod error;
pub mod exact;
pub mod montecarlo;
pub mod oracle;
pub mod problem;
pub mod pvalue;
pub mod recurrence;
pub mod scalar;
pub mod series;
mod sweep;
pub mod weighted;
pub mod window;

pub use error::{OccupancyError, Result};
pub use exact::ExactProbability;
pub use montecarlo::{estimate_cdf, simulate_max, MonteCarloEstimate};
pub use problem::OccupancyProblem;
pub use pvalue::{build_table, p_value, PValueTable, TableRow};
pub use recurrence::{
    cdf_prefix, cdf_rational, cdf_scaled, cdf_scaled_with, cdf_thresholds, Method,
    ProbabilityResult, Route, ScaledConfig, ScaledValue,
};
pub use scalar::{Field, Real};
pub use weighted::{cdf_weighted, ScaledPolynomial, WeightVector};
pub use window::CoefficientWindow;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Double-precision coefficient window, the one [`cdf_scaled`] uses.
pub type Window64 = CoefficientWindow<f64>;
pub type Window32 = CoefficientWindow<f32>;
pub type ScaledValue64 = ScaledValue<f64>;
pub type ScaledValue32 = ScaledValue<f32>;
