//! Scalar abstractions shared by the engines.
//!
//! The power-series recurrences only need field arithmetic, so they are
//! written against [`Field`] and run unchanged over `f64`, `f32` or exact
//! rationals. The renormalized probability recurrence compares values
//! against the unit interval and needs [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num};

/// Exact or approximate field arithmetic with integer embedding.
pub trait Field: Num + Clone + FromPrimitive + Debug {}

impl<T> Field for T where T: Num + Clone + FromPrimitive + Debug {}

/// Floating-point scalar usable by the normalized engines.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {
    /// Slack allowed on the `[0, 1]` window invariant before a value is
    /// declared numerically broken.
    fn window_eps() -> Self;

    fn from_u64_lossy(v: u64) -> Self {
        Self::from_u64(v).unwrap_or_else(Self::infinity)
    }
}

impl Real for f64 {
    fn window_eps() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn window_eps() -> Self {
        1e-4
    }
}
