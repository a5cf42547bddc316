//! The O(threshold) storage engine for `P(r, n, m)`.
//!
//! `P(r, n, m) = r!/n^r [x^r] e_m(x)^n`, and the coefficients of the power
//! follow the recurrence in [`crate::series`]. Raw coefficients overflow
//! doubles once `r` is in the thousands, so the floating-point engine works
//! with `q_s = s! h_s / n^s`, which equals `P(s, n, m)`. Substituting into
//! the truncated-exponential recurrence gives
//!
//! ```text
//! q_s = sum_{l=1..min(s,m)} ((n+1) l - s) / (l n^l) * C(s-1, l-1) * q_{s-l},   q_0 = 1
//! ```
//!
//! Each step reads the previous `m` values only, so a [`CoefficientWindow`]
//! of `m + 1` entries is all the state carried from step to step.
//!
//! The weights `((n+1) l - s)` turn negative once `s > (n+1) l`, and when
//! `r / n` is large compared with `m` the sum cancels heavily. Alongside
//! every step the engine propagates a first-order rounding-error shadow
//! through the same weights. If the shadow says the result cannot be
//! trusted, the value is recomputed with the cancellation-free cell sweep
//! (see [`crate::sweep`]) when that fits the configured budget.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{OccupancyError, Result};
use crate::exact::ExactProbability;
use crate::problem::{OccupancyProblem, Trivial};
use crate::scalar::Real;
use crate::series;
use crate::sweep;
use crate::window::{CoefficientWindow, Ring};

/// Engine that produced a [`ProbabilityResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Scaled,
    Rational,
    Weighted,
    MonteCarlo,
    Enumeration,
    InclusionExclusion,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Scaled => "scaled",
            Method::Rational => "rational",
            Method::Weighted => "weighted",
            Method::MonteCarlo => "monte-carlo",
            Method::Enumeration => "enumeration",
            Method::InclusionExclusion => "inclusion-exclusion",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a value was actually obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// Settled by a boundary identity without iterating.
    Shortcut,
    /// The method's own algorithm.
    Direct,
    /// Recomputed by the cell sweep after the recurrence was judged unreliable.
    CellSweep,
}

/// A computed probability together with how it was computed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityResult {
    pub value: f64,
    pub method: Method,
    pub route: Route,
    pub problem: OccupancyProblem,
    /// Estimated absolute error, when the engine tracks one.
    pub error_estimate: Option<f64>,
    pub wall_time: Duration,
}

/// Tuning for the floating-point engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledConfig {
    /// The recurrence value is accepted outright when its error shadow is
    /// below this many machine epsilons.
    pub trusted_ulps: f64,
    /// Most multiply-adds a cell-sweep recomputation may spend.
    pub sweep_budget: u128,
}

impl Default for ScaledConfig {
    fn default() -> Self {
        Self {
            trusted_ulps: 450.0,
            sweep_budget: 2_000_000_000,
        }
    }
}

/// Output of the generic floating-point engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue<T> {
    pub value: T,
    pub route: Route,
    pub error_estimate: T,
}

// splitmix64 finalizer; only the sign bit is used
fn noise_sign(step: u64) -> bool {
    let mut z = step.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31)) >> 63 == 1
}

/// One run of the normalized recurrence for fixed `n` and `m`.
struct RecurrenceState<T> {
    threshold: u64,
    capacity_limit: u128,
    np1: u128,
    inv_n: T,
    // inv_l[l] = 1/l
    inv_l: Vec<T>,
    window: CoefficientWindow<T>,
    shadow: Ring<T>,
    step: u64,
    max_estimate: T,
    // set once q has sunk below `floor`; later q are pushed as zero
    settled: bool,
}

impl<T: Real> RecurrenceState<T> {
    fn new(cells: u64, threshold: u64) -> Self {
        let mut window = CoefficientWindow::new(threshold);
        window.push(T::one()).expect("q_0 = 1 is in range");
        let mut shadow = Ring::with_capacity(window.capacity());
        shadow.push(T::zero());
        let inv_l = (0..=threshold)
            .map(|l| {
                if l == 0 {
                    T::zero()
                } else {
                    T::from_u64_lossy(l).recip()
                }
            })
            .collect();
        Self {
            threshold,
            capacity_limit: u128::from(cells) * u128::from(threshold),
            np1: u128::from(cells) + 1,
            inv_n: T::from_u64_lossy(cells).recip(),
            inv_l,
            window,
            shadow,
            step: 0,
            max_estimate: T::zero(),
            settled: false,
        }
    }

    /// Computes and stores `q_{s}` for the next `s`.
    fn advance(&mut self) -> Result<T> {
        let s = self.step + 1;
        let (q, delta) = if s <= self.threshold {
            (T::one(), T::zero())
        } else if u128::from(s) > self.capacity_limit {
            (T::zero(), T::zero())
        } else if self.settled {
            (T::zero(), floor::<T>())
        } else {
            let (q, delta) = self.combine(s);
            // P(s, n, m) is nonincreasing in s, so once q is this small every
            // later value is too; stopping here keeps subnormals out of the loop
            if q.abs() + delta.abs() <= floor::<T>() {
                self.settled = true;
            }
            (q, delta)
        };
        self.window.push(q)?;
        self.shadow.push(delta);
        self.step = s;
        let est = delta.abs();
        if est > self.max_estimate || est.is_nan() {
            self.max_estimate = est;
        }
        Ok(q)
    }

    #[inline]
    fn combine(&self, s: u64) -> (T, T) {
        let span = s.min(self.threshold) as usize;
        let s_t = T::from_u64_lossy(s);
        let mut binom = self.inv_n; // C(s-1, l-1) / n^l at l = 1
        let mut acc = T::zero();
        let mut shadow_acc = T::zero();
        let mut magnitude = T::zero();
        for l in 1..=span {
            if l > 1 {
                binom =
                    binom * (s_t - T::from_usize(l - 1).unwrap()) * self.inv_l[l - 1] * self.inv_n;
            }
            // (n+1) l - s is exact in 128-bit integers
            let lead = (self.np1 * l as u128) as i128 - i128::from(s);
            let w = T::from_i128(lead).unwrap() * self.inv_l[l] * binom;
            let prev = self.window.back(l - 1);
            let term = w * prev;
            acc = acc + term;
            magnitude = magnitude + term.abs();
            shadow_acc = shadow_acc + w * self.shadow.back(l - 1);
        }
        let unit = T::epsilon() * T::from_f64(0.5).unwrap();
        let mut noise = unit * T::from_usize(span + 2).unwrap() * magnitude;
        if noise_sign(s) {
            noise = -noise;
        }
        (acc, shadow_acc + noise)
    }
}

fn floor<T: Real>() -> T {
    T::min_positive_value() / T::epsilon()
}

fn clamp_probability<T: Real>(value: T, step: u64) -> Result<T> {
    let eps = T::window_eps();
    if !(value >= -eps && value <= T::one() + eps) {
        return Err(OccupancyError::NumericInstability {
            step,
            detail: format!("result {value:?} is not a probability"),
        });
    }
    Ok(value.max(T::zero()).min(T::one()))
}

enum Verdict {
    Accept,
    Sweep,
}

fn judge<T: Real>(
    problem: &OccupancyProblem,
    run: &Result<T>,
    config: &ScaledConfig,
) -> Result<Verdict> {
    let trusted = T::epsilon() * T::from_f64(config.trusted_ulps).unwrap();
    match run {
        Ok(est) if *est <= trusted => Ok(Verdict::Accept),
        _ if sweep::sweep_cost(problem) <= config.sweep_budget => Ok(Verdict::Sweep),
        Ok(est) if *est <= T::window_eps() => Ok(Verdict::Accept),
        Ok(est) => Err(OccupancyError::NumericInstability {
            step: problem.balls(),
            detail: format!(
                "estimated rounding error {est:?} exceeds {:?} and the cell sweep needs {} operations (budget {})",
                T::window_eps(),
                sweep::sweep_cost(problem),
                config.sweep_budget
            ),
        }),
        Err(e) => Err(e.clone()),
    }
}

fn shortcut_value<T: Real>(trivial: Trivial) -> ScaledValue<T> {
    ScaledValue {
        value: match trivial {
            Trivial::Certain => T::one(),
            Trivial::Impossible => T::zero(),
        },
        route: Route::Shortcut,
        error_estimate: T::zero(),
    }
}

fn finish_single<T: Real>(
    problem: &OccupancyProblem,
    state: Result<RecurrenceState<T>>,
    config: &ScaledConfig,
) -> Result<ScaledValue<T>> {
    let estimate = state
        .as_ref()
        .map(|st| st.shadow.back(0).abs())
        .map_err(Clone::clone);
    match judge(problem, &estimate, config)? {
        Verdict::Accept => {
            let st = state?;
            Ok(ScaledValue {
                value: clamp_probability(st.window.back(0), problem.balls())?,
                route: Route::Direct,
                error_estimate: st.shadow.back(0).abs(),
            })
        }
        Verdict::Sweep => {
            let p = sweep::sweep::<T>(problem, false)?;
            Ok(ScaledValue {
                value: clamp_probability(p[p.len() - 1], problem.balls())?,
                route: Route::CellSweep,
                error_estimate: T::epsilon() * T::from_u64_lossy(problem.cells()),
            })
        }
    }
}

/// `P(r, n, m)` in any floating-point type.
pub fn cdf_scaled_in<T: Real>(
    problem: &OccupancyProblem,
    config: &ScaledConfig,
) -> Result<ScaledValue<T>> {
    if let Some(t) = problem.trivial() {
        return Ok(shortcut_value(t));
    }
    let mut state = RecurrenceState::<T>::new(problem.cells(), problem.threshold());
    let run = (0..problem.balls())
        .try_for_each(|_| state.advance().map(|_| ()))
        .map(|()| state);
    finish_single(problem, run, config)
}

/// `P(r, n, m)` in double precision with the default configuration.
pub fn cdf_scaled(problem: &OccupancyProblem) -> Result<ProbabilityResult> {
    cdf_scaled_with(problem, &ScaledConfig::default())
}

pub fn cdf_scaled_with(
    problem: &OccupancyProblem,
    config: &ScaledConfig,
) -> Result<ProbabilityResult> {
    let start = Instant::now();
    let v = cdf_scaled_in::<f64>(problem, config)?;
    Ok(ProbabilityResult {
        value: v.value,
        method: Method::Scaled,
        route: v.route,
        problem: *problem,
        error_estimate: Some(v.error_estimate),
        wall_time: start.elapsed(),
    })
}

/// `[P(0,n,m), P(1,n,m), ..., P(r,n,m)]`, the whole normalized sequence the
/// recurrence walks through.
pub fn cdf_prefix_in<T: Real>(problem: &OccupancyProblem, config: &ScaledConfig) -> Result<Vec<T>> {
    let r = usize::try_from(problem.balls())
        .map_err(|_| OccupancyError::Overflow("ball count exceeds usize".into()))?;
    let mut out = Vec::with_capacity(r + 1);
    out.push(T::one());
    let mut state = RecurrenceState::<T>::new(problem.cells(), problem.threshold());
    let run = (0..problem.balls())
        .try_for_each(|_| state.advance().map(|q| out.push(q)))
        .map(|()| state.max_estimate);
    match judge(problem, &run, config)? {
        Verdict::Accept => out
            .into_iter()
            .enumerate()
            .map(|(s, q)| clamp_probability(q, s as u64))
            .collect(),
        Verdict::Sweep => sweep::sweep::<T>(problem, true),
    }
}

pub fn cdf_prefix(problem: &OccupancyProblem) -> Result<Vec<f64>> {
    cdf_prefix_in::<f64>(problem, &ScaledConfig::default())
}

/// `P(r, n, m)` for several thresholds at once, advancing one recurrence per
/// threshold in lockstep over a single pass through the balls.
pub fn cdf_thresholds_in<T: Real>(
    balls: u64,
    cells: u64,
    thresholds: &[u64],
    config: &ScaledConfig,
) -> Result<Vec<ScaledValue<T>>> {
    let problems = thresholds
        .iter()
        .map(|&m| OccupancyProblem::new(balls, cells, m))
        .collect::<Result<Vec<_>>>()?;
    let mut states: Vec<Option<Result<RecurrenceState<T>>>> = problems
        .iter()
        .map(|p| {
            p.trivial()
                .is_none()
                .then(|| Ok(RecurrenceState::new(cells, p.threshold())))
        })
        .collect();
    for _ in 0..balls {
        for slot in states.iter_mut().flatten() {
            if let Ok(st) = slot {
                if let Err(e) = st.advance() {
                    *slot = Err(e);
                }
            }
        }
    }
    problems
        .iter()
        .zip(states)
        .map(|(p, state)| match (p.trivial(), state) {
            (Some(t), _) => Ok(shortcut_value(t)),
            (None, Some(run)) => finish_single(p, run, config),
            (None, None) => unreachable!("nontrivial problems always get a state"),
        })
        .collect()
}

pub fn cdf_thresholds(
    balls: u64,
    cells: u64,
    thresholds: &[u64],
    config: &ScaledConfig,
) -> Result<Vec<ProbabilityResult>> {
    let start = Instant::now();
    let values = cdf_thresholds_in::<f64>(balls, cells, thresholds, config)?;
    let elapsed = start.elapsed();
    thresholds
        .iter()
        .zip(values)
        .map(|(&m, v)| {
            Ok(ProbabilityResult {
                value: v.value,
                method: Method::Scaled,
                route: v.route,
                problem: OccupancyProblem::new(balls, cells, m)?,
                error_estimate: Some(v.error_estimate),
                wall_time: elapsed,
            })
        })
        .collect()
}

/// Default step budget for [`cdf_rational`]: `balls * min(threshold, balls)`
/// rational multiply-adds.
pub const DEFAULT_RATIONAL_BUDGET: u128 = 20_000_000;

/// Exact `P(r, n, m)`: the truncated-exponential recurrence run on raw
/// coefficients in rational arithmetic, finished with `r! h_r / n^r`.
pub fn cdf_rational(problem: &OccupancyProblem) -> Result<ExactProbability> {
    cdf_rational_with_budget(problem, DEFAULT_RATIONAL_BUDGET)
}

pub fn cdf_rational_with_budget(
    problem: &OccupancyProblem,
    budget: u128,
) -> Result<ExactProbability> {
    match problem.trivial() {
        Some(Trivial::Certain) => return Ok(ExactProbability::one()),
        Some(Trivial::Impossible) => return Ok(ExactProbability::zero()),
        None => {}
    }
    let cost = u128::from(problem.balls()) * u128::from(problem.threshold().min(problem.balls()));
    if cost > budget {
        return Err(OccupancyError::ResourceLimit {
            what: "rational recurrence steps",
            needed: cost,
            budget,
        });
    }
    let h = series::truncated_exp_power::<BigRational>(problem)?;
    let r = problem.balls();
    let mut factorial = BigInt::one();
    for k in 2..=r {
        factorial *= k;
    }
    let n_pow = num_traits::pow(BigInt::from(problem.cells()), r as usize);
    let value = h * BigRational::new(factorial, n_pow);
    debug_assert!(!value.denom().is_zero());
    ExactProbability::new(value)
}

/// Wraps an exact result as a [`ProbabilityResult`].
pub fn rational_result(problem: &OccupancyProblem) -> Result<ProbabilityResult> {
    let start = Instant::now();
    let exact = cdf_rational(problem)?;
    Ok(ProbabilityResult {
        value: exact.to_f64(),
        method: Method::Rational,
        route: if problem.trivial().is_some() {
            Route::Shortcut
        } else {
            Route::Direct
        },
        problem: *problem,
        error_estimate: Some(0.0),
        wall_time: start.elapsed(),
    })
}
