//! Coefficients of integer powers of power series.
//!
//! For `h(x) = f(x)^n`, differentiating `log h = n log f` gives
//! `f h' = n f' h`, and comparing coefficients of `x^s` yields
//!
//! ```text
//! h_s = 1 / (s a_0) * sum_{l=1..s} ((n + 1) l - s) a_l h_{s-l}
//! ```
//!
//! so each `h_s` follows from the previous ones. When `f` is a polynomial of
//! degree `d`, only the last `d` coefficients are ever referenced.

use std::collections::VecDeque;

use crate::error::{OccupancyError, Result};
use crate::problem::OccupancyProblem;
use crate::scalar::Field;

fn pow<T: Field>(base: &T, mut exp: u64) -> T {
    let mut acc = T::one();
    let mut sq = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * sq.clone();
        }
        exp >>= 1;
        if exp > 0 {
            sq = sq.clone() * sq;
        }
    }
    acc
}

fn embed<T: Field>(v: u64) -> Result<T> {
    T::from_u64(v).ok_or_else(|| OccupancyError::Overflow(format!("{v} is not representable")))
}

/// First `len` coefficients of `base(x)^exponent`.
///
/// `base[0]` must be nonzero.
pub fn power_coefficients<T: Field>(base: &[T], exponent: u64, len: usize) -> Result<Vec<T>> {
    let a0 = base
        .first()
        .ok_or_else(|| OccupancyError::InvalidProblem("base series has no coefficients".into()))?;
    if a0.is_zero() {
        return Err(OccupancyError::InvalidProblem(
            "base series must have a nonzero constant term".into(),
        ));
    }
    let mut out: Vec<T> = Vec::with_capacity(len);
    if len == 0 {
        return Ok(out);
    }
    out.push(pow(a0, exponent));
    let np1 = embed::<T>(exponent)? + T::one();
    for s in 1..len {
        let s_t = embed::<T>(s as u64)?;
        let mut acc = T::zero();
        for l in 1..=s.min(base.len() - 1) {
            if base[l].is_zero() {
                continue;
            }
            let coeff = np1.clone() * embed::<T>(l as u64)? - s_t.clone();
            acc = acc + coeff * base[l].clone() * out[s - l].clone();
        }
        out.push(acc / (s_t * a0.clone()));
    }
    Ok(out)
}

/// `[x^r] e_m(x)^n` where `e_m` is the degree-`m` section of the exponential
/// series, keeping only the last `m` coefficients alive.
///
/// With `a_l = 1/l!` the general recurrence becomes
/// `h_s = 1/s * sum_{l=1..min(s,m)} ((n+1) l - s) h_{s-l} / l!`.
pub fn truncated_exp_power<T: Field>(problem: &OccupancyProblem) -> Result<T> {
    let r = problem.balls();
    let n = problem.cells();
    let m = problem.threshold();
    if m == 0 {
        return Ok(if r == 0 { T::one() } else { T::zero() });
    }
    // 1/l! for l = 1..=min(m, r)
    let span = m.min(r) as usize;
    let mut inv_fact = Vec::with_capacity(span);
    let mut f = T::one();
    for l in 1..=span {
        f = f / embed::<T>(l as u64)?;
        inv_fact.push(f.clone());
    }
    let np1 = embed::<T>(n)? + T::one();
    // window[0] is h_{s-1}, window[l-1] is h_{s-l}
    let mut window: VecDeque<T> = VecDeque::with_capacity(span + 1);
    window.push_front(T::one());
    for s in 1..=r {
        let s_t = embed::<T>(s)?;
        let mut acc = T::zero();
        for (l, h_prev) in window.iter().enumerate() {
            let l1 = l + 1;
            let coeff = np1.clone() * embed::<T>(l1 as u64)? - s_t.clone();
            acc = acc + coeff * inv_fact[l].clone() * h_prev.clone();
        }
        if window.len() == span {
            window.pop_back();
        }
        window.push_front(acc / s_t);
    }
    Ok(window.pop_front().unwrap_or_else(T::one))
}

/// `r! h_r / n^r` evaluated directly in `T`.
///
/// Exact over rationals; over floats the factorial and the power overflow
/// long before the probability itself becomes hard to represent.
pub fn cdf_unnormalized<T: Field>(problem: &OccupancyProblem) -> Result<T> {
    let h = truncated_exp_power::<T>(problem)?;
    let mut scale = T::one();
    for k in 1..=problem.balls() {
        scale = scale * embed::<T>(k)?;
    }
    let n_pow = pow(&embed::<T>(problem.cells())?, problem.balls());
    Ok(scale * h / n_pow)
}
