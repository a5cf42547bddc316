//! Cell-by-cell evaluation of the occupancy CDF.
//!
//! Write `u_k(s)` for the probability that `s` balls, each landing in one of
//! the first `k` cells with probability proportional to the cell weights,
//! leave every one of those cells with at most `m`. Conditioning on how many
//! balls the `k`-th cell receives gives
//!
//! ```text
//! u_k(s) = sum_{j=0..min(s,m)} Binom(j; s, w_k / W_k) u_{k-1}(s - j)
//! ```
//!
//! with `W_k` the total weight of the first `k` cells. Every term is
//! nonnegative, so nothing cancels. The evaluation costs
//! `O(cells * balls * threshold)`. With equal weights it is the fallback for
//! the ball recurrence; with general weights it is the unequal-probability
//! engine.

use crate::error::{OccupancyError, Result};
use crate::problem::OccupancyProblem;
use crate::scalar::Real;

/// Folds one more cell into a vector of conditional probabilities.
pub(crate) struct CellFold<T> {
    threshold: usize,
    inv_j: Vec<T>,
    binom: Vec<T>,
    log_floor: T,
}

impl<T: Real> CellFold<T> {
    pub(crate) fn new(threshold: usize) -> Self {
        Self {
            threshold,
            inv_j: (0..=threshold)
                .map(|j| {
                    if j == 0 {
                        T::zero()
                    } else {
                        T::from_usize(j).unwrap().recip()
                    }
                })
                .collect(),
            binom: vec![T::zero(); threshold + 1],
            log_floor: T::from_f64(-700.0).unwrap(),
        }
    }

    /// The vector for a single cell: `1` up to the threshold, `0` beyond.
    pub(crate) fn first_cell(&self, len: usize) -> Vec<T> {
        (0..len)
            .map(|s| {
                if s <= self.threshold {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    /// Replaces `u[s]` for `s` in `lo..=hi` by the fold with a new cell
    /// that takes each ball with probability `1 - exp(log_stay)`;
    /// `odds` is that probability over `exp(log_stay)`.
    pub(crate) fn apply(&mut self, u: &mut [T], log_stay: T, odds: T, lo: usize, hi: usize) {
        let m = self.threshold;
        // descending, so u[s - j] still holds the previous cell's values
        for s in (lo..=hi).rev() {
            let top = s.min(m);
            let sf = T::from_usize(s).unwrap();
            let log_b0 = sf * log_stay;
            if log_b0 > self.log_floor {
                let mut b = log_b0.exp();
                self.binom[0] = b;
                for j in 1..=top {
                    b = b * T::from_usize(s - j + 1).unwrap() * self.inv_j[j] * odds;
                    self.binom[j] = b;
                }
            } else {
                // stay^s underflows; walk the binomial in log space
                let log_odds = odds.ln();
                let mut lb = log_b0;
                self.binom[0] = T::zero();
                for j in 1..=top {
                    lb = lb + (T::from_usize(s - j + 1).unwrap() * self.inv_j[j]).ln() + log_odds;
                    self.binom[j] = lb.exp();
                }
            }
            let mut acc = T::zero();
            for j in 0..=top {
                acc = acc + self.binom[j] * u[s - j];
            }
            u[s] = acc;
        }
    }
}

/// Upper bound on the multiply-adds [`sweep`] performs.
pub(crate) fn sweep_cost(problem: &OccupancyProblem) -> u128 {
    u128::from(problem.cells())
        * (u128::from(problem.balls()) + 1)
        * (u128::from(problem.threshold().min(problem.balls())) + 1)
}

/// Ball counts still relevant once `done` of `total` cells are folded in.
/// Without `prefix` only the final count `r` matters, so counts the
/// remaining cells could never top up to `r` are skipped.
pub(crate) fn live_range(
    r: usize,
    m: usize,
    done: u64,
    total: u64,
    prefix: bool,
) -> (usize, usize) {
    let hi = (u128::from(done) * m as u128).min(r as u128) as usize;
    let lo = if prefix {
        0
    } else {
        let rest = u128::from(total - done) * m as u128;
        (r as u128).saturating_sub(rest) as usize
    };
    (lo, hi)
}

/// Equal-weight sweep. With `prefix` set, returns `P(s, n, m)` for every
/// `s <= r`; otherwise only the last element is meaningful.
pub(crate) fn sweep<T: Real>(problem: &OccupancyProblem, prefix: bool) -> Result<Vec<T>> {
    let r = usize::try_from(problem.balls())
        .map_err(|_| OccupancyError::Overflow("ball count exceeds usize".into()))?;
    let n = problem.cells();
    let m = problem.threshold().min(problem.balls()) as usize;

    let mut fold = CellFold::<T>::new(m);
    let mut u = fold.first_cell(r + 1);
    for k in 2..=n {
        let kf = T::from_u64_lossy(k);
        let log_stay = (-kf.recip()).ln_1p();
        let odds = (kf - T::one()).recip();
        let (lo, hi) = live_range(r, m, k, n, prefix);
        fold.apply(&mut u, log_stay, odds, lo, hi);
    }
    for v in u.iter_mut() {
        *v = v.min(T::one());
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(r: u64, n: u64, m: u64) -> f64 {
        let p = OccupancyProblem::new(r, n, m).unwrap();
        *sweep::<f64>(&p, false).unwrap().last().unwrap()
    }

    #[test]
    fn small_values() {
        assert!((run(3, 3, 1) - 2.0 / 9.0).abs() < 1e-15);
        assert!((run(2, 2, 1) - 0.5).abs() < 1e-15);
        assert!((run(3, 2, 2) - 0.75).abs() < 1e-15);
        assert!((run(4, 1, 4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prefix_matches_individual_runs() {
        let p = OccupancyProblem::new(30, 6, 7).unwrap();
        let prefix = sweep::<f64>(&p, true).unwrap();
        for s in 0..=30u64 {
            let single = run(s, 6, 7);
            assert!((prefix[s as usize] - single).abs() < 1e-14, "s={s}");
        }
    }

    #[test]
    fn log_space_weights() {
        // (1 - 1/2)^s underflows for s > ~1000
        let v = run(2400, 2, 1300);
        assert!(v.is_finite());
        assert!(v > 0.9);
    }
}
