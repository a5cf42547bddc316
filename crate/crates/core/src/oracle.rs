//! Independent exact evaluations of `P(r, n, m)` for cross-checking the
//! engines on small inputs.
//!
//! Both oracles work in arbitrary-precision integers or rationals and refuse
//! inputs whose predicted cost exceeds an [`OracleBudget`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{OccupancyError, Result};
use crate::exact::ExactProbability;

/// Work limits checked before an oracle starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_compositions: u128,
    pub max_terms: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_compositions: 5_000_000,
            max_terms: 50_000_000,
        }
    }
}

fn pascal(rows: usize) -> Vec<Vec<BigInt>> {
    let mut t: Vec<Vec<BigInt>> = Vec::with_capacity(rows + 1);
    for a in 0..=rows {
        let mut row = vec![BigInt::one(); a + 1];
        for k in 1..a {
            row[k] = &t[a - 1][k - 1] + &t[a - 1][k];
        }
        t.push(row);
    }
    t
}

/// `C(a, k)` as `u128`, saturating.
fn binomial_u128(a: u128, k: u128) -> u128 {
    let k = k.min(a - k.min(a));
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (a - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(a - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of ways to write `r` as an ordered sum of `n` nonnegative parts.
pub fn composition_count(r: u64, n: u64) -> u128 {
    if n == 0 {
        return u128::from(r == 0);
    }
    binomial_u128(u128::from(r) + u128::from(n) - 1, u128::from(n) - 1)
}

/// Exact weights in lowest terms from floating-point probabilities.
pub fn rational_weights(weights: &[f64]) -> Result<Vec<BigRational>> {
    weights
        .iter()
        .map(|&w| {
            BigRational::from_float(w)
                .filter(|q| !q.is_negative())
                .ok_or_else(|| {
                    OccupancyError::InvalidWeights(format!("weight {w} is not a probability"))
                })
        })
        .collect()
}

struct Enumeration<'a> {
    m: usize,
    binom: Vec<Vec<BigInt>>,
    // powers[i][k] = p_i^k
    powers: Option<Vec<Vec<BigRational>>>,
    weights: Option<&'a [BigRational]>,
}

impl Enumeration<'_> {
    /// Sums over bounded compositions of `remaining` into cells
    /// `cell..n`, carrying the product of binomials chosen so far.
    fn walk(
        &self,
        cell: usize,
        n: usize,
        remaining: usize,
        ways: &BigInt,
        weight: &BigRational,
        out: &mut BigRational,
    ) {
        if cell + 1 == n {
            if remaining <= self.m {
                let w = match &self.powers {
                    Some(p) => weight * &p[cell][remaining],
                    None => weight.clone(),
                };
                *out += w * ways;
            }
            return;
        }
        // prune: the remaining cells cannot absorb what is left
        let rest = (n - cell - 1) * self.m;
        let lo = remaining.saturating_sub(rest);
        for k in lo..=remaining.min(self.m) {
            let ways_k = ways * &self.binom[remaining][k];
            let weight_k = match &self.powers {
                Some(p) => weight * &p[cell][k],
                None => weight.clone(),
            };
            self.walk(cell + 1, n, remaining - k, &ways_k, &weight_k, out);
        }
    }
}

/// `P(max <= m)` by summing the multinomial probability of every
/// occupancy vector with all parts at most `m`.
///
/// Without weights the cells are equally likely. With weights, they are
/// normalized by their exact total first.
pub fn enumerate_cdf(
    r: u64,
    n: u64,
    m: u64,
    weights: Option<&[BigRational]>,
    budget: &OracleBudget,
) -> Result<ExactProbability> {
    if n == 0 {
        return Err(OccupancyError::InvalidProblem(
            "at least one cell is required".into(),
        ));
    }
    let predicted = composition_count(r, n);
    if predicted > budget.max_compositions {
        return Err(OccupancyError::ResourceLimit {
            what: "compositions to enumerate",
            needed: predicted,
            budget: budget.max_compositions,
        });
    }
    let (r, n_us, m) = (r as usize, n as usize, m as usize);
    let normalized: Option<Vec<BigRational>> = match weights {
        Some(w) => {
            if w.len() != n_us {
                return Err(OccupancyError::InvalidWeights(format!(
                    "{} weights for {n} cells",
                    w.len()
                )));
            }
            if w.iter().any(|q| q.is_negative()) {
                return Err(OccupancyError::InvalidWeights("negative weight".into()));
            }
            let total: BigRational = w.iter().cloned().sum();
            if total.is_zero() {
                return Err(OccupancyError::InvalidWeights("weights sum to zero".into()));
            }
            Some(w.iter().map(|q| q / &total).collect())
        }
        None => None,
    };
    let powers = normalized.as_ref().map(|w| {
        w.iter()
            .map(|p| {
                let mut v = Vec::with_capacity(r + 1);
                let mut acc = BigRational::one();
                for _ in 0..=r {
                    v.push(acc.clone());
                    acc = &acc * p;
                }
                v
            })
            .collect()
    });
    let e = Enumeration {
        m,
        binom: pascal(r),
        powers,
        weights: normalized.as_deref(),
    };
    let mut sum = BigRational::zero();
    e.walk(0, n_us, r, &BigInt::one(), &BigRational::one(), &mut sum);
    let value = match e.weights {
        Some(_) => sum,
        None => sum / BigRational::from_integer(num_traits::pow(BigInt::from(n), r)),
    };
    ExactProbability::new(value)
}

/// Number of arrangements counted by the inclusion-exclusion sum, used for
/// the budget check.
fn inclusion_exclusion_terms(r: u64, n: u64, m: u64) -> u128 {
    let marked = (r / (m + 1)).min(n);
    (u128::from(marked) + 1) * (u128::from(r) + 1) * (u128::from(r) + 1)
}

/// `P(max <= m)` by inclusion-exclusion over the set of cells forced above
/// `m`:
///
/// ```text
/// n^r P = sum_j (-1)^j C(n, j) sum_s C(r, s) W_j(s) (n - j)^(r - s)
/// ```
///
/// where `W_j(s)` counts the ways to place `s` labelled balls in `j`
/// labelled cells with every cell above `m` (`W_j = s! [x^s] (e^x - e_m(x))^j`).
pub fn inclusion_exclusion_cdf(
    r: u64,
    n: u64,
    m: u64,
    budget: &OracleBudget,
) -> Result<ExactProbability> {
    if n == 0 {
        return Err(OccupancyError::InvalidProblem(
            "at least one cell is required".into(),
        ));
    }
    let terms = inclusion_exclusion_terms(r, n, m);
    if terms > budget.max_terms {
        return Err(OccupancyError::ResourceLimit {
            what: "inclusion-exclusion terms",
            needed: terms,
            budget: budget.max_terms,
        });
    }
    let ru = r as usize;
    let binom = pascal(ru);
    let marked = (r / (m + 1)).min(n) as usize;
    let n_big = BigInt::from(n);
    let mut total = BigInt::zero();
    // W_0(s) = [s == 0]
    let mut w: Vec<BigInt> = (0..=ru)
        .map(|s| {
            if s == 0 {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        })
        .collect();
    let mut choose_n_j = BigInt::one();
    for j in 0..=marked {
        if j > 0 {
            let mut next = vec![BigInt::zero(); ru + 1];
            for s in 0..=ru {
                for k in (m as usize + 1)..=s {
                    if !w[s - k].is_zero() {
                        next[s] += &binom[s][k] * &w[s - k];
                    }
                }
            }
            w = next;
            choose_n_j = choose_n_j * BigInt::from(n - j as u64 + 1) / BigInt::from(j as u64);
        }
        let free = &n_big - BigInt::from(j as u64);
        let mut count = BigInt::zero();
        for s in 0..=ru {
            if w[s].is_zero() {
                continue;
            }
            count += &binom[ru][s] * &w[s] * num_traits::pow(free.clone(), ru - s);
        }
        let term = &choose_n_j * count;
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    ExactProbability::from_parts(total, num_traits::pow(n_big, ru))
}

/// The same inclusion-exclusion sum evaluated term by term in `f64`.
///
/// Each term `C(n, j) Pr(cells 1..j all exceed m)` is computed accurately;
/// the alternating sum of those terms is what loses the digits.
pub fn inclusion_exclusion_f64(r: u64, n: u64, m: u64) -> f64 {
    let ru = r as usize;
    let mu = m as usize;
    let marked = (r / (m + 1)).min(n) as usize;
    // q[s] = Pr(s balls spread uniformly over j cells leave every one above m)
    let mut q: Vec<f64> = (0..=ru).map(|s| if s == 0 { 1.0 } else { 0.0 }).collect();
    let log_binom =
        |a: usize, k: usize| -> f64 { ln_factorial(a) - ln_factorial(k) - ln_factorial(a - k) };
    let mut total = 0.0;
    for j in 0..=marked {
        if j > 0 {
            let jf = j as f64;
            let mut next = vec![0.0; ru + 1];
            for s in 0..=ru {
                let mut acc = 0.0;
                for k in (mu + 1)..=s {
                    if q[s - k] == 0.0 {
                        continue;
                    }
                    // Binom(k; s, 1/j)
                    let lb = log_binom(s, k) - k as f64 * jf.ln()
                        + (s - k) as f64 * (1.0 - 1.0 / jf).ln();
                    let b = if j == 1 {
                        if k == s {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        lb.exp()
                    };
                    acc += b * q[s - k];
                }
                next[s] = acc;
            }
            q = next;
        }
        // Pr(cells 1..j all exceed m) = sum_s Binom(s; r, j/n) q[s]
        let frac = j as f64 / n as f64;
        let mut pr = 0.0;
        for (s, &qs) in q.iter().enumerate().take(ru + 1) {
            if qs == 0.0 {
                continue;
            }
            let b = if j as u64 == n {
                if s == ru {
                    1.0
                } else {
                    0.0
                }
            } else if j == 0 {
                if s == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (log_binom(ru, s) + s as f64 * frac.ln() + (ru - s) as f64 * (1.0 - frac).ln())
                    .exp()
            };
            pr += b * qs;
        }
        let term = (log_binom(n as usize, j)).exp() * pr;
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn ln_factorial(k: usize) -> f64 {
    statrs::function::factorial::ln_factorial(k as u64)
}

/// Convenience: exact value as `f64`.
pub fn to_f64(p: &ExactProbability) -> f64 {
    p.as_ratio().to_f64().unwrap_or(f64::NAN)
}
