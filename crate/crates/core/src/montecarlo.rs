//! Simulation of the maximum occupancy, for validating the exact engines.
//!
//! Replication `i` draws from its own ChaCha8 stream: the generator is
//! seeded with the user seed and switched to stream `i`. Replications can
//! therefore run in any order or in parallel and still produce the same
//! estimate for the same seed.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{OccupancyError, Result};

/// Default cap on `replications * balls`.
pub const DEFAULT_DRAW_BUDGET: u128 = 20_000_000_000;

/// Above this many cells, per-replication counts go in a hash map.
pub const DENSE_CELL_LIMIT: u64 = 10_000_000;

/// Empirical CDF of the maximum over a range of thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub balls: u64,
    pub cells: u64,
    pub m_values: Vec<u64>,
    pub empirical_cdf: Vec<f64>,
    /// Number of replications with maximum `<= m`, per threshold.
    pub hits: Vec<u64>,
    pub replications: u64,
    pub seed: u64,
    pub ci_level: f64,
    pub ci_half_widths: Vec<f64>,
    pub wall_time: Duration,
}

enum Counts {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u64>),
}

impl Counts {
    fn for_cells(cells: u64) -> Self {
        if cells > DENSE_CELL_LIMIT {
            Counts::Sparse(HashMap::new())
        } else {
            Counts::Dense(vec![0; cells as usize])
        }
    }

    fn drop_all<R: Rng + ?Sized>(&mut self, balls: u64, cells: u64, rng: &mut R) -> u64 {
        let cell = Uniform::new(0, cells).expect("at least one cell");
        match self {
            Counts::Dense(c) => {
                c.fill(0);
                let mut max = 0u32;
                for _ in 0..balls {
                    let slot = &mut c[cell.sample(rng) as usize];
                    *slot += 1;
                    max = max.max(*slot);
                }
                u64::from(max)
            }
            Counts::Sparse(c) => {
                c.clear();
                let mut max = 0u64;
                for _ in 0..balls {
                    let slot = c.entry(cell.sample(rng)).or_insert(0);
                    *slot += 1;
                    max = max.max(*slot);
                }
                max
            }
        }
    }
}

/// Drops `balls` balls uniformly into `cells` cells and returns the largest
/// count.
pub fn simulate_max<R: Rng + ?Sized>(balls: u64, cells: u64, rng: &mut R) -> u64 {
    assert!(cells >= 1, "at least one cell is required");
    Counts::for_cells(cells).drop_all(balls, cells, rng)
}

/// Generator for replication `index` under `seed`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn normal_quantile(level: f64) -> f64 {
    let std = Normal::standard();
    std.inverse_cdf(0.5 + level / 2.0)
}

/// Normal-approximation half-width `z sqrt(p (1 - p) / T)`.
pub fn ci_half_width(p: f64, replications: u64, level: f64) -> f64 {
    normal_quantile(level) * (p * (1.0 - p) / replications as f64).sqrt()
}

/// Smallest `T` whose normal-approximation half-width at `p` is at most
/// `half_width`.
pub fn replications_for_half_width(p: f64, half_width: f64, level: f64) -> u64 {
    let z = normal_quantile(level);
    (z * z * p * (1.0 - p) / (half_width * half_width)).ceil() as u64
}

pub fn estimate_cdf(
    balls: u64,
    cells: u64,
    m_min: u64,
    m_max: u64,
    replications: u64,
    seed: u64,
    ci_level: f64,
) -> Result<MonteCarloEstimate> {
    estimate_cdf_with_budget(
        balls,
        cells,
        m_min,
        m_max,
        replications,
        seed,
        ci_level,
        DEFAULT_DRAW_BUDGET,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_cdf_with_budget(
    balls: u64,
    cells: u64,
    m_min: u64,
    m_max: u64,
    replications: u64,
    seed: u64,
    ci_level: f64,
    draw_budget: u128,
) -> Result<MonteCarloEstimate> {
    if cells == 0 {
        return Err(OccupancyError::InvalidProblem(
            "at least one cell is required".into(),
        ));
    }
    if replications == 0 {
        return Err(OccupancyError::InvalidProblem(
            "at least one replication is required".into(),
        ));
    }
    if m_min > m_max {
        return Err(OccupancyError::InvalidProblem(format!(
            "empty threshold range {m_min}..={m_max}"
        )));
    }
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(OccupancyError::InvalidProblem(format!(
            "confidence level {ci_level} must lie strictly between 0 and 1"
        )));
    }
    let draws = u128::from(replications) * u128::from(balls);
    if draws > draw_budget {
        return Err(OccupancyError::ResourceLimit {
            what: "simulated ball draws",
            needed: draws,
            budget: draw_budget,
        });
    }

    let start = Instant::now();
    let maxima: Vec<u64> = (0..replications)
        .into_par_iter()
        .map_init(
            || Counts::for_cells(cells),
            |counts, i| counts.drop_all(balls, cells, &mut replication_rng(seed, i)),
        )
        .collect();

    let m_values: Vec<u64> = (m_min..=m_max).collect();
    let hits: Vec<u64> = m_values
        .iter()
        .map(|&m| maxima.iter().filter(|&&x| x <= m).count() as u64)
        .collect();
    let t = replications as f64;
    let empirical_cdf: Vec<f64> = hits.iter().map(|&h| h as f64 / t).collect();
    let z = normal_quantile(ci_level);
    let ci_half_widths = empirical_cdf
        .iter()
        .map(|&p| z * (p * (1.0 - p) / t).sqrt())
        .collect();
    Ok(MonteCarloEstimate {
        balls,
        cells,
        m_values,
        empirical_cdf,
        hits,
        replications,
        seed,
        ci_level,
        ci_half_widths,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_drops() {
        let mut rng = replication_rng(7, 0);
        assert_eq!(simulate_max(0, 5, &mut rng), 0);
        assert_eq!(simulate_max(4, 1, &mut rng), 4);
    }

    #[test]
    fn bounds_on_maximum() {
        let mut rng = replication_rng(1, 0);
        for _ in 0..200 {
            let v = simulate_max(10, 4, &mut rng);
            assert!((3..=10).contains(&v));
        }
    }

    #[test]
    fn sparse_counts_agree_with_dense() {
        let mut a = Counts::Dense(vec![0; 50]);
        let mut b = Counts::Sparse(HashMap::new());
        for i in 0..20 {
            let x = a.drop_all(80, 50, &mut replication_rng(3, i));
            let y = b.drop_all(80, 50, &mut replication_rng(3, i));
            assert_eq!(x, y);
        }
    }

    #[test]
    fn certain_threshold_is_exact() {
        let e = estimate_cdf(5, 2, 5, 5, 100, 11, 0.95).unwrap();
        assert_eq!(e.empirical_cdf, vec![1.0]);
        assert_eq!(e.ci_half_widths, vec![0.0]);
    }

    #[test]
    fn quantile() {
        assert!((normal_quantile(0.95) - 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn budget_and_validation() {
        let err = estimate_cdf_with_budget(100, 10, 1, 2, 1000, 0, 0.95, 1000).unwrap_err();
        assert!(matches!(err, OccupancyError::ResourceLimit { .. }));
        assert!(estimate_cdf(10, 0, 1, 2, 10, 0, 0.95).is_err());
        assert!(estimate_cdf(10, 2, 1, 2, 0, 0, 0.95).is_err());
        assert!(estimate_cdf(10, 2, 3, 2, 10, 0, 0.95).is_err());
        assert!(estimate_cdf(10, 2, 1, 2, 10, 0, 1.0).is_err());
    }
}
