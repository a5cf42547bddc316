//! Cross-engine agreement report on a fixed grid.

use occupancy_core::oracle::{enumerate_cdf, inclusion_exclusion_cdf, OracleBudget};
use occupancy_core::{
    cdf_rational, cdf_scaled, cdf_weighted, OccupancyProblem, Result, WeightVector,
};

pub const SCALED_TOLERANCE: f64 = 1e-12;
pub const WEIGHTED_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub points: usize,
    /// Points where exact engines disagreed.
    pub mismatches: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.max_error <= self.tolerance
    }
}

/// Exact engines against both oracles, and the float engine against them,
/// for r <= 8, n <= 5, m <= r.
pub fn oracle_grid() -> Result<Check> {
    let budget = OracleBudget::default();
    let mut check = Check {
        name: "oracles (r<=8, n<=5, m<=r)",
        points: 0,
        mismatches: 0,
        max_error: 0.0,
        tolerance: SCALED_TOLERANCE,
    };
    for r in 0..=8 {
        for n in 1..=5 {
            for m in 0..=r {
                let problem = OccupancyProblem::new(r, n, m)?;
                let rational = cdf_rational(&problem)?;
                let enumerated = enumerate_cdf(r, n, m, None, &budget)?;
                let ie = inclusion_exclusion_cdf(r, n, m, &budget)?;
                if rational != enumerated || enumerated != ie {
                    check.mismatches += 1;
                }
                let err = (cdf_scaled(&problem)?.value - rational.to_f64()).abs();
                check.max_error = check.max_error.max(err);
                check.points += 1;
            }
        }
    }
    Ok(check)
}

/// Scaled against rational for r in {50, 200, 500}, n in {2, 10, 100},
/// m in 1..=20.
pub fn cross_engine_grid() -> Result<Check> {
    let mut check = Check {
        name: "scaled vs rational (r in {50,200,500}, n in {2,10,100}, m<=20)",
        points: 0,
        mismatches: 0,
        max_error: 0.0,
        tolerance: SCALED_TOLERANCE,
    };
    for r in [50, 200, 500] {
        for n in [2, 10, 100] {
            for m in 1..=20 {
                let problem = OccupancyProblem::new(r, n, m)?;
                let err = (cdf_scaled(&problem)?.value - cdf_rational(&problem)?.to_f64()).abs();
                check.max_error = check.max_error.max(err);
                check.points += 1;
            }
        }
    }
    Ok(check)
}

/// Uniform weights against the equal-cell engine for r <= 200, n <= 50,
/// m <= 10.
pub fn weighted_grid() -> Result<Check> {
    let mut check = Check {
        name: "uniform weighted vs scaled (r<=200, n<=50, m<=10)",
        points: 0,
        mismatches: 0,
        max_error: 0.0,
        tolerance: WEIGHTED_TOLERANCE,
    };
    for n in [1u64, 2, 5, 13, 50] {
        let weights = WeightVector::uniform(n as usize)?;
        for r in [0u64, 3, 20, 77, 200] {
            for m in 0..=10 {
                let a = cdf_weighted(r, &weights, m)?.value;
                let b = cdf_scaled(&OccupancyProblem::new(r, n, m)?)?.value;
                check.max_error = check.max_error.max((a - b).abs());
                check.points += 1;
            }
        }
    }
    Ok(check)
}

pub fn all_checks() -> Result<Vec<Check>> {
    Ok(vec![oracle_grid()?, cross_engine_grid()?, weighted_grid()?])
}

pub fn render(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "{}  {}: {} points, {} exact mismatches, max error {:.3e} (tolerance {:.0e})\n",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.points,
            c.mismatches,
            c.max_error,
            c.tolerance
        ));
    }
    out
}
