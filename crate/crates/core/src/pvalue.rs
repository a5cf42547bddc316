//! P-values for an observed maximum and the tables built from them.

use std::time::Instant;

use crate::error::{OccupancyError, Result};
use crate::problem::OccupancyProblem;
use crate::recurrence::{
    cdf_rational, cdf_scaled, cdf_thresholds, Method, ProbabilityResult, Route, ScaledConfig,
};

/// One line of a [`PValueTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub m: u64,
    /// `P(r, n, m)`, the probability that no cell exceeds `m`.
    pub cdf: f64,
    /// Probability that the maximum is at least `m`.
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PValueTable {
    pub balls: u64,
    pub cells: u64,
    pub method: Method,
    pub rows: Vec<TableRow>,
}

impl PValueTable {
    /// Probability that the maximum equals `rows[i].m`, for every row.
    pub fn masses(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.cdf - (1.0 - row.p_value))
            .collect()
    }
}

/// Probability that the maximum of `balls` uniform draws over `cells` is at
/// least `observed_max`: `1 - P(r, n, observed_max - 1)`.
pub fn p_value(balls: u64, cells: u64, observed_max: u64) -> Result<ProbabilityResult> {
    let start = Instant::now();
    let problem = OccupancyProblem::new(balls, cells, observed_max)?;
    if observed_max == 0 {
        return Ok(ProbabilityResult {
            value: 1.0,
            method: Method::Scaled,
            route: Route::Shortcut,
            problem,
            error_estimate: Some(0.0),
            wall_time: start.elapsed(),
        });
    }
    let below = cdf_scaled(&problem.with_threshold(observed_max - 1)?)?;
    Ok(ProbabilityResult {
        value: 1.0 - below.value,
        method: Method::Scaled,
        route: below.route,
        problem,
        error_estimate: below.error_estimate,
        wall_time: start.elapsed(),
    })
}

/// Rows `m_min..=m_max` of CDF and P-value.
///
/// With [`Method::Scaled`] all thresholds, including `m_min - 1` for the
/// first P-value, advance together in one pass over the balls.
pub fn build_table(
    balls: u64,
    cells: u64,
    m_min: u64,
    m_max: u64,
    method: Method,
) -> Result<PValueTable> {
    if m_min > m_max {
        return Err(OccupancyError::InvalidProblem(format!(
            "empty threshold range {m_min}..={m_max}"
        )));
    }
    let first = m_min.saturating_sub(1);
    let thresholds: Vec<u64> = (first..=m_max).collect();
    let cdfs: Vec<f64> = match method {
        Method::Scaled => cdf_thresholds(balls, cells, &thresholds, &ScaledConfig::default())?
            .into_iter()
            .map(|r| r.value)
            .collect(),
        Method::Rational => thresholds
            .iter()
            .map(|&m| Ok(cdf_rational(&OccupancyProblem::new(balls, cells, m)?)?.to_f64()))
            .collect::<Result<_>>()?,
        other => {
            return Err(OccupancyError::InvalidProblem(format!(
                "tables are built with the scaled or rational engine, not {other}"
            )))
        }
    };
    let offset = usize::from(m_min > 0);
    let rows = (m_min..=m_max)
        .enumerate()
        .map(|(i, m)| TableRow {
            m,
            cdf: cdfs[i + offset],
            p_value: if m == 0 {
                1.0
            } else {
                1.0 - cdfs[i + offset - 1]
            },
        })
        .collect();
    Ok(PValueTable {
        balls,
        cells,
        method,
        rows,
    })
}
