use std::fmt;

use crate::error::{OccupancyError, Result};

/// Largest threshold accepted by [`OccupancyProblem::new`].
pub const MAX_THRESHOLD: u64 = 1_000_000;
/// Largest ball count accepted by [`OccupancyProblem::new`].
pub const MAX_BALLS: u64 = 100_000_000;

/// One query: `balls` dropped uniformly into `cells`, asking whether every
/// cell holds at most `threshold` of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OccupancyProblem {
    balls: u64,
    cells: u64,
    threshold: u64,
}

/// Which shortcut, if any, settles a problem without iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Trivial {
    /// No balls, or the threshold is at least the ball count.
    Certain,
    /// `cells * threshold < balls`: some cell must overflow.
    Impossible,
}

impl OccupancyProblem {
    pub fn new(balls: u64, cells: u64, threshold: u64) -> Result<Self> {
        if cells == 0 {
            return Err(OccupancyError::InvalidProblem(
                "at least one cell is required".into(),
            ));
        }
        if balls > MAX_BALLS {
            return Err(OccupancyError::InvalidProblem(format!(
                "ball count {balls} exceeds the supported maximum {MAX_BALLS}"
            )));
        }
        if threshold > MAX_THRESHOLD {
            return Err(OccupancyError::InvalidProblem(format!(
                "threshold {threshold} exceeds the supported maximum {MAX_THRESHOLD}"
            )));
        }
        // The recurrence weights use (cells + 1) * threshold and
        // cells^threshold-sized ratios; make sure the former fits.
        cells
            .checked_add(1)
            .and_then(|c| c.checked_mul(threshold.max(1)))
            .ok_or_else(|| {
                OccupancyError::Overflow(format!(
                    "(cells + 1) * threshold overflows for cells={cells}, threshold={threshold}"
                ))
            })?;
        Ok(Self {
            balls,
            cells,
            threshold,
        })
    }

    pub fn balls(&self) -> u64 {
        self.balls
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// Same cells and threshold, different ball count.
    pub fn with_balls(&self, balls: u64) -> Result<Self> {
        Self::new(balls, self.cells, self.threshold)
    }

    /// Same balls and cells, different threshold.
    pub fn with_threshold(&self, threshold: u64) -> Result<Self> {
        Self::new(self.balls, self.cells, threshold)
    }

    pub(crate) fn trivial(&self) -> Option<Trivial> {
        if self.balls == 0 || self.threshold >= self.balls {
            Some(Trivial::Certain)
        } else if u128::from(self.cells) * u128::from(self.threshold) < u128::from(self.balls) {
            Some(Trivial::Impossible)
        } else {
            None
        }
    }
}

impl fmt::Display for OccupancyProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(r={}, n={}, m={})",
            self.balls, self.cells, self.threshold
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_cells() {
        assert!(matches!(
            OccupancyProblem::new(3, 0, 1),
            Err(OccupancyError::InvalidProblem(_))
        ));
    }

    #[test]
    fn rejects_caps() {
        assert!(OccupancyProblem::new(MAX_BALLS + 1, 2, 1).is_err());
        assert!(OccupancyProblem::new(10, 2, MAX_THRESHOLD + 1).is_err());
        assert!(OccupancyProblem::new(MAX_BALLS, 2, MAX_THRESHOLD).is_ok());
    }

    #[test]
    fn rejects_overflowing_cells() {
        assert!(matches!(
            OccupancyProblem::new(10, u64::MAX, 2),
            Err(OccupancyError::Overflow(_))
        ));
        assert!(matches!(
            OccupancyProblem::new(10, u64::MAX / 4, 8),
            Err(OccupancyError::Overflow(_))
        ));
    }

    #[test]
    fn shortcuts() {
        let t = |r, n, m| OccupancyProblem::new(r, n, m).unwrap().trivial();
        assert_eq!(t(0, 4, 0), Some(Trivial::Certain));
        assert_eq!(t(5, 7, 5), Some(Trivial::Certain));
        assert_eq!(t(7, 3, 2), Some(Trivial::Impossible));
        assert_eq!(t(6, 3, 2), None);
        assert_eq!(t(1, 3, 0), Some(Trivial::Impossible));
    }
}
