//! Maximum occupancy with unequal cell probabilities.
//!
//! With cell probabilities `p_i`, the probability that no cell receives more
//! than `m` of `r` balls is `r! [x^r] prod_i e_m(p_i x)`. The product is
//! built one factor at a time and truncated at degree `r`. Its coefficients
//! span hundreds of thousands of decimal orders (`[x^r]` is of order
//! `1/r!`), so they are kept in a per-degree scaled form, see
//! [`ScaledPolynomial`].

use std::path::Path;
use std::time::Instant;

use crate::error::{OccupancyError, Result};
use crate::problem::OccupancyProblem;
use crate::recurrence::{Method, ProbabilityResult, Route};
use crate::sweep::{live_range, CellFold};

/// Allowed deviation of the weight total from one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Cell probabilities `p_1..p_n`: nonnegative and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

// Neumaier-compensated sum; long vectors of 1/n otherwise drift past the
// tolerance
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(OccupancyError::InvalidWeights("no cells given".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(OccupancyError::InvalidWeights(format!(
                "weight {} is {w}, expected a finite nonnegative number",
                i + 1
            )));
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(OccupancyError::InvalidWeights(format!(
                "weights sum to {total:.17}, not 1"
            )));
        }
        Ok(Self(weights))
    }

    /// `n` cells of probability `1/n` each.
    pub fn uniform(cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(OccupancyError::InvalidWeights("no cells given".into()));
        }
        Self::new(vec![1.0 / cells as f64; cells])
    }

    /// Parses one probability per line. Blank lines and anything after `#`
    /// are ignored; values may use decimal or scientific notation.
    pub fn parse(text: &str) -> Result<Self> {
        let mut weights = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let w: f64 = content.parse().map_err(|_| {
                OccupancyError::InvalidWeights(format!(
                    "line {}: cannot parse {content:?} as a probability",
                    lineno + 1
                ))
            })?;
            weights.push(w);
        }
        Self::new(weights)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            OccupancyError::InvalidWeights(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Partial product `prod_{i<=k} e_m(p_i x)` truncated at degree `r`.
///
/// Coefficient `s` of the product is `coefficients[s] * mass^s / s!`, where
/// `mass` is the total probability of the cells folded in so far. Under this
/// scaling `coefficients[s]` is the probability that `s` balls confined to
/// those cells (in proportion to their weights) leave each with at most
/// `m`, so every stored value lies in `[0, 1]` and is nonincreasing in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPolynomial {
    coefficients: Vec<f64>,
    mass: f64,
    degree: usize,
    folded: usize,
}

impl ScaledPolynomial {
    /// The empty product, truncated at `degree`.
    pub fn new(degree: usize) -> Self {
        Self {
            coefficients: (0..=degree)
                .map(|s| if s == 0 { 1.0 } else { 0.0 })
                .collect(),
            mass: 0.0,
            degree,
            folded: 0,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Number of nonzero-probability factors multiplied in.
    pub fn factors(&self) -> usize {
        self.folded
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

fn fold_all(balls: usize, weights: &WeightVector, threshold: usize) -> ScaledPolynomial {
    let mut poly = ScaledPolynomial::new(balls);
    let m = threshold.min(balls);
    let mut fold = CellFold::<f64>::new(m);
    // zero-probability cells contribute the factor 1
    let live: Vec<f64> = weights
        .as_slice()
        .iter()
        .copied()
        .filter(|&p| p > 0.0)
        .collect();
    let total = live.len() as u64;
    for (k, &p) in live.iter().enumerate() {
        if poly.folded == 0 {
            poly.coefficients = fold.first_cell(poly.degree() + 1);
        } else {
            let prev = poly.mass;
            let next = prev + p;
            let share = p / next;
            let log_stay = if share < 0.5 {
                (-share).ln_1p()
            } else {
                (prev / next).ln()
            };
            let (lo, hi) = live_range(balls, m, k as u64 + 1, total, false);
            fold.apply(&mut poly.coefficients, log_stay, p / prev, lo, hi);
        }
        poly.mass += p;
        poly.folded += 1;
    }
    poly
}

/// `P(max <= threshold)` for `balls` independent draws over cells with
/// probabilities `weights`.
pub fn cdf_weighted(
    balls: u64,
    weights: &WeightVector,
    threshold: u64,
) -> Result<ProbabilityResult> {
    let start = Instant::now();
    let problem = OccupancyProblem::new(balls, weights.len() as u64, threshold)?;
    let nonzero = weights.as_slice().iter().filter(|&&p| p > 0.0).count() as u128;
    let (value, route) = if balls == 0 || threshold >= balls {
        (1.0, Route::Shortcut)
    } else if nonzero * u128::from(threshold) < u128::from(balls) {
        (0.0, Route::Shortcut)
    } else {
        let r = usize::try_from(balls)
            .map_err(|_| OccupancyError::Overflow("ball count exceeds usize".into()))?;
        let poly = fold_all(r, weights, threshold as usize);
        let v = poly.coefficients[r];
        if !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(OccupancyError::NumericInstability {
                step: balls,
                detail: format!("weighted product produced {v}"),
            });
        }
        (v.clamp(0.0, 1.0), Route::Direct)
    };
    Ok(ProbabilityResult {
        value,
        method: Method::Weighted,
        route,
        problem,
        error_estimate: None,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wv(w: &[f64]) -> WeightVector {
        WeightVector::new(w.to_vec()).unwrap()
    }

    #[test]
    fn single_cell() {
        assert_eq!(cdf_weighted(5, &wv(&[1.0]), 5).unwrap().value, 1.0);
        assert_eq!(cdf_weighted(5, &wv(&[1.0]), 4).unwrap().value, 0.0);
    }

    #[test]
    fn two_cells() {
        let v = cdf_weighted(2, &wv(&[0.5, 0.5]), 1).unwrap().value;
        assert!((v - 0.5).abs() < 1e-15);
        let v = cdf_weighted(2, &wv(&[0.9, 0.1]), 1).unwrap().value;
        assert!((v - 0.18).abs() < 1e-15);
    }

    #[test]
    fn zero_cells_are_dropped() {
        let a = cdf_weighted(7, &wv(&[0.2, 0.3, 0.5]), 3).unwrap().value;
        let b = cdf_weighted(7, &wv(&[0.0, 0.2, 0.0, 0.3, 0.5, 0.0]), 3)
            .unwrap()
            .value;
        assert_eq!(a, b);
    }

    #[test]
    fn only_one_live_cell() {
        // pigeonhole over the nonzero cells
        assert_eq!(
            cdf_weighted(3, &wv(&[0.0, 1.0, 0.0]), 2).unwrap().value,
            0.0
        );
        assert_eq!(
            cdf_weighted(2, &wv(&[0.0, 1.0, 0.0]), 2).unwrap().value,
            1.0
        );
    }

    #[test]
    fn scaled_polynomial_invariants() {
        let poly = fold_all(40, &wv(&[0.1, 0.2, 0.3, 0.4]), 12);
        assert_eq!(poly.factors(), 4);
        assert!((poly.mass() - 1.0).abs() < 1e-15);
        let c = poly.coefficients();
        assert_eq!(c.len(), 41);
        assert!(c.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn validation() {
        assert!(WeightVector::new(vec![]).is_err());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.5, -0.5]).is_err());
        assert!(WeightVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(WeightVector::uniform(9000).is_ok());
        assert!(WeightVector::uniform(0).is_err());
    }

    #[test]
    fn parse_file_format() {
        let w = WeightVector::parse("# cells\n0.25\n\n2.5e-1 # second\n  0.5\n").unwrap();
        assert_eq!(w.as_slice(), &[0.25, 0.25, 0.5]);
        let err = WeightVector::parse("0.5\nhalf\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
