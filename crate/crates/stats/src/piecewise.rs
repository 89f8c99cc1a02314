//! Continuous two-segment ("hinge") least squares with a grid-searched
//! breakpoint.

use crate::error::{Result, StatsError};
use crate::linalg::ols;

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFit {
    pub breakpoint: f64,
    pub left_slope: f64,
    pub right_slope: f64,
    pub left_intercept: f64,
    pub right_intercept: f64,
    pub rss: f64,
    /// RSS of the best single straight line on the same data.
    pub line_rss: f64,
}

impl PiecewiseFit {
    pub fn predict(&self, x: f64) -> f64 {
        if x <= self.breakpoint {
            self.left_intercept + self.left_slope * x
        } else {
            self.right_intercept + self.right_slope * x
        }
    }
}

/// Candidates whose RSS differs by less than this (relative to the total sum
/// of squares) count as tied; ties go to the earlier breakpoint.
const TIE_TOLERANCE: f64 = 1e-12;

pub fn piecewise_fit(xs: &[f64], ys: &[f64]) -> Result<PiecewiseFit> {
    if xs.len() != ys.len() {
        return Err(StatsError::Contract(format!(
            "x has {} values, y has {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::Contract("inputs must be finite".into()));
    }
    let mut distinct = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if xs.len() < 4 || distinct.len() < 3 {
        return Err(StatsError::Contract(format!(
            "need at least 4 points over 3 distinct x values (got {} points, {} distinct)",
            xs.len(),
            distinct.len()
        )));
    }

    let ones = vec![1.0; xs.len()];
    let (_, line_rss) = ols(&[&ones, xs], ys)
        .ok_or_else(|| StatsError::Numerical("straight-line fit is singular".into()))?;
    let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
    let tss: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let tie = TIE_TOLERANCE * tss.max(f64::MIN_POSITIVE);

    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for &c in &distinct[1..distinct.len() - 1] {
        let hinge: Vec<f64> = xs.iter().map(|x| (x - c).max(0.0)).collect();
        let Some((beta, rss)) = ols(&[&ones, xs, &hinge], ys) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((_, _, best_rss)) => rss < best_rss - tie,
        };
        if better {
            best = Some((c, beta, rss));
        }
    }
    let (c, beta, rss) =
        best.ok_or_else(|| StatsError::Numerical("no admissible breakpoint".into()))?;
    let left_slope = beta[1];
    let right_slope = beta[1] + beta[2];
    Ok(PiecewiseFit {
        breakpoint: c,
        left_slope,
        right_slope,
        left_intercept: beta[0],
        right_intercept: beta[0] - beta[2] * c,
        rss: rss.min(line_rss),
        line_rss,
    })
}
