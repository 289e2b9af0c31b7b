//! Brute-force checks for the closed-form frontier.
//!
//! Nothing here calls into the frontier formulas for the quantity being
//! checked: minimum variance comes from exhaustive enumeration of the
//! long-only weight simplex, and tangency is verified with a central
//! difference of the risk curve.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frontier::{tangency, FrontierConstants};
use crate::linalg::Matrix;

pub const MAX_GRID_ASSETS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub step: f64,
    pub return_band: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            step: 0.005,
            return_band: 0.0025,
        }
    }
}

impl GridSpec {
    /// Number of grid steps that make up a whole unit of weight.
    fn units(&self) -> Result<usize> {
        if !(self.step > 0.0 && self.step <= 0.1) {
            return Err(Error::Grid(format!("step {} outside (0, 0.1]", self.step)));
        }
        let units = (1.0 / self.step).round();
        if ((units * self.step) - 1.0).abs() > 1e-9 {
            return Err(Error::Grid(format!("step {} does not divide 1", self.step)));
        }
        Ok(units as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub weights: Vec<f64>,
    pub variance: f64,
}

fn quad(cov: &Matrix, w: &[f64]) -> f64 {
    let n = w.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += w[i] * cov[(i, j)] * w[j];
        }
    }
    s
}

/// Calls `visit` for every composition of `remaining` into `counts[k..]`,
/// in lexicographic order.
fn compositions(counts: &mut [usize], k: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if k + 1 == counts.len() {
        counts[k] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[k] = c;
        compositions(counts, k + 1, remaining - c, visit);
    }
}

/// Lexicographic enumeration of the simplex grid, split on the first
/// coordinate for parallelism. Ties go to the lexicographically first point,
/// whatever the split.
fn search(cov: &Matrix, grid: GridSpec, accept: impl Fn(&[f64]) -> bool + Sync) -> Result<Option<GridPoint>> {
    let n = cov.dim();
    if n == 0 || n > MAX_GRID_ASSETS {
        return Err(Error::Grid(format!("{n} assets; enumeration supports 1..={MAX_GRID_ASSETS}")));
    }
    let units = grid.units()?;
    let step = 1.0 / units as f64;

    let best_per_head: Vec<Option<GridPoint>> = (0..=units)
        .into_par_iter()
        .map(|head| {
            let mut best: Option<GridPoint> = None;
            let mut counts = vec![0usize; n];
            counts[0] = head;
            let mut w = vec![0.0; n];
            let mut visit = |c: &[usize]| {
                for (wi, ci) in w.iter_mut().zip(c) {
                    *wi = *ci as f64 * step;
                }
                if !accept(&w) {
                    return;
                }
                let v = quad(cov, &w);
                if !best.as_ref().is_some_and(|b| v >= b.variance) {
                    best = Some(GridPoint {
                        weights: w.clone(),
                        variance: v,
                    });
                }
            };
            if n == 1 {
                if head == units {
                    visit(&counts);
                }
            } else {
                compositions(&mut counts, 1, units - head, &mut visit);
            }
            best
        })
        .collect();

    Ok(best_per_head.into_iter().flatten().fold(None, |acc: Option<GridPoint>, p| match acc {
        Some(a) if a.variance <= p.variance => Some(a),
        _ => Some(p),
    }))
}

/// Minimum of `wᵀAw` over nonnegative grid weights summing to one.
pub fn grid_min_variance(cov: &Matrix, grid: GridSpec) -> Result<GridPoint> {
    search(cov, grid, |_| true)?.ok_or_else(|| Error::Grid("empty grid".into()))
}

/// Minimum of `wᵀAw` over grid weights whose expected return lies within
/// `grid.return_band` of `target`.
pub fn grid_min_variance_at_return(cov: &Matrix, expected_returns: &[f64], target: f64, grid: GridSpec) -> Result<GridPoint> {
    if expected_returns.len() != cov.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov.dim(),
            actual: expected_returns.len(),
        });
    }
    let band = grid.return_band;
    search(cov, grid, |w| {
        let r: f64 = w.iter().zip(expected_returns).map(|(a, b)| a * b).sum();
        (r - target).abs() <= band
    })?
    .ok_or_else(|| Error::Grid(format!("no grid portfolio within {band} of target return {target}")))
}

/// Relative mismatch between the frontier's slope `d risk / d return` at the
/// tangency return and the reciprocal of the capital-market-line slope,
/// using a central difference with step `eps`.
pub fn fd_tangency_check(fc: &FrontierConstants, rf: f64, eps: f64) -> Result<f64> {
    if !(1e-8..=1e-4).contains(&eps) {
        return Err(Error::Grid(format!("eps {eps} outside [1e-8, 1e-4]")));
    }
    let t = tangency(fc, rf)?;
    let risk = |x: f64| ((fc.alpha * x * x - 2.0 * fc.b * x + fc.gamma) / fc.delta).sqrt();
    let derivative = (risk(t.r_t + eps) - risk(t.r_t - eps)) / (2.0 * eps);
    let expected = 1.0 / t.slope;
    Ok((derivative - expected).abs() / expected.abs())
}
