//! Closed-form mean-variance frontier.
//!
//! With `A⁻¹` the inverse covariance matrix and `e` the expected-return
//! vector, the frontier is summarized by
//!
//! ```text
//! h = 1ᵀA⁻¹    g = eᵀA⁻¹    alpha = h·1    b = g·1    gamma = g·e
//! delta = alpha*gamma - b²
//! ```
//!
//! and the minimum risk for a required return `x` is
//! `sqrt((alpha x² - 2 b x + gamma) / delta)`. Short sales are allowed, so
//! weights may be negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::CovarianceModel;

/// `delta` at or below this fraction of `alpha * gamma` is treated as zero.
pub const DEGENERATE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierConstants {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub alpha: f64,
    pub b: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl FrontierConstants {
    pub fn is_degenerate(&self) -> bool {
        self.delta <= DEGENERATE_REL_TOL * (self.alpha * self.gamma).abs()
    }

    fn require_spread(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateFrontier { delta: self.delta })
        } else {
            Ok(())
        }
    }

    /// Return of the global minimum-variance portfolio, `b / alpha`.
    pub fn gmv_return(&self) -> f64 {
        self.b / self.alpha
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencySolution {
    pub r_t: f64,
    pub sigma_rt: f64,
    pub slope: f64,
    pub rf: f64,
}

/// Multipliers and weights for a required return, before evaluation
/// against the covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetWeights {
    pub target_return: f64,
    pub lambda: f64,
    pub theta: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSolution {
    pub target_return: f64,
    pub lambda: f64,
    pub theta: f64,
    pub weights: Vec<f64>,
    pub port_return: f64,
    pub variance: f64,
    pub risk: f64,
    pub sharpe: f64,
    /// Per-asset `weight * expected return`; sums to `port_return`.
    pub contributions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Viability {
    Viable,
    NonViable(String),
}

impl Viability {
    pub fn is_viable(&self) -> bool {
        matches!(self, Viability::Viable)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

pub fn frontier_constants(cov: &CovarianceModel, expected_returns: &[f64]) -> Result<FrontierConstants> {
    check_len(cov.dim(), expected_returns.len())?;
    let inv = cov.inverse();
    let h = inv.vec_mul(&vec![1.0; cov.dim()])?;
    let g = inv.vec_mul(expected_returns)?;
    let alpha: f64 = h.iter().sum();
    let b: f64 = g.iter().sum();
    let gamma = dot(expected_returns, &g);
    let delta = alpha * gamma - b * b;
    Ok(FrontierConstants {
        h,
        g,
        alpha,
        b,
        gamma,
        delta,
    })
}

/// Global minimum-variance portfolio: weights `h / alpha`, target return
/// `b / alpha`, variance `1 / alpha`. `port_return` is the realized
/// `w·e`, equal to the target up to rounding.
pub fn gmv_portfolio(
    fc: &FrontierConstants,
    cov: &CovarianceModel,
    expected_returns: &[f64],
    rf: f64,
) -> Result<PortfolioSolution> {
    check_len(cov.dim(), fc.h.len())?;
    check_len(cov.dim(), expected_returns.len())?;
    if !(fc.alpha > 0.0) {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: fc.alpha,
        });
    }
    let target_return = fc.gmv_return();
    let variance = 1.0 / fc.alpha;
    let risk = variance.sqrt();
    let weights: Vec<f64> = fc.h.iter().map(|h| h / fc.alpha).collect();
    let port_return = portfolio_return(&weights, expected_returns)?;
    let contributions = weights.iter().zip(expected_returns).map(|(w, e)| w * e).collect();
    Ok(PortfolioSolution {
        target_return,
        lambda: 1.0 / fc.alpha,
        theta: 0.0,
        weights,
        port_return,
        variance,
        risk,
        sharpe: portfolio_sharpe(target_return, rf, risk)?,
        contributions,
    })
}

/// `lambda = (gamma - b x) / delta`, `theta = (alpha x - b) / delta`,
/// `w = lambda h + theta g`.
pub fn weights_for_target(fc: &FrontierConstants, target: f64) -> Result<TargetWeights> {
    fc.require_spread()?;
    let lambda = (fc.gamma - fc.b * target) / fc.delta;
    let theta = (fc.alpha * target - fc.b) / fc.delta;
    let weights = fc
        .h
        .iter()
        .zip(&fc.g)
        .map(|(h, g)| lambda * h + theta * g)
        .collect();
    Ok(TargetWeights {
        target_return: target,
        lambda,
        theta,
        weights,
    })
}

/// Evaluates the frontier portfolio for `target` against the covariance
/// matrix and expected returns.
pub fn solve_for_target(
    fc: &FrontierConstants,
    cov: &CovarianceModel,
    expected_returns: &[f64],
    target: f64,
    rf: f64,
) -> Result<PortfolioSolution> {
    let tw = weights_for_target(fc, target)?;
    let port_return = portfolio_return(&tw.weights, expected_returns)?;
    let (variance, risk) = portfolio_variance(&tw.weights, cov)?;
    let contributions = tw.weights.iter().zip(expected_returns).map(|(w, e)| w * e).collect();
    Ok(PortfolioSolution {
        target_return: target,
        lambda: tw.lambda,
        theta: tw.theta,
        port_return,
        variance,
        risk,
        sharpe: portfolio_sharpe(port_return, rf, risk)?,
        weights: tw.weights,
        contributions,
    })
}

pub fn portfolio_return(weights: &[f64], expected_returns: &[f64]) -> Result<f64> {
    check_len(weights.len(), expected_returns.len())?;
    Ok(dot(weights, expected_returns))
}

/// `(wᵀAw, sqrt(wᵀAw))`.
pub fn portfolio_variance(weights: &[f64], cov: &CovarianceModel) -> Result<(f64, f64)> {
    check_len(cov.dim(), weights.len())?;
    // Rounding can leave a tiny negative value for a PD matrix.
    let variance = cov.matrix().quadratic_form(weights)?.max(0.0);
    Ok((variance, variance.sqrt()))
}

pub fn portfolio_sharpe(port_return: f64, rf: f64, risk: f64) -> Result<f64> {
    if risk == 0.0 {
        return Err(Error::ZeroRisk);
    }
    Ok((port_return - rf) / risk)
}

/// Point where the line from `(0, rf)` touches the frontier:
/// `r_t = (gamma - b rf) / (b - alpha rf)`.
pub fn tangency(fc: &FrontierConstants, rf: f64) -> Result<TangencySolution> {
    fc.require_spread()?;
    let denominator = fc.b - fc.alpha * rf;
    if denominator.abs() <= 1e-12 * fc.b.abs().max((fc.alpha * rf).abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::TangencyUndefined { denominator });
    }
    let r_t = (fc.gamma - fc.b * rf) / denominator;
    let sigma_rt = frontier_risk(fc, r_t)?;
    Ok(TangencySolution {
        r_t,
        sigma_rt,
        slope: (r_t - rf) / sigma_rt,
        rf,
    })
}

/// Minimum attainable risk for a required return.
///
/// Evaluates `(αx² − 2Bx + γ)/δ` in its vertex form `1/α + α(x − B/α)²/δ`,
/// which avoids cancellation near the minimum and is exactly `sqrt(1/α)` at
/// `x = B/α`.
pub fn frontier_risk(fc: &FrontierConstants, target: f64) -> Result<f64> {
    fc.require_spread()?;
    let d = target - fc.gmv_return();
    let radicand = 1.0 / fc.alpha + fc.alpha * d * d / fc.delta;
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand { value: radicand });
    }
    Ok(radicand.sqrt())
}

pub fn cml_value(rf: f64, slope: f64, risk: f64) -> f64 {
    rf + risk * slope
}

/// A window is not viable when every expected return is negative.
pub fn viability_check(expected_returns: &[f64]) -> Viability {
    if !expected_returns.is_empty() && expected_returns.iter().all(|e| *e < 0.0) {
        Viability::NonViable("all expected returns are negative".into())
    } else {
        Viability::Viable
    }
}
