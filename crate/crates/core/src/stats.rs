//! Per-asset annualized statistics, CAPM expected returns and the
//! annualized covariance matrix with its certified inverse.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{invert_spd, Matrix};

pub const DEFAULT_TRADING_DAYS: u32 = 252;

/// Daily simple returns of one instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    asset_id: String,
    returns: Vec<f64>,
    dates: Vec<NaiveDate>,
}

impl ReturnSeries {
    pub fn new(asset_id: impl Into<String>, returns: Vec<f64>, dates: Vec<NaiveDate>) -> Result<Self> {
        let asset_id = asset_id.into();
        if returns.len() != dates.len() {
            return Err(Error::DimensionMismatch {
                expected: returns.len(),
                actual: dates.len(),
            });
        }
        if let Some((index, &value)) = returns.iter().enumerate().find(|(_, r)| !(**r > -1.0) || !r.is_finite()) {
            return Err(Error::TotalLoss { index, value });
        }
        Ok(Self {
            asset_id,
            returns,
            dates,
        })
    }

    /// Undated returns, for callers that only need the arithmetic.
    pub fn from_returns(asset_id: impl Into<String>, returns: Vec<f64>) -> Result<Self> {
        let base = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = (0..returns.len())
            .map(|i| base + chrono::Days::new(i as u64))
            .collect();
        Self::new(asset_id, returns, dates)
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetStats {
    pub asset_id: String,
    pub ann_return: f64,
    pub ann_vol: f64,
    pub beta: f64,
    pub capm: f64,
    pub sharpe: f64,
    pub treynor: f64,
}

impl AssetStats {
    /// Fills in the ratio columns from the primary statistics.
    pub fn assemble(asset_id: impl Into<String>, ann_return: f64, ann_vol: f64, beta: f64, capm: f64, rf: f64) -> Result<Self> {
        Ok(Self {
            asset_id: asset_id.into(),
            ann_return,
            ann_vol,
            beta,
            capm,
            sharpe: asset_sharpe(ann_return, rf, ann_vol)?,
            treynor: asset_treynor(ann_return, rf, beta)?,
        })
    }
}

/// Mean accumulated as an offset from the first element, so a constant
/// series has a mean equal to its value and zero deviations.
fn mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

/// Sample covariance with divisor `n - 1`.
fn sample_covariance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(s / (x.len() - 1) as f64)
}

/// Annualized geometric mean return: `(prod(1 + r))^(trading_days / n) - 1`.
pub fn annualized_return(returns: &ReturnSeries, trading_days: u32) -> Result<f64> {
    let r = returns.returns();
    if r.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
        });
    }
    if let Some((index, &value)) = r.iter().enumerate().find(|(_, v)| !(**v > -1.0)) {
        return Err(Error::TotalLoss { index, value });
    }
    let log_growth: f64 = r.iter().map(|v| v.ln_1p()).sum();
    Ok((log_growth * f64::from(trading_days) / r.len() as f64).exp_m1())
}

/// Sample standard deviation of daily returns scaled by `sqrt(trading_days)`.
pub fn annualized_volatility(returns: &ReturnSeries, trading_days: u32) -> Result<f64> {
    let var = sample_covariance(returns.returns(), returns.returns())?;
    Ok((var * f64::from(trading_days)).sqrt())
}

/// Sample covariance with the market over the sample variance of the market.
pub fn beta(asset: &ReturnSeries, market: &ReturnSeries) -> Result<f64> {
    if asset.dates() != market.dates() {
        if asset.len() != market.len() {
            return Err(Error::DimensionMismatch {
                expected: market.len(),
                actual: asset.len(),
            });
        }
        return Err(Error::InvalidInput(format!(
            "`{}` and `{}` are not aligned on the same dates",
            asset.asset_id(),
            market.asset_id()
        )));
    }
    let var_m = sample_covariance(market.returns(), market.returns())?;
    if var_m == 0.0 {
        return Err(Error::ZeroVariance(format!("market series `{}`", market.asset_id())));
    }
    Ok(sample_covariance(asset.returns(), market.returns())? / var_m)
}

/// `rf + beta * (market_return - rf)`, evaluated as `(1 - beta) * rf + beta * market_return`
/// so that `beta = 1` gives the market return and `beta = 0` gives `rf` exactly.
pub fn capm_expected_return(beta: f64, rf: f64, market_return: f64) -> f64 {
    (1.0 - beta) * rf + beta * market_return
}

pub fn asset_sharpe(ann_return: f64, rf: f64, ann_vol: f64) -> Result<f64> {
    if ann_vol == 0.0 {
        return Err(Error::ZeroVolatility);
    }
    Ok((ann_return - rf) / ann_vol)
}

pub fn asset_treynor(ann_return: f64, rf: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::ZeroBeta);
    }
    Ok((ann_return - rf) / beta)
}

/// Annualized covariance matrix `A`: each unordered pair's daily sample
/// covariance times `trading_days`, mirrored across the diagonal.
pub fn covariance_matrix(returns: &[ReturnSeries], trading_days: u32) -> Result<Matrix> {
    if returns.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "covariance matrix needs at least 2 series, got {}",
            returns.len()
        )));
    }
    let first = &returns[0];
    for r in &returns[1..] {
        if r.len() != first.len() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                actual: r.len(),
            });
        }
        if r.dates() != first.dates() {
            return Err(Error::InvalidInput(format!(
                "`{}` and `{}` are not aligned on the same dates",
                first.asset_id(),
                r.asset_id()
            )));
        }
    }
    let n = returns.len();
    let days = f64::from(trading_days);
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let c = sample_covariance(returns[i].returns(), returns[j].returns())? * days;
            m[(i, j)] = c;
            m[(j, i)] = c;
        }
    }
    Ok(m)
}

/// Inverts a symmetric positive-definite matrix (see [`invert_spd`]).
pub fn invert_matrix(matrix: &Matrix) -> Result<Matrix> {
    invert_spd(matrix)
}

/// Annualized covariance matrix together with its certified inverse.
///
/// Construction fails unless the matrix is symmetric positive definite, so
/// a value of this type always carries a usable inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CovarianceParts")]
pub struct CovarianceModel {
    labels: Vec<String>,
    matrix: Matrix,
    inverse: Matrix,
}

#[derive(Deserialize)]
struct CovarianceParts {
    labels: Vec<String>,
    matrix: Matrix,
}

impl TryFrom<CovarianceParts> for CovarianceModel {
    type Error = Error;

    fn try_from(parts: CovarianceParts) -> Result<Self> {
        CovarianceModel::new(parts.labels, parts.matrix)
    }
}

impl CovarianceModel {
    pub fn new(labels: Vec<String>, matrix: Matrix) -> Result<Self> {
        if labels.len() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: matrix.dim(),
                actual: labels.len(),
            });
        }
        let inverse = invert_matrix(&matrix)?;
        Ok(Self {
            labels,
            matrix,
            inverse,
        })
    }

    pub fn from_returns(returns: &[ReturnSeries], trading_days: u32) -> Result<Self> {
        let labels = returns.iter().map(|r| r.asset_id().to_string()).collect();
        Self::new(labels, covariance_matrix(returns, trading_days)?)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}
