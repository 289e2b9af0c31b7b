//! Window-level orchestration: from a price panel (or published matrices) to
//! a [`WindowReport`], plus summaries and rendering.

mod render;
mod summary;
mod svg;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::frontier::{
    cml_value, frontier_constants, frontier_risk, gmv_portfolio, solve_for_target, tangency, viability_check,
    FrontierConstants, PortfolioSolution, TangencySolution, Viability,
};
use crate::linalg::Matrix;
use crate::market_data::{simple_returns, slice_window, PricePanel, WindowSpec};
use crate::stats::{
    annualized_return, annualized_volatility, beta, capm_expected_return, AssetStats, CovarianceModel, ReturnSeries,
};

pub use render::{curve_csvs, format_pct, render_tables, TableFormat};
pub use summary::{render_summary, summarize, Summary, SummaryColumn};
pub use svg::render_svg;

pub const DEFAULT_CURVE_POINTS: usize = 200;

/// Name, optional calendar bounds and risk-free rate of an analyzed window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowLabel {
    pub name: String,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub rf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetMarker {
    pub label: String,
    pub risk: f64,
    pub expected_return: f64,
}

/// Sampled frontier and capital market line with markers for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierCurve {
    /// `(target_return, frontier_risk)`, ascending in return.
    pub points: Vec<(f64, f64)>,
    /// `(risk, cml_value)`; empty when the window has no tangency point.
    pub cml_points: Vec<(f64, f64)>,
    pub asset_markers: Vec<AssetMarker>,
    /// `(risk, return)` of the global minimum-variance portfolio.
    pub gmv_marker: (f64, f64),
    /// `(sigma_rt, r_t)`.
    pub tangency_marker: Option<(f64, f64)>,
    pub rf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub window: WindowLabel,
    pub labels: Vec<String>,
    pub expected_returns: Vec<f64>,
    /// Per-asset indicators; empty for replays without auxiliary statistics.
    pub stats: Vec<AssetStats>,
    pub market: Option<AssetStats>,
    pub cov: Option<CovarianceModel>,
    pub constants: Option<FrontierConstants>,
    pub viability: Viability,
    /// Global minimum-variance portfolio.
    pub gmv: Option<PortfolioSolution>,
    /// The reported portfolio: the frontier portfolio at the window's target
    /// return, or the GMV portfolio when no target is set.
    pub solution: Option<PortfolioSolution>,
    /// `sum(w_i * beta_i)` of `solution`, when asset betas are known.
    pub portfolio_beta: Option<f64>,
    pub tangency: Option<TangencySolution>,
    pub curve: Option<FrontierCurve>,
}

impl WindowReport {
    pub fn is_viable(&self) -> bool {
        self.viability.is_viable()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Decimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetAux {
    pub ann_return: f64,
    pub ann_vol: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketAux {
    pub id: String,
    pub ann_return: f64,
    pub ann_vol: f64,
    #[serde(default = "one")]
    pub beta: f64,
}

fn one() -> f64 {
    1.0
}

/// Published covariance matrix and expected returns for one window.
///
/// All rates are decimal fractions; `units` must be `"decimal"`. The matrix
/// may be omitted only for windows that turn out not to be viable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayInput {
    pub units: Units,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<NaiveDate>,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov_matrix: Option<Matrix>,
    pub expected_returns: Vec<f64>,
    pub rf: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_return: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asset_stats: Option<Vec<AssetAux>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketAux>,
}

impl ReplayInput {
    pub fn from_json(text: &str) -> Result<Self> {
        let input: ReplayInput =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("replay input: {e}")))?;
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if n == 0 {
            return Err(Error::InvalidInput("labels: at least one asset required".into()));
        }
        let check = |field: &str, len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{field}: expected {n} entries, found {len}")))
            }
        };
        check("expected_returns", self.expected_returns.len())?;
        if let Some(m) = &self.cov_matrix {
            check("cov_matrix", m.dim())?;
        }
        if let Some(aux) = &self.asset_stats {
            check("asset_stats", aux.len())?;
        }
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{field}: {v} is not finite")))
            }
        };
        finite("rf", self.rf)?;
        for v in &self.expected_returns {
            finite("expected_returns", *v)?;
        }
        if let Some(t) = self.target_return {
            finite("target_return", t)?;
        }
        if let (Some(s), Some(e)) = (self.start, self.end) {
            if s > e {
                return Err(Error::InvalidInput(format!("start {s} after end {e}")));
            }
        }
        Ok(())
    }

    /// The intermediate inputs of an analyzed window, in replay form.
    pub fn from_report(report: &WindowReport) -> Self {
        let aux = (!report.stats.is_empty()).then(|| {
            report
                .stats
                .iter()
                .map(|s| AssetAux {
                    ann_return: s.ann_return,
                    ann_vol: s.ann_vol,
                    beta: s.beta,
                })
                .collect()
        });
        ReplayInput {
            units: Units::Decimal,
            name: report.window.name.clone(),
            start: report.window.start,
            end: report.window.end,
            labels: report.labels.clone(),
            cov_matrix: report.cov.as_ref().map(|c| c.matrix().clone()),
            expected_returns: report.expected_returns.clone(),
            rf: report.window.rf,
            target_return: report
                .solution
                .as_ref()
                .zip(report.gmv.as_ref())
                .and_then(|(s, g)| (s != g).then_some(s.target_return)),
            asset_stats: aux,
            market: report.market.as_ref().map(|m| MarketAux {
                id: m.asset_id.clone(),
                ann_return: m.ann_return,
                ann_vol: m.ann_vol,
                beta: m.beta,
            }),
        }
    }
}

/// Default frontier sampling span: zero to 1.5 times the largest expected
/// return.
pub fn default_return_span(expected_returns: &[f64]) -> (f64, f64) {
    let max = expected_returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hi = 1.5 * max;
    (0.0, if hi > 0.0 { hi } else { 0.05 })
}

/// Runs the full pipeline on one window of a price panel.
pub fn analyze_window(panel: &PricePanel, window: &WindowSpec, trading_days: u32) -> Result<WindowReport> {
    if trading_days == 0 {
        return Err(Error::InvalidInput("trading_days must be at least 1".into()));
    }
    let sliced = slice_window(panel, window).stage("slice window")?;
    let rf = window.rf_annual;

    let market_returns = simple_returns(sliced.market()).stage("market returns")?;
    let asset_returns: Vec<ReturnSeries> = sliced
        .assets()
        .iter()
        .map(simple_returns)
        .collect::<Result<_>>()
        .stage("asset returns")?;

    let market_stats = (|| {
        let mu_m = annualized_return(&market_returns, trading_days)?;
        let vol = annualized_volatility(&market_returns, trading_days)?;
        let b = beta(&market_returns, &market_returns)?;
        AssetStats::assemble(market_returns.asset_id(), mu_m, vol, b, capm_expected_return(b, rf, mu_m), rf)
    })()
    .stage("market statistics")?;

    let stats: Vec<AssetStats> = asset_returns
        .iter()
        .map(|r| {
            let ann_return = annualized_return(r, trading_days)?;
            let vol = annualized_volatility(r, trading_days)?;
            let b = beta(r, &market_returns)?;
            let capm = capm_expected_return(b, rf, market_stats.ann_return);
            AssetStats::assemble(r.asset_id(), ann_return, vol, b, capm, rf)
        })
        .collect::<Result<_>>()
        .stage("asset statistics")?;

    let cov = CovarianceModel::from_returns(&asset_returns, trading_days).stage("covariance")?;

    build_report(
        WindowLabel {
            name: window.name.clone(),
            start: Some(window.start),
            end: Some(window.end),
            rf,
        },
        sliced.asset_ids(),
        stats.iter().map(|s| s.capm).collect(),
        stats,
        Some(market_stats),
        Some(cov),
        window.target_return,
    )
}

/// Runs every window independently, in parallel; results keep window order.
pub fn analyze_windows(panel: &PricePanel, windows: &[WindowSpec], trading_days: u32) -> Vec<Result<WindowReport>> {
    windows
        .par_iter()
        .map(|w| analyze_window(panel, w, trading_days))
        .collect()
}

/// Runs the frontier pipeline from a published covariance matrix and
/// expected-return vector.
pub fn replay_matrices(input: &ReplayInput) -> Result<WindowReport> {
    input.validate()?;
    let rf = input.rf;
    let stats = match &input.asset_stats {
        Some(aux) => input
            .labels
            .iter()
            .zip(aux)
            .zip(&input.expected_returns)
            .map(|((label, a), capm)| AssetStats::assemble(label.clone(), a.ann_return, a.ann_vol, a.beta, *capm, rf))
            .collect::<Result<_>>()
            .stage("asset statistics")?,
        None => Vec::new(),
    };
    let market = input
        .market
        .as_ref()
        .map(|m| {
            let capm = capm_expected_return(m.beta, rf, m.ann_return);
            AssetStats::assemble(m.id.clone(), m.ann_return, m.ann_vol, m.beta, capm, rf)
        })
        .transpose()
        .stage("market statistics")?;
    let cov = input
        .cov_matrix
        .as_ref()
        .map(|m| CovarianceModel::new(input.labels.clone(), m.clone()))
        .transpose()
        .stage("covariance")?;

    build_report(
        WindowLabel {
            name: input.name.clone(),
            start: input.start,
            end: input.end,
            rf,
        },
        input.labels.clone(),
        input.expected_returns.clone(),
        stats,
        market,
        cov,
        input.target_return,
    )
}

fn build_report(
    window: WindowLabel,
    labels: Vec<String>,
    expected_returns: Vec<f64>,
    stats: Vec<AssetStats>,
    market: Option<AssetStats>,
    cov: Option<CovarianceModel>,
    target: Option<f64>,
) -> Result<WindowReport> {
    let rf = window.rf;
    let constants = cov
        .as_ref()
        .map(|c| frontier_constants(c, &expected_returns))
        .transpose()
        .stage("frontier constants")?;
    let viability = viability_check(&expected_returns);

    let mut report = WindowReport {
        window,
        labels,
        expected_returns,
        stats,
        market,
        cov,
        constants,
        viability,
        gmv: None,
        solution: None,
        portfolio_beta: None,
        tangency: None,
        curve: None,
    };
    if !report.is_viable() {
        return Ok(report);
    }

    let (Some(cov), Some(fc)) = (report.cov.as_ref(), report.constants.as_ref()) else {
        return Err(Error::InvalidInput(format!(
            "window `{}` is viable but has no covariance matrix",
            report.window.name
        )));
    };
    let gmv = gmv_portfolio(fc, cov, &report.expected_returns, rf).stage("minimum-variance portfolio")?;
    let solution = match target {
        Some(t) => solve_for_target(fc, cov, &report.expected_returns, t, rf).stage("target portfolio")?,
        None => gmv.clone(),
    };
    let tangency = if fc.is_degenerate() {
        None
    } else {
        match tangency(fc, rf) {
            Ok(t) => Some(t),
            Err(Error::TangencyUndefined { .. }) => None,
            Err(e) => return Err(e.at("tangency")),
        }
    };
    report.portfolio_beta = (!report.stats.is_empty())
        .then(|| solution.weights.iter().zip(&report.stats).map(|(w, s)| w * s.beta).sum());
    report.gmv = Some(gmv);
    report.solution = Some(solution);
    report.tangency = tangency;

    if !fc.is_degenerate() {
        let span = default_return_span(&report.expected_returns);
        report.curve = Some(emit_frontier_curve(&report, DEFAULT_CURVE_POINTS, span).stage("frontier curve")?);
    }
    Ok(report)
}

/// Samples the frontier at `n_points` equally spaced returns in `span` and
/// the capital market line over `[0, max sampled risk]`.
pub fn emit_frontier_curve(report: &WindowReport, n_points: usize, span: (f64, f64)) -> Result<FrontierCurve> {
    if let Viability::NonViable(reason) = &report.viability {
        return Err(Error::NonViable(reason.clone()));
    }
    if n_points < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 curve points, got {n_points}")));
    }
    let (lo, hi) = span;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!("invalid return span {lo}:{hi}")));
    }
    let (Some(fc), Some(gmv)) = (report.constants.as_ref(), report.gmv.as_ref()) else {
        return Err(Error::InvalidInput("report has no frontier".into()));
    };

    let last = (n_points - 1) as f64;
    let points: Vec<(f64, f64)> = (0..n_points)
        .map(|i| {
            let x = if i + 1 == n_points { hi } else { lo + (hi - lo) * i as f64 / last };
            frontier_risk(fc, x).map(|r| (x, r))
        })
        .collect::<Result<_>>()?;

    let rf = report.window.rf;
    let cml_points = match &report.tangency {
        Some(t) => {
            let max_risk = points.iter().map(|p| p.1).fold(0.0, f64::max);
            (0..n_points)
                .map(|i| {
                    let v = max_risk * i as f64 / last;
                    (v, cml_value(rf, t.slope, v))
                })
                .collect()
        }
        None => Vec::new(),
    };

    let asset_markers = report
        .labels
        .iter()
        .enumerate()
        .map(|(i, label)| AssetMarker {
            label: label.clone(),
            risk: match report.stats.get(i) {
                Some(s) => s.ann_vol,
                None => report.cov.as_ref().map_or(f64::NAN, |c| c.matrix()[(i, i)].sqrt()),
            },
            expected_return: report.expected_returns[i],
        })
        .collect();

    Ok(FrontierCurve {
        points,
        cml_points,
        asset_markers,
        gmv_marker: (gmv.risk, gmv.target_return),
        tangency_marker: report.tangency.as_ref().map(|t| (t.sigma_rt, t.r_t)),
        rf,
    })
}
