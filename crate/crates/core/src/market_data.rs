//! Price ingestion: `date,close` CSV parsing, calendar alignment across
//! series, window slicing and simple daily returns.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::ReturnSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub close: f64,
}

/// Date-ascending closing prices for one instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    asset_id: String,
    points: Vec<PricePoint>,
}

impl PriceSeries {
    /// Builds a series, checking that dates strictly increase and every
    /// close is a positive finite number.
    pub fn new(asset_id: impl Into<String>, points: Vec<PricePoint>) -> Result<Self> {
        let asset_id = asset_id.into();
        for (i, p) in points.iter().enumerate() {
            if !(p.close.is_finite() && p.close > 0.0) {
                return Err(Error::InvalidSeries {
                    asset: asset_id,
                    message: format!("non-positive price {} on {}", p.close, p.date),
                });
            }
            if i > 0 && points[i - 1].date >= p.date {
                return Err(Error::InvalidSeries {
                    asset: asset_id,
                    message: format!("dates not strictly increasing at {}", p.date),
                });
            }
        }
        Ok(Self { asset_id, points })
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.points.iter().map(|p| p.date)
    }

    fn retain_dates(&self, keep: impl Fn(NaiveDate) -> bool) -> PriceSeries {
        PriceSeries {
            asset_id: self.asset_id.clone(),
            points: self.points.iter().copied().filter(|p| keep(p.date)).collect(),
        }
    }
}

/// Portfolio candidates plus the market index, all on one calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    assets: Vec<PriceSeries>,
    market: PriceSeries,
    common_dates: Vec<NaiveDate>,
}

impl PricePanel {
    pub fn assets(&self) -> &[PriceSeries] {
        &self.assets
    }

    pub fn market(&self) -> &PriceSeries {
        &self.market
    }

    pub fn common_dates(&self) -> &[NaiveDate] {
        &self.common_dates
    }

    pub fn asset_ids(&self) -> Vec<String> {
        self.assets.iter().map(|s| s.asset_id.clone()).collect()
    }
}

/// A named, closed calendar interval with its annual risk-free rate.
///
/// `target_return` pins the portfolio's required return; when absent the
/// analysis uses the global minimum-variance portfolio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub name: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub rf_annual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_return: Option<f64>,
}

impl WindowSpec {
    pub fn new(name: impl Into<String>, start: NaiveDate, end: NaiveDate, rf_annual: f64) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            start,
            end,
            rf_annual,
            target_return: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::InvalidWindow {
                name: self.name.clone(),
                message,
            })
        };
        if self.start > self.end {
            return fail(format!("start {} after end {}", self.start, self.end));
        }
        if !self.rf_annual.is_finite() {
            return fail(format!("risk-free rate {} is not finite", self.rf_annual));
        }
        if let Some(t) = self.target_return {
            if !t.is_finite() {
                return fail(format!("target return {t} is not finite"));
            }
        }
        Ok(())
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

/// Parses `YYYY-MM-DD` with exactly that layout (no single-digit fields).
pub fn parse_iso_date(text: &str) -> Option<NaiveDate> {
    let b = text.as_bytes();
    let layout_ok = b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
    if !layout_ok {
        return None;
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d").ok()
}

/// Parses a `date,close` CSV (LF or CRLF) into a date-sorted series.
pub fn parse_price_csv(bytes: &[u8], asset_id: &str) -> Result<PriceSeries> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::MalformedRow {
        line: 1,
        message: format!("invalid UTF-8: {e}"),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    if text.trim().is_empty() {
        return Err(Error::EmptyFile);
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader.headers().map_err(|e| Error::MalformedRow {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "close" {
        return Err(Error::BadHeader {
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut rows: Vec<(PricePoint, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::MalformedRow {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let date = parse_iso_date(&record[0]).ok_or_else(|| Error::MalformedRow {
            line,
            message: format!("invalid date `{}` (want YYYY-MM-DD)", &record[0]),
        })?;
        let close: f64 = record[1].parse().map_err(|_| Error::MalformedRow {
            line,
            message: format!("invalid price `{}`", &record[1]),
        })?;
        if !close.is_finite() {
            return Err(Error::MalformedRow {
                line,
                message: format!("non-finite price `{}`", &record[1]),
            });
        }
        if close <= 0.0 {
            return Err(Error::NonPositivePrice { line });
        }
        rows.push((PricePoint { date, close }, line));
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile);
    }

    rows.sort_by_key(|(p, _)| p.date);
    if let Some(w) = rows.windows(2).find(|w| w[0].0.date == w[1].0.date) {
        let line = w[0].1.max(w[1].1);
        return Err(Error::DuplicateDate {
            date: w[1].0.date.to_string(),
            line,
        });
    }
    PriceSeries::new(asset_id, rows.into_iter().map(|(p, _)| p).collect())
}

/// Inner-joins every series on the dates they all share.
pub fn align_panel(assets: Vec<PriceSeries>, market: PriceSeries) -> Result<PricePanel> {
    if assets.is_empty() {
        return Err(Error::InvalidInput("panel needs at least one asset".into()));
    }
    if let Some(s) = assets.iter().chain(std::iter::once(&market)).find(|s| s.is_empty()) {
        return Err(Error::InvalidSeries {
            asset: s.asset_id.clone(),
            message: "series is empty".into(),
        });
    }

    let mut common: BTreeSet<NaiveDate> = market.dates().collect();
    for s in &assets {
        let dates: BTreeSet<NaiveDate> = s.dates().collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    if common.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: common.len(),
        });
    }

    let keep = |d: NaiveDate| common.contains(&d);
    Ok(PricePanel {
        assets: assets.iter().map(|s| s.retain_dates(keep)).collect(),
        market: market.retain_dates(keep),
        common_dates: common.iter().copied().collect(),
    })
}

/// Restricts an aligned panel to the closed interval `[start, end]`.
pub fn slice_window(panel: &PricePanel, window: &WindowSpec) -> Result<PricePanel> {
    window.validate()?;
    let common_dates: Vec<NaiveDate> = panel
        .common_dates
        .iter()
        .copied()
        .filter(|d| window.contains(*d))
        .collect();
    if common_dates.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: common_dates.len(),
        });
    }
    let keep = |d: NaiveDate| window.contains(d);
    Ok(PricePanel {
        assets: panel.assets.iter().map(|s| s.retain_dates(keep)).collect(),
        market: panel.market.retain_dates(keep),
        common_dates,
    })
}

/// `r_i = P_i / P_{i-1} - 1`, dated on the later day.
pub fn simple_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    if series.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: series.len(),
        });
    }
    let (returns, dates) = series
        .points
        .windows(2)
        .map(|w| (w[1].close / w[0].close - 1.0, w[1].date))
        .unzip();
    ReturnSeries::new(series.asset_id.clone(), returns, dates)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        parse_iso_date(s).unwrap()
    }

    fn series(id: &str, rows: &[(&str, f64)]) -> PriceSeries {
        PriceSeries::new(
            id,
            rows.iter()
                .map(|(date, close)| PricePoint {
                    date: d(date),
                    close: *close,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parses_minimal_file() {
        let s = parse_price_csv(b"date,close\n2015-01-02,100.0\n2015-01-05,110.0", "X").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.points()[1].close, 110.0);
        assert_eq!(s.asset_id(), "X");
    }

    #[test]
    fn accepts_crlf_and_sorts() {
        let s = parse_price_csv(b"date,close\r\n2015-01-05,110\r\n2015-01-02,100\r\n", "X").unwrap();
        assert_eq!(s.points()[0].date, d("2015-01-02"));
        assert_eq!(s.points()[1].date, d("2015-01-05"));
    }

    #[test]
    fn rejects_non_positive_price_with_line() {
        let err = parse_price_csv(b"date,close\n2015-01-02,-5", "X").unwrap_err();
        assert_eq!(err, Error::NonPositivePrice { line: 2 });
        assert_eq!(err.to_string(), "non-positive price at line 2");
        let err = parse_price_csv(b"date,close\n2015-01-02,1\n2015-01-05,0", "X").unwrap_err();
        assert_eq!(err, Error::NonPositivePrice { line: 3 });
    }

    #[test]
    fn rejects_duplicate_date() {
        let err = parse_price_csv(b"date,close\n2015-01-02,1\n2015-01-02,2\n", "X").unwrap_err();
        assert!(matches!(err, Error::DuplicateDate { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_empty_and_header_only() {
        assert_eq!(parse_price_csv(b"", "X").unwrap_err(), Error::EmptyFile);
        assert_eq!(parse_price_csv(b"date,close\n", "X").unwrap_err(), Error::EmptyFile);
    }

    #[test]
    fn reports_malformed_row_line() {
        let err = parse_price_csv(b"date,close\n2015-01-02,1\n2015-1-5,2\n", "X").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 3, .. }), "{err}");
        let err = parse_price_csv(b"date,close\n2015-01-02,abc\n", "X").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }), "{err}");
        let err = parse_price_csv(b"date,close\n2015-01-02,1,3\n", "X").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_wrong_header() {
        let err = parse_price_csv(b"Date,Price\n2015-01-02,1\n", "X").unwrap_err();
        assert!(matches!(err, Error::BadHeader { .. }));
    }

    #[test]
    fn strict_date_layout() {
        assert!(parse_iso_date("2015-01-02").is_some());
        assert!(parse_iso_date("2015-1-02").is_none());
        assert!(parse_iso_date("2015/01/02").is_none());
        assert!(parse_iso_date("2015-02-30").is_none());
    }

    #[test]
    fn align_intersects_calendars() {
        let a = series("A", &[("2020-01-01", 1.0), ("2020-01-02", 2.0), ("2020-01-03", 3.0)]);
        let m = series("M", &[("2020-01-02", 1.0), ("2020-01-03", 2.0), ("2020-01-04", 3.0)]);
        let panel = align_panel(vec![a], m).unwrap();
        assert_eq!(panel.common_dates(), &[d("2020-01-02"), d("2020-01-03")]);
        assert_eq!(panel.assets()[0].points()[0].close, 2.0);
        assert_eq!(panel.market().len(), 2);
    }

    #[test]
    fn align_identical_calendars_is_identity() {
        let a = series("A", &[("2020-01-01", 1.0), ("2020-01-02", 2.0)]);
        let m = series("M", &[("2020-01-01", 5.0), ("2020-01-02", 6.0)]);
        let panel = align_panel(vec![a.clone()], m.clone()).unwrap();
        assert_eq!(panel.assets()[0], a);
        assert_eq!(panel.market(), &m);
    }

    #[test]
    fn align_disjoint_calendars_fails() {
        let a = series("A", &[("2020-01-01", 1.0), ("2020-01-02", 2.0)]);
        let m = series("M", &[("2021-01-01", 5.0), ("2021-01-02", 6.0)]);
        let err = align_panel(vec![a], m).unwrap_err();
        assert_eq!(err, Error::EmptyIntersection);
        assert_eq!(err.to_string(), "empty intersection of trading dates");
    }

    #[test]
    fn align_single_common_date_fails() {
        let a = series("A", &[("2020-01-01", 1.0), ("2020-01-02", 2.0)]);
        let m = series("M", &[("2020-01-02", 5.0), ("2020-01-03", 6.0)]);
        assert!(matches!(
            align_panel(vec![a], m),
            Err(Error::InsufficientData { required: 2, actual: 1 })
        ));
    }

    fn yearly_panel() -> PricePanel {
        let dates = ["2015-06-01", "2016-06-01", "2019-06-03", "2020-06-01", "2023-06-01"];
        let rows: Vec<(&str, f64)> = dates.iter().enumerate().map(|(i, d)| (*d, 10.0 + i as f64)).collect();
        align_panel(vec![series("A", &rows)], series("M", &rows)).unwrap()
    }

    #[test]
    fn slice_full_range_is_identity() {
        let panel = yearly_panel();
        let w = WindowSpec::new("all", d("2015-01-01"), d("2023-12-31"), 0.05).unwrap();
        assert_eq!(slice_window(&panel, &w).unwrap(), panel);
    }

    #[test]
    fn slice_filters_dates() {
        let panel = yearly_panel();
        let w = WindowSpec::new("2015-2019", d("2015-01-01"), d("2019-12-31"), 0.0655).unwrap();
        let sliced = slice_window(&panel, &w).unwrap();
        assert_eq!(sliced.common_dates(), &[d("2015-06-01"), d("2016-06-01"), d("2019-06-03")]);
        assert_eq!(sliced.assets()[0].len(), 3);
        assert_eq!(sliced.market().len(), 3);
    }

    #[test]
    fn slice_to_single_day_fails() {
        let panel = yearly_panel();
        let w = WindowSpec::new("one", d("2020-06-01"), d("2020-06-01"), 0.05).unwrap();
        assert!(matches!(
            slice_window(&panel, &w),
            Err(Error::InsufficientData { actual: 1, .. })
        ));
    }

    #[test]
    fn window_validation() {
        assert!(WindowSpec::new("bad", d("2020-01-02"), d("2020-01-01"), 0.05).is_err());
        assert!(WindowSpec::new("bad", d("2020-01-01"), d("2020-01-02"), f64::NAN).is_err());
    }

    fn returns_of(prices: &[f64]) -> Vec<f64> {
        let rows: Vec<(String, f64)> = prices
            .iter()
            .enumerate()
            .map(|(i, p)| (format!("2020-01-{:02}", i + 1), *p))
            .collect();
        let rows: Vec<(&str, f64)> = rows.iter().map(|(d, p)| (d.as_str(), *p)).collect();
        simple_returns(&series("A", &rows)).unwrap().returns().to_vec()
    }

    #[test]
    fn simple_return_examples() {
        let r = returns_of(&[100.0, 110.0]);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.10).abs() < 1e-15);
        assert_eq!(returns_of(&[50.0, 50.0, 50.0]), vec![0.0, 0.0]);
        let r = returns_of(&[100.0, 80.0, 100.0]);
        assert!((r[0] + 0.20).abs() < 1e-15);
        assert!((r[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn returns_carry_later_dates() {
        let s = series("A", &[("2020-01-01", 1.0), ("2020-01-03", 2.0)]);
        let r = simple_returns(&s).unwrap();
        assert_eq!(r.dates(), &[d("2020-01-03")]);
    }

    #[test]
    fn returns_need_two_prices() {
        let s = series("A", &[("2020-01-01", 1.0)]);
        assert!(matches!(simple_returns(&s), Err(Error::InsufficientData { .. })));
    }
}
