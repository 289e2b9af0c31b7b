use std::fmt::Write;

use super::{FrontierCurve, WindowReport};
use crate::frontier::Viability;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// A decimal fraction as a percentage with two decimals, rounding half away
/// from zero. Never prints `-0.00`.
pub fn format_pct(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let hundredths = (x * 10_000.0).round();
    if hundredths == 0.0 {
        return "0.00".into();
    }
    format!("{:.2}", hundredths / 100.0)
}

/// `x` with 10 significant digits in positional notation.
pub(crate) fn format_sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0.000000000".into() } else { x.to_string() };
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (9 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.9999999996 -> 10.000000000).
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|c| *c == '0').count();
    if digits > 10 && decimals > 0 {
        let decimals = decimals - 1;
        format!("{x:.decimals$}")
    } else {
        s
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
}

/// `(target_return,frontier_risk)` and `(risk,cml_value)` CSV texts.
pub fn curve_csvs(curve: &FrontierCurve) -> (String, String) {
    let mut frontier = String::from("target_return,frontier_risk\n");
    for (x, r) in &curve.points {
        let _ = writeln!(frontier, "{},{}", format_sig10(*x), format_sig10(*r));
    }
    let mut cml = String::from("risk,cml_value\n");
    for (v, y) in &curve.cml_points {
        let _ = writeln!(cml, "{},{}", format_sig10(*v), format_sig10(*y));
    }
    (frontier, cml)
}

fn period(report: &WindowReport) -> String {
    match (report.window.start, report.window.end) {
        (Some(s), Some(e)) => format!(" ({s} to {e})"),
        _ => String::new(),
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn markdown(&self, out: &mut String) {
        let _ = writeln!(out, "| {} |", self.header.join(" | "));
        let align: Vec<&str> = (0..self.header.len()).map(|i| if i == 0 { "---" } else { "---:" }).collect();
        let _ = writeln!(out, "| {} |", align.join(" | "));
        for r in &self.rows {
            let _ = writeln!(out, "| {} |", r.join(" | "));
        }
        out.push('\n');
    }
}

fn matrix_table(corner: &str, labels: &[String], m: &Matrix) -> Table {
    let mut t = Table::new(std::iter::once(corner.to_string()).chain(labels.iter().cloned()).collect());
    for (i, label) in labels.iter().enumerate() {
        t.row(std::iter::once(label.clone()).chain(m.row(i).iter().map(|v| format_pct(*v))).collect());
    }
    t
}

/// Indicator, covariance, frontier and portfolio tables for one window.
pub fn render_tables(report: &WindowReport, format: TableFormat) -> String {
    match format {
        TableFormat::Markdown => markdown(report),
        TableFormat::Csv => csv(report),
    }
}

fn markdown(report: &WindowReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# Window {}{}\n\nRisk-free rate: {}%. All figures in percent.\n",
        report.window.name,
        period(report),
        format_pct(report.window.rf)
    );

    out.push_str("## Indicators\n\n");
    let mut columns: Vec<String> = report.labels.clone();
    if let Some(m) = &report.market {
        columns.push(m.asset_id.clone());
    }
    let mut t = Table::new(std::iter::once("Indicator".to_string()).chain(columns).collect());
    if report.stats.is_empty() {
        t.row(
            std::iter::once("CAPM".to_string())
                .chain(report.expected_returns.iter().map(|v| format_pct(*v)))
                .chain(report.market.iter().map(|m| format_pct(m.capm)))
                .collect(),
        );
    } else {
        type Field = fn(&crate::stats::AssetStats) -> f64;
        let fields: [(&str, Field); 6] = [
            ("Return", |s| s.ann_return),
            ("Volatility", |s| s.ann_vol),
            ("Beta", |s| s.beta),
            ("CAPM", |s| s.capm),
            ("Sharpe", |s| s.sharpe),
            ("Treynor", |s| s.treynor),
        ];
        for (name, f) in fields {
            t.row(
                std::iter::once(name.to_string())
                    .chain(report.stats.iter().chain(report.market.iter()).map(|s| format_pct(f(s))))
                    .collect(),
            );
        }
    }
    t.markdown(&mut out);

    if let Some(cov) = &report.cov {
        out.push_str("## Covariance matrix\n\n");
        matrix_table("Covariance", &report.labels, cov.matrix()).markdown(&mut out);
        out.push_str("## Inverse covariance matrix\n\n");
        matrix_table("Inverse", &report.labels, cov.inverse()).markdown(&mut out);
    }

    if let Some(fc) = &report.constants {
        out.push_str("## Frontier constants\n\n");
        let mut t = Table::new(std::iter::once("Vector".to_string()).chain(report.labels.iter().cloned()).collect());
        t.row(std::iter::once("h".to_string()).chain(fc.h.iter().map(|v| format_pct(*v))).collect());
        t.row(std::iter::once("g".to_string()).chain(fc.g.iter().map(|v| format_pct(*v))).collect());
        t.markdown(&mut out);
        let mut t = Table::new(vec!["Constant".into(), "Value".into()]);
        for (name, v) in [("alpha", fc.alpha), ("B", fc.b), ("gamma", fc.gamma), ("delta", fc.delta)] {
            t.row(vec![name.into(), format_pct(v)]);
        }
        t.markdown(&mut out);
    }

    if let Viability::NonViable(reason) = &report.viability {
        let _ = writeln!(out, "## Portfolio\n\nNon-viable window: {reason}. No portfolio is constructed.");
        return out;
    }

    if let Some(t) = &report.tangency {
        out.push_str("## Tangency and capital market line\n\n");
        let mut tab = Table::new(vec!["Quantity".into(), "Value".into()]);
        tab.row(vec!["Tangency return".into(), format_pct(t.r_t)]);
        tab.row(vec!["Tangency risk".into(), format_pct(t.sigma_rt)]);
        tab.row(vec!["CML slope".into(), format_pct(t.slope)]);
        tab.markdown(&mut out);
    }

    for (title, p) in [("Portfolio", &report.solution), ("Global minimum-variance portfolio", &report.gmv)] {
        let Some(p) = p else { continue };
        let _ = writeln!(out, "## {title}\n");
        let mut t = Table::new(vec!["Asset".into(), "Weight".into(), "E(R)".into(), "Contribution".into()]);
        for (i, label) in report.labels.iter().enumerate() {
            t.row(vec![
                label.clone(),
                format_pct(p.weights[i]),
                format_pct(report.expected_returns[i]),
                format_pct(p.contributions[i]),
            ]);
        }
        t.row(vec![
            "Total".into(),
            format_pct(p.weights.iter().sum()),
            String::new(),
            format_pct(p.port_return),
        ]);
        t.markdown(&mut out);
        let mut t = Table::new(vec!["Metric".into(), "Value".into()]);
        t.row(vec!["Target return".into(), format_pct(p.target_return)]);
        t.row(vec!["lambda".into(), format_pct(p.lambda)]);
        t.row(vec!["theta".into(), format_pct(p.theta)]);
        t.row(vec!["Return".into(), format_pct(p.port_return)]);
        if title == "Portfolio" {
            if let Some(b) = report.portfolio_beta {
                t.row(vec!["Beta".into(), format_pct(b)]);
            }
        }
        t.row(vec!["Variance".into(), format_pct(p.variance)]);
        t.row(vec!["Risk".into(), format_pct(p.risk)]);
        t.row(vec!["Sharpe".into(), format_pct(p.sharpe)]);
        t.markdown(&mut out);
    }
    out
}

fn csv(report: &WindowReport) -> String {
    let mut out = csv_line(
        &[
            "asset",
            "return_pct",
            "volatility_pct",
            "beta_pct",
            "capm_pct",
            "sharpe_pct",
            "treynor_pct",
            "weight_pct",
            "contribution_pct",
        ]
        .map(String::from),
    );
    let blank = String::new;
    for (i, label) in report.labels.iter().enumerate() {
        let s = report.stats.get(i);
        let stat = |f: fn(&crate::stats::AssetStats) -> f64| s.map_or_else(blank, |s| format_pct(f(s)));
        let sol = report.solution.as_ref();
        out.push_str(&csv_line(&[
            label.clone(),
            stat(|s| s.ann_return),
            stat(|s| s.ann_vol),
            stat(|s| s.beta),
            format_pct(report.expected_returns[i]),
            stat(|s| s.sharpe),
            stat(|s| s.treynor),
            sol.map_or_else(blank, |p| format_pct(p.weights[i])),
            sol.map_or_else(blank, |p| format_pct(p.contributions[i])),
        ]));
    }
    if let Some(m) = &report.market {
        out.push_str(&csv_line(&[
            m.asset_id.clone(),
            format_pct(m.ann_return),
            format_pct(m.ann_vol),
            format_pct(m.beta),
            format_pct(m.capm),
            format_pct(m.sharpe),
            format_pct(m.treynor),
            blank(),
            blank(),
        ]));
    }

    out.push('\n');
    out.push_str(&csv_line(&["metric".into(), "value".into()]));
    let mut kv = |k: &str, v: String| out.push_str(&csv_line(&[k.to_string(), v]));
    kv("window", report.window.name.clone());
    kv("rf_pct", format_pct(report.window.rf));
    if let Some(fc) = &report.constants {
        kv("alpha_pct", format_pct(fc.alpha));
        kv("b_pct", format_pct(fc.b));
        kv("gamma_pct", format_pct(fc.gamma));
        kv("delta_pct", format_pct(fc.delta));
    }
    match &report.viability {
        Viability::NonViable(reason) => kv("viability", format!("non-viable: {reason}")),
        Viability::Viable => {
            kv("viability", "viable".into());
            if let Some(t) = &report.tangency {
                kv("tangency_return_pct", format_pct(t.r_t));
                kv("tangency_risk_pct", format_pct(t.sigma_rt));
                kv("cml_slope_pct", format_pct(t.slope));
            }
            if let Some(p) = &report.solution {
                kv("target_return_pct", format_pct(p.target_return));
                kv("lambda_pct", format_pct(p.lambda));
                kv("theta_pct", format_pct(p.theta));
                kv("portfolio_return_pct", format_pct(p.port_return));
                if let Some(b) = report.portfolio_beta {
                    kv("portfolio_beta_pct", format_pct(b));
                }
                kv("portfolio_variance_pct", format_pct(p.variance));
                kv("portfolio_risk_pct", format_pct(p.risk));
                kv("portfolio_sharpe_pct", format_pct(p.sharpe));
            }
            if let Some(g) = &report.gmv {
                kv("gmv_return_pct", format_pct(g.port_return));
                kv("gmv_variance_pct", format_pct(g.variance));
                kv("gmv_risk_pct", format_pct(g.risk));
                kv("gmv_sharpe_pct", format_pct(g.sharpe));
            }
        }
    }
    out
}
