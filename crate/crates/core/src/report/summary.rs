use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::render::format_pct;
use super::{TableFormat, WindowReport};
use crate::error::{Error, Result};

/// One window's column of the cross-window summary. Every value is copied
/// from the corresponding [`WindowReport`] field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryColumn {
    pub name: String,
    pub viable: bool,
    pub port_return: Option<f64>,
    pub portfolio_beta: Option<f64>,
    pub variance: Option<f64>,
    pub risk: Option<f64>,
    pub sharpe: Option<f64>,
    /// Indexed like [`Summary::labels`]; `None` where the window lacks the asset
    /// or the value.
    pub weights: Vec<Option<f64>>,
    pub historical: Vec<Option<f64>>,
    pub capm: Vec<Option<f64>>,
    pub contributions: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub labels: Vec<String>,
    pub columns: Vec<SummaryColumn>,
}

pub fn summarize(reports: &[WindowReport]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::InvalidInput("nothing to summarize".into()));
    }
    let mut labels: Vec<String> = Vec::new();
    for r in reports {
        for l in &r.labels {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
    }

    let columns = reports
        .iter()
        .map(|r| {
            let per_asset = |f: &dyn Fn(usize) -> Option<f64>| -> Vec<Option<f64>> {
                labels
                    .iter()
                    .map(|l| r.labels.iter().position(|x| x == l).and_then(f))
                    .collect()
            };
            let sol = r.solution.as_ref();
            SummaryColumn {
                name: r.window.name.clone(),
                viable: r.is_viable(),
                port_return: sol.map(|p| p.port_return),
                portfolio_beta: r.portfolio_beta,
                variance: sol.map(|p| p.variance),
                risk: sol.map(|p| p.risk),
                sharpe: sol.map(|p| p.sharpe),
                weights: per_asset(&|i| sol.map(|p| p.weights[i])),
                historical: per_asset(&|i| r.stats.get(i).map(|s| s.ann_return)),
                capm: per_asset(&|i| Some(r.expected_returns[i])),
                contributions: per_asset(&|i| sol.map(|p| p.contributions[i])),
            }
        })
        .collect();
    Ok(Summary { labels, columns })
}

fn cell(col: &SummaryColumn, v: Option<f64>) -> String {
    match v {
        Some(x) => format_pct(x),
        None if !col.viable => "non-viable".into(),
        None => "n/a".into(),
    }
}

/// Portfolio metrics, weights and per-asset returns across windows.
pub fn render_summary(summary: &Summary, format: TableFormat) -> String {
    let mut rows: Vec<(String, String, Vec<String>)> = Vec::new();
    let metric = |name: &str, f: fn(&SummaryColumn) -> Option<f64>| {
        (
            "portfolio".to_string(),
            name.to_string(),
            summary.columns.iter().map(|c| cell(c, f(c))).collect::<Vec<_>>(),
        )
    };
    rows.push(metric("Return", |c| c.port_return));
    rows.push(metric("Beta", |c| c.portfolio_beta));
    rows.push(metric("Variance", |c| c.variance));
    rows.push(metric("Risk", |c| c.risk));
    rows.push(metric("Sharpe", |c| c.sharpe));
    type PerAsset = fn(&SummaryColumn) -> &Vec<Option<f64>>;
    let sections: [(&str, PerAsset); 4] = [
        ("weight", |c| &c.weights),
        ("historical", |c| &c.historical),
        ("capm", |c| &c.capm),
        ("markowitz", |c| &c.contributions),
    ];
    for (section, f) in sections {
        for (i, label) in summary.labels.iter().enumerate() {
            rows.push((
                section.to_string(),
                label.clone(),
                summary.columns.iter().map(|c| cell(c, f(c)[i])).collect(),
            ));
        }
    }

    let names: Vec<String> = summary.columns.iter().map(|c| c.name.clone()).collect();
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let header: Vec<String> = ["section".to_string(), "item".to_string()].into_iter().chain(names).collect();
            w.write_record(&header).expect("writing to memory");
            for (section, item, cells) in &rows {
                let record: Vec<&str> = [section.as_str(), item.as_str()]
                    .into_iter()
                    .chain(cells.iter().map(String::as_str))
                    .collect();
                w.write_record(&record).expect("writing to memory");
            }
            out = String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8");
        }
        TableFormat::Markdown => {
            out.push_str("# Summary across windows\n\nAll figures in percent.\n");
            let mut current = "";
            for (section, item, cells) in &rows {
                if section != current {
                    let title = match section.as_str() {
                        "portfolio" => "Portfolio behaviour",
                        "weight" => "Weights",
                        "historical" => "Historical returns",
                        "capm" => "CAPM expected returns",
                        _ => "Return contributions (weight x CAPM)",
                    };
                    let _ = writeln!(out, "\n## {title}\n");
                    let _ = writeln!(out, "| | {} |", names.join(" | "));
                    let _ = writeln!(out, "|---|{}", "---:|".repeat(names.len()));
                    current = section;
                }
                let _ = writeln!(out, "| {} | {} |", item, cells.join(" | "));
            }
        }
    }
    out
}
