//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use chrono::{Datelike, NaiveDate, Weekday};
use frontera::linalg::Matrix;
use frontera::market_data::{align_panel, PricePanel, PricePoint, PriceSeries};
use frontera::report::ReplayInput;
use rand::Rng;

pub const REFERENCE_WINDOWS: [&str; 6] = ["2015_2023", "2015_2019", "2016_2020", "2020", "2020_2023", "2023"];

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn reference_fixture(window: &str) -> ReplayInput {
    let path = fixture_path(&format!("reference/{window}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ReplayInput::from_json(&text).unwrap()
}

/// A random, well-conditioned covariance problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub cov: Matrix,
    pub expected_returns: Vec<f64>,
    pub rf: f64,
}

/// Covariance from vols in [0.1, 0.5] and a two-factor-plus-idiosyncratic
/// correlation, so the smallest eigenvalue stays well away from zero.
/// Expected returns in [-0.05, 0.20] with a spread of at least 2pp.
pub fn random_instance(rng: &mut impl Rng, n: usize) -> Instance {
    let vols: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..0.5)).collect();
    let loadings: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)]).collect();
    let idio: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let raw = |i: usize, j: usize| {
        let f = loadings[i][0] * loadings[j][0] + loadings[i][1] * loadings[j][1];
        if i == j {
            f + idio[i]
        } else {
            f
        }
    };
    let mut cov = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let corr = raw(i, j) / (raw(i, i) * raw(j, j)).sqrt();
            cov[(i, j)] = corr * vols[i] * vols[j];
        }
    }
    // Exact symmetry regardless of evaluation order.
    for i in 0..n {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    let expected_returns = loop {
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.05..0.20)).collect();
        let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo >= 0.02 {
            break e;
        }
    };
    Instance {
        cov,
        expected_returns,
        rf: rng.gen_range(0.0..0.10),
    }
}

pub fn weekdays(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(count)
        .collect()
}

/// Market plus `betas.len()` assets driven by it, as raw close prices.
/// Each asset skips one day so alignment has something to do.
pub fn synthetic_panel(rng: &mut impl Rng, betas: &[f64], days: usize, market_drift: f64) -> PricePanel {
    let dates = weekdays(NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(), days);
    let noise = |rng: &mut dyn rand::RngCore, sd: f64| -> f64 {
        // Sum of uniforms: cheap, bounded, roughly normal.
        let s: f64 = (0..12).map(|_| rng.gen_range(-0.5..0.5)).sum();
        s * sd
    };
    let market_returns: Vec<f64> = (0..days).map(|_| market_drift + noise(rng, 0.01)).collect();
    let to_series = |id: &str, returns: &[f64], skip: Option<usize>| {
        let mut price = 100.0;
        let mut points = Vec::new();
        for (i, (d, r)) in dates.iter().zip(returns).enumerate() {
            if i > 0 {
                price *= 1.0 + r;
            }
            if Some(i) != skip {
                points.push(PricePoint { date: *d, close: price });
            }
        }
        PriceSeries::new(id, points).unwrap()
    };
    let market = to_series("MKT", &market_returns, None);
    let assets = betas
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let r: Vec<f64> = market_returns.iter().map(|m| 0.0001 * k as f64 + b * m + noise(rng, 0.008)).collect();
            to_series(&format!("A{k}"), &r, Some(10 + 7 * k))
        })
        .collect();
    align_panel(assets, market).unwrap()
}
