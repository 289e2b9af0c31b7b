//! JSON analysis configuration: asset universe, market index, windows.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{align_panel, parse_price_csv, PricePanel, PriceSeries, WindowSpec};
use crate::report::Units;
use crate::stats::DEFAULT_TRADING_DAYS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSource {
    pub id: String,
    pub csv_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Must be `"decimal"`: rates are fractions (0.0687), not percents.
    pub units: Units,
    pub assets: Vec<SeriesSource>,
    pub market: SeriesSource,
    pub windows: Vec<WindowSpec>,
    #[serde(default = "default_trading_days")]
    pub trading_days: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_trading_days() -> u32 {
    DEFAULT_TRADING_DAYS
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: AnalysisConfig = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Relative CSV and output paths are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::InvalidInput(format!("config not found: {}", path.display())),
            _ => Error::InvalidInput(format!("cannot read config {}: {e}", path.display())),
        })?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for a in &mut cfg.assets {
            resolve(&mut a.csv_path);
        }
        resolve(&mut cfg.market.csv_path);
        if let Some(dir) = &mut cfg.output_dir {
            resolve(dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.assets.is_empty() {
            return Err(Error::InvalidInput("assets: at least one asset required".into()));
        }
        let mut ids = HashSet::new();
        for a in self.assets.iter().chain(std::iter::once(&self.market)) {
            if !ids.insert(a.id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate series id `{}`", a.id)));
            }
        }
        let mut names = HashSet::new();
        for w in &self.windows {
            if !names.insert(w.name.as_str()) {
                return Err(Error::InvalidInput(format!("windows: duplicate window name `{}`", w.name)));
            }
            w.validate()?;
        }
        if self.trading_days < 1 {
            return Err(Error::InvalidInput("trading_days must be at least 1".into()));
        }
        Ok(())
    }

    pub fn window(&self, name: &str) -> Result<&WindowSpec> {
        self.windows
            .iter()
            .find(|w| w.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("no window named `{name}` in config")))
    }

    /// Reads every CSV and aligns the assets and market on common dates.
    pub fn load_panel(&self) -> Result<PricePanel> {
        let read = |s: &SeriesSource| -> Result<PriceSeries> {
            let bytes = fs::read(&s.csv_path)
                .map_err(|e| Error::InvalidInput(format!("{}: cannot read {}: {e}", s.id, s.csv_path.display())))?;
            parse_price_csv(&bytes, &s.id).map_err(|e| Error::InvalidInput(format!("{}: {e}", s.csv_path.display())))
        };
        let assets = self.assets.iter().map(read).collect::<Result<Vec<_>>>()?;
        let market = read(&self.market)?;
        align_panel(assets, market)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "units": "decimal",
        "assets": [{"id": "A", "csv_path": "a.csv"}],
        "market": {"id": "M", "csv_path": "m.csv"},
        "windows": [{"name": "w", "start": "2020-01-01", "end": "2020-12-31", "rf_annual": 0.05}]
    }"#;

    #[test]
    fn defaults() {
        let cfg = AnalysisConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.trading_days, 252);
        assert_eq!(cfg.output_dir, None);
        assert_eq!(cfg.windows[0].target_return, None);
    }

    #[test]
    fn units_are_mandatory() {
        let text = MINIMAL.replace(r#""units": "decimal","#, "");
        assert!(AnalysisConfig::from_json(&text).is_err());
        let text = MINIMAL.replace("decimal", "percent");
        assert!(AnalysisConfig::from_json(&text).is_err());
    }

    #[test]
    fn rejects_invalid() {
        let dup = MINIMAL.replace(
            r#""rf_annual": 0.05}]"#,
            r#""rf_annual": 0.05}, {"name": "w", "start": "2021-01-01", "end": "2021-12-31", "rf_annual": 0.05}]"#,
        );
        assert!(AnalysisConfig::from_json(&dup).is_err());
        let no_assets = MINIMAL.replace(r#"[{"id": "A", "csv_path": "a.csv"}]"#, "[]");
        assert!(AnalysisConfig::from_json(&no_assets).is_err());
        let zero_days = MINIMAL.replace(r#""units""#, r#""trading_days": 0, "units""#);
        assert!(AnalysisConfig::from_json(&zero_days).is_err());
        let typo = MINIMAL.replace("rf_annual", "rf");
        assert!(AnalysisConfig::from_json(&typo).is_err());
    }

    #[test]
    fn missing_file() {
        let err = AnalysisConfig::load(Path::new("/nonexistent/cfg.json")).unwrap_err();
        assert!(err.to_string().contains("config not found"));
    }
}
