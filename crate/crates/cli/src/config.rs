//! TOML run configuration. Every section is optional; defaults reproduce the
//! reference parameter set.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use serde::Deserialize;

use dotd_core::report::{Format, Scenario, WalkerParams};
use dotd_core::routing::RouteMetric;
use dotd_core::{RadioConfig, TopologyConfig, VisibilityConfig};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// RFC 3339 instant; defaults to the newest TLE epoch.
    pub start: Option<DateTime<Utc>>,
    /// Slot length, seconds.
    pub tau: f64,
    /// Horizon, seconds.
    pub horizon: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { start: None, tau: 1.0, horizon: 600.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tle: Option<PathBuf>,
    pub fetch_url: Option<String>,
    pub fetch_timeout_secs: f64,
    /// Seeds the synthetic constellation when `[walker]` is the source.
    pub seed: Option<u64>,
    pub algorithms: Option<Vec<String>>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub route_metric: RouteMetric,
    pub grid: GridSection,
    pub visibility: VisibilityConfig,
    pub radio: RadioConfig,
    pub topology: TopologyConfig,
    /// Synthetic constellation used when no TLE source is given.
    pub walker: Option<WalkerParams>,
    pub scenarios: Option<Vec<Scenario>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tle: None,
            fetch_url: None,
            fetch_timeout_secs: 30.0,
            seed: None,
            algorithms: None,
            output: None,
            format: None,
            route_metric: RouteMetric::Latency,
            grid: GridSection::default(),
            visibility: VisibilityConfig::default(),
            radio: RadioConfig::default(),
            topology: TopologyConfig::default(),
            walker: None,
            scenarios: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        // Relative TLE paths are relative to the config file.
        if let (Some(tle), Some(dir)) = (cfg.tle.as_mut(), path.parent()) {
            if tle.is_relative() {
                *tle = dir.join(&*tle);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.visibility.validate().context("invalid [visibility] section")?;
        self.radio.validate().context("invalid [radio] section")?;
        if self.topology.max_links == 0 {
            bail!("invalid [topology] section: max_links must be at least 1");
        }
        if !(self.fetch_timeout_secs > 0.0) {
            bail!("fetch_timeout_secs must be positive");
        }
        for sc in self.scenarios.iter().flatten() {
            sc.validate().with_context(|| format!("invalid scenario {}", sc.name))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg.grid, GridSection::default());
        assert_eq!(cfg.topology, TopologyConfig::default());
        assert_eq!(cfg.visibility, VisibilityConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn sections_parse() {
        let cfg: RunConfig = toml::from_str(
            r#"
            tle = "sats.tle"
            algorithms = ["dotd", "plusgrid"]
            format = "json"
            [grid]
            start = "2024-03-01T12:00:00Z"
            tau = 10.0
            horizon = 300.0
            [visibility]
            min_elevation = 30.0
            max_elevation_mode = "computed"
            [topology]
            w1 = 0.5
            w2 = 0.3
            max_links = 3
            selection_order = "per-satellite"
            [[scenarios]]
            name = "A-B"
            source = { name = "A", latitude = 1.0, longitude = 2.0 }
            destination = { name = "B", latitude = 3.0, longitude = 4.0 }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.grid.tau, 10.0);
        assert_eq!(cfg.visibility.min_elevation, 30.0);
        assert_eq!(cfg.topology.max_links, 3);
        assert_eq!(cfg.topology.weights.capacity(), 0.5);
        assert_eq!(cfg.scenarios.as_ref().unwrap()[0].destination.longitude, 4.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_weights_and_unknown_keys() {
        assert!(toml::from_str::<RunConfig>("[topology]\nw1 = 0.8\nw2 = 0.4\n").is_err());
        assert!(toml::from_str::<RunConfig>("bogus = 1\n").is_err());
        let cfg: RunConfig = toml::from_str("[visibility]\nmin_elevation = 95.0\n").unwrap();
        assert!(cfg.validate().is_err());
    }
}
