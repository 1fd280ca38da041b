//! Run configuration: JSON document layered over built-in defaults.
//!
//! Resolution order: defaults, then the config file, then `--set` overrides.
//! Every key must already exist in the defaults, so typos are errors.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog::CatalogOptions;
use crate::equilibrium::{ClaimParams, MarketParams};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::hawkes::{CalibrationOptions, HawkesParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub horizon: f64,
    pub steps: usize,
}

impl GridConfig {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSection {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    /// Dump per-path terminal wealth.
    pub keep_paths: bool,
    /// `vanilla` or `pd`.
    pub strategy: StrategyKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Vanilla,
    Pd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub delta: Vec<f64>,
    pub p: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub market: MarketParams,
    pub claims: ClaimParams,
    pub hawkes: HawkesParams,
    pub grid: GridConfig,
    pub sim: SimSection,
    pub sweep: SweepConfig,
    pub catalog: CatalogOptions,
    pub calibration: CalibrationOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        let hawkes = HawkesParams::sichuan();
        Self {
            market: MarketParams::default(),
            claims: ClaimParams::default(),
            hawkes,
            grid: GridConfig {
                horizon: 10.0,
                steps: 4096,
            },
            sim: SimSection {
                paths: 20_000,
                steps: 256,
                seed: 20_080_512,
                keep_paths: false,
                strategy: StrategyKind::Vanilla,
            },
            sweep: SweepConfig {
                delta: vec![0.6, 0.7, 0.8, 0.9, 1.0],
                p: vec![hawkes.kernel.p],
                gamma: vec![0.5, 1.0, 1.5],
            },
            catalog: CatalogOptions::default(),
            calibration: CalibrationOptions::default(),
        }
    }
}

impl RunConfig {
    /// Layers `file` (if any) and `overrides` (`a.b.c=value`) onto the defaults.
    pub fn resolve(file: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut doc = serde_json::to_value(Self::default())?;
        if let Some(text) = file {
            let user: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
            merge(&mut doc, user, "")?;
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Self = serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.market.validate()?;
        self.claims.validate()?;
        self.hawkes.validate()?;
        self.grid.grid()?;
        self.catalog.validate()?;
        if self.sim.paths == 0 {
            return Err(Error::Config("sim.paths must be >= 1".into()));
        }
        if self.sim.steps < 2 {
            return Err(Error::Config("sim.steps must be >= 2".into()));
        }
        Ok(())
    }
}

fn merge(base: &mut Value, user: Value, path: &str) -> Result<()> {
    match (base, user) {
        (Value::Object(b), Value::Object(u)) => {
            for (k, v) in u {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                let slot = b.get_mut(&k).ok_or_else(|| Error::Config(format!("unknown key `{sub}`")))?;
                merge(slot, v, &sub)?;
            }
            Ok(())
        }
        (Value::Object(_), other) => Err(Error::Config(format!("`{path}` must be an object, got {other}"))),
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

/// `a.b=value`; the value is parsed as JSON, falling back to a plain string.
fn apply_override(doc: &mut Value, text: &str) -> Result<()> {
    let (path, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{text}` is not of the form key.path=value")))?;
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let path = path.trim();
    let mut nested = value;
    for key in path.rsplit('.') {
        let mut m = serde_json::Map::new();
        m.insert(key.to_string(), nested);
        nested = Value::Object(m);
    }
    merge(doc, nested, "")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::resolve(None, &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.market.theta, 5.0);
        assert_eq!(cfg.hawkes.lambda_star, 6.310_822);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::resolve(Some(r#"{"market": {"gamma": 0.5}, "hawkes": {"p": 0.0}}"#), &[]).unwrap();
        assert_eq!(cfg.market.gamma, 0.5);
        assert_eq!(cfg.market.delta, 0.6);
        assert_eq!(cfg.hawkes.kernel.p, 0.0);
        assert_eq!(cfg.hawkes.kernel.rho1, 1.079_113);
    }

    #[test]
    fn overrides_win_over_file() {
        let cfg = RunConfig::resolve(
            Some(r#"{"market": {"gamma": 0.5}}"#),
            &["market.gamma=1.5".into(), "sim.strategy=pd".into(), "sweep.delta=[1.0]".into()],
        )
        .unwrap();
        assert_eq!(cfg.market.gamma, 1.5);
        assert_eq!(cfg.sim.strategy, StrategyKind::Pd);
        assert_eq!(cfg.sweep.delta, vec![1.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::resolve(Some(r#"{"market": {"gama": 1}}"#), &[]), Err(Error::Config(_))));
        assert!(RunConfig::resolve(None, &["market.gama=1".into()]).is_err());
        assert!(RunConfig::resolve(None, &["market=1".into()]).is_err());
        assert!(RunConfig::resolve(None, &["nonsense".into()]).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::resolve(None, &["market.gamma=0".into()]).is_err());
        assert!(RunConfig::resolve(None, &["grid.steps=1".into()]).is_err());
        assert!(RunConfig::resolve(Some("{not json"), &[]).is_err());
    }

    #[test]
    fn window_override() {
        let cfg = RunConfig::resolve(None, &["catalog.end=\"2023-01-01T00:00:00Z\"".into()]).unwrap();
        assert!((cfg.catalog.horizon_years() - 15.0).abs() < 1e-2);
    }
}
