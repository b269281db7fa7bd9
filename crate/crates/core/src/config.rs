//! Run configuration: everything needed to reproduce a run, serialized
//! alongside every report.

use crate::construction::ConstructionParams;
use crate::error::Error;
use crate::geometry::Flat;
use crate::stats::TubeStrategy;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Version tag embedded in configs and reports.
pub const FORMAT_VERSION: u32 = 1;

fn default_version() -> u32 {
    FORMAT_VERSION
}

fn default_trials() -> usize {
    1000
}

fn default_member_budget() -> usize {
    256
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    /// One of the registered experiment names; unused by `generate`.
    #[serde(default)]
    pub experiment: Option<String>,
    pub params: ConstructionParams,
    pub rule: String,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Target level `n` for the conditional/tail experiments.
    #[serde(default)]
    pub level: Option<usize>,
    #[serde(default)]
    pub flat: Option<FlatConfig>,
    #[serde(default)]
    pub concentration: Option<ConcentrationConfig>,
    #[serde(default)]
    pub tube_scan: Option<TubeScanConfig>,
    #[serde(default)]
    pub box_dim: Option<BoxDimConfig>,
    #[serde(default)]
    pub ahlfors: Option<AhlforsConfig>,
    #[serde(default = "default_member_budget")]
    pub net_member_budget: usize,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        if cfg.version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {FORMAT_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn require_level(&self) -> Result<usize> {
        self.level
            .ok_or_else(|| Error::Config("missing 'level'".into()))
    }

    pub fn require_flat(&self) -> Result<Flat> {
        self.flat
            .as_ref()
            .ok_or_else(|| Error::Config("missing 'flat'".into()))?
            .build()
    }

    pub fn require_concentration(&self) -> Result<&ConcentrationConfig> {
        self.concentration
            .as_ref()
            .ok_or_else(|| Error::Config("missing 'concentration'".into()))
    }
}

/// A flat given by a base point and a spanning set (orthonormalized on load).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatConfig {
    pub base: Vec<f64>,
    pub spanning: Vec<Vec<f64>>,
}

impl FlatConfig {
    pub fn build(&self) -> Result<Flat> {
        Flat::from_spanning(self.base.clone(), self.spanning.clone())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub t: f64,
    pub k: usize,
    pub eps: f64,
    /// Optional overrides of the derived MGF parameters.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub lambda0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TubeScanConfig {
    pub t_values: Vec<f64>,
    pub widths: Vec<f64>,
    pub tubes_per_width: usize,
    pub strategy: TubeStrategy,
    /// Pass bound on the growth factor of `max μ(T)/w^t` from the widest
    /// scanned width to the narrowest resolution-safe one.
    #[serde(default = "default_growth_bound")]
    pub growth_bound: f64,
}

fn default_growth_bound() -> f64 {
    4.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxDimConfig {
    pub directions: usize,
    pub depth_min: usize,
    pub depth_max: usize,
    /// Slope window accepted as a pass.
    #[serde(default = "default_slope_min")]
    pub slope_min: f64,
    #[serde(default = "default_slope_max")]
    pub slope_max: f64,
}

fn default_slope_min() -> f64 {
    0.9
}

fn default_slope_max() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AhlforsConfig {
    pub samples: usize,
    pub radii: Vec<f64>,
    /// Defaults to the construction's limit dimension.
    #[serde(default)]
    pub exponent: Option<f64>,
    /// Frozen pass bound on max/min ratio.
    #[serde(default = "default_ahlfors_bound")]
    pub ratio_bound: f64,
}

fn default_ahlfors_bound() -> f64 {
    16.0
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "params": {"dim": 2, "levels": [{"branching": 2, "keep": 2}]},
        "rule": "uniform",
        "seed": 3
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.version, FORMAT_VERSION);
        assert_eq!(cfg.trials, 1000);
        assert_eq!(cfg.net_member_budget, 256);
        assert!(cfg.experiment.is_none());
        assert_eq!(cfg.params.branching_bound, 0);
        assert_eq!(cfg.params.bound(), 2);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let text = MINIMAL.replacen('{', "{\"version\": 99,", 1);
        assert!(matches!(RunConfig::from_json(&text), Err(Error::Config(_))));
    }

    #[test]
    fn missing_required_field_is_a_parse_error() {
        let text = MINIMAL.replace("\"rule\": \"uniform\",", "");
        assert!(matches!(RunConfig::from_json(&text), Err(Error::Json(_))));
    }

    #[test]
    fn missing_sections_are_reported_by_name() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        let level_err = cfg.require_level().unwrap_err().to_string();
        assert!(level_err.contains("level"), "{level_err}");
        let flat_err = cfg.require_flat().unwrap_err().to_string();
        assert!(flat_err.contains("flat"), "{flat_err}");
        let conc_err = cfg.require_concentration().unwrap_err().to_string();
        assert!(conc_err.contains("concentration"), "{conc_err}");
    }

    #[test]
    fn nested_defaults_apply() {
        let text = r#"{
            "params": {"dim": 2, "levels": [{"branching": 2, "keep": 2}]},
            "rule": "uniform",
            "seed": 3,
            "tube_scan": {"t_values": [0.8], "widths": [0.1], "tubes_per_width": 5, "strategy": "combined"},
            "box_dim": {"directions": 5, "depth_min": 2, "depth_max": 6},
            "ahlfors": {"samples": 10, "radii": [0.1]}
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.tube_scan.as_ref().unwrap().growth_bound, 4.0);
        assert_eq!(cfg.box_dim.as_ref().unwrap().slope_min, 0.9);
        assert_eq!(cfg.box_dim.as_ref().unwrap().slope_max, 1.0);
        assert_eq!(cfg.ahlfors.as_ref().unwrap().ratio_bound, 16.0);
        assert!(cfg.ahlfors.as_ref().unwrap().exponent.is_none());
    }

    #[test]
    fn flat_config_orthonormalizes_the_spanning_set() {
        let fc = FlatConfig {
            base: vec![0.5, 0.5, 0.5],
            spanning: vec![vec![2.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]],
        };
        let w = fc.build().unwrap();
        assert_eq!(w.dim(), 2);
        let dot: f64 = w.basis[0].iter().zip(&w.basis[1]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-12);
    }
}
