//! JSON configuration for the `solve` and `bench` commands.

use std::path::PathBuf;

use kinosipp_core::heuristics::HeuristicKind;
use kinosipp_core::scenario::WarehouseLayout;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Where the benchmark map comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSource {
    /// A map file in the MovingAI text format.
    Path(PathBuf),
    /// A named warehouse preset, optionally with other block gaps.
    Preset {
        name: String,
        #[serde(default)]
        gap_x: Option<u32>,
        #[serde(default)]
        gap_y: Option<u32>,
    },
}

impl MapSource {
    pub fn label(&self) -> String {
        match self {
            MapSource::Path(p) => p
                .file_stem()
                .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()),
            MapSource::Preset { name, .. } => name.clone(),
        }
    }

    pub fn layout(&self) -> Option<Result<WarehouseLayout, ConfigError>> {
        let MapSource::Preset { name, gap_x, gap_y } = self else {
            return None;
        };
        Some(
            WarehouseLayout::preset(name)
                .map(|l| WarehouseLayout {
                    gap_x: gap_x.unwrap_or(l.gap_x),
                    gap_y: gap_y.unwrap_or(l.gap_y),
                    ..l
                })
                .ok_or_else(|| ConfigError::Invalid(format!("unknown preset {name:?}"))),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSet {
    pub v_max: f64,
    pub a_acc: f64,
    pub a_dec: f64,
}

fn default_timeout() -> f64 {
    60.0
}

fn default_rot_time() -> f64 {
    1.0
}

fn default_cell_size() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub maps: Vec<MapSource>,
    pub agents: usize,
    pub seeds: Vec<u64>,
    pub limits: Vec<LimitSet>,
    pub steps: Vec<f64>,
    pub heuristics: Vec<String>,
    /// Fixed cruising speeds for the baseline; empty for none.
    #[serde(default)]
    pub baseline_speeds: Vec<f64>,
    /// Heuristic used for baseline runs.
    #[serde(default = "default_baseline_heuristic")]
    pub baseline_heuristic: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_rot_time")]
    pub rot_time: f64,
    #[serde(default = "default_cell_size")]
    pub cell_size: f64,
}

fn default_baseline_heuristic() -> String {
    "h2".into()
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.maps.is_empty() {
            return bad("no maps");
        }
        if self.seeds.is_empty() {
            return bad("no seeds");
        }
        if self.limits.is_empty() {
            return bad("no kinematic limits");
        }
        if self.steps.is_empty() {
            return bad("no speed steps");
        }
        if self.heuristics.is_empty() {
            return bad("no heuristics");
        }
        if !(self.timeout_secs > 0.0) {
            return bad("timeout must be positive");
        }
        if self.steps.iter().any(|s| !(*s > 0.0)) {
            return bad("speed steps must be positive");
        }
        if self.baseline_speeds.iter().any(|s| !(*s > 0.0)) {
            return bad("baseline speeds must be positive");
        }
        for h in self.heuristics.iter().chain([&self.baseline_heuristic]) {
            if HeuristicKind::parse(h).is_none() {
                return Err(ConfigError::Invalid(format!("unknown heuristic {h:?}")));
            }
        }
        for m in &self.maps {
            if let Some(l) = m.layout() {
                l?;
            }
        }
        Ok(())
    }

    pub fn heuristic_kinds(&self) -> Vec<HeuristicKind> {
        self.heuristics.iter().filter_map(|h| HeuristicKind::parse(h)).collect()
    }
}

/// Settings of the `solve` command. Every field mirrors a flag; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub map: Option<PathBuf>,
    pub scen: Option<PathBuf>,
    pub vmax: Option<f64>,
    pub acc: Option<f64>,
    pub dec: Option<f64>,
    pub step: Option<f64>,
    pub heuristic: Option<String>,
    pub rot_time: Option<f64>,
    pub cell_size: Option<f64>,
    pub order_seed: Option<u64>,
    pub fixed_speed: Option<f64>,
    pub out: Option<PathBuf>,
    pub force: Option<bool>,
    pub time_limit: Option<f64>,
}
