//! Run configuration: a TOML document with one section per stage. Every
//! field has a default, and command-line flags override file values.

use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::gof::DEFAULT_CHI2_BINS;
use crate::ingest::SessionSpec;
use crate::scaling::{Reference, ShuffleMode};
use crate::tailfit::{Side, DEFAULT_MIN_TAIL};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub threads: Option<usize>,
    pub session: SessionSpec,
    pub ingest: IngestConfig,
    pub fit: FitConfig,
    pub gof: GofConfig,
    pub tails: TailConfig,
    pub scaling: ScalingConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            output_dir: PathBuf::from("."),
            threads: None,
            session: SessionSpec::default(),
            ingest: IngestConfig::default(),
            fit: FitConfig::default(),
            gof: GofConfig::default(),
            tails: TailConfig::default(),
            scaling: ScalingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub deseasonalize: bool,
    pub standardize: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self { deseasonalize: false, standardize: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub families: Vec<Family>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { families: vec![Family::Gaussian, Family::Stable, Family::Gh, Family::Nig, Family::SkewT] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GofConfig {
    pub levels: Vec<f64>,
    pub chi2_bins: usize,
    /// Parametric-bootstrap replicates per test; 0 disables the bootstrap.
    pub bootstrap: usize,
}

impl Default for GofConfig {
    fn default() -> Self {
        Self { levels: vec![0.05, 0.01], chi2_bins: DEFAULT_CHI2_BINS, bootstrap: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailConfig {
    pub sides: Vec<Side>,
    pub n_tail_min: usize,
    pub start_quantile: f64,
    pub max_candidates: Option<usize>,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self { sides: vec![Side::Left, Side::Right], n_tail_min: DEFAULT_MIN_TAIL, start_quantile: 0.75, max_candidates: None }
    }
}

/// One scaling experiment: the raw series or one reshuffle of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingRun {
    Raw,
    Global,
    DayBlock,
    WithinDaySlot,
}

impl ScalingRun {
    pub fn shuffle(self) -> Option<ShuffleMode> {
        match self {
            ScalingRun::Raw => None,
            ScalingRun::Global => Some(ShuffleMode::Global),
            ScalingRun::DayBlock => Some(ShuffleMode::DayBlock),
            ScalingRun::WithinDaySlot => Some(ShuffleMode::WithinDaySlot),
        }
    }
    pub fn as_str(self) -> &'static str {
        self.shuffle().map_or("raw", ShuffleMode::as_str)
    }
}

impl std::str::FromStr for ScalingRun {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(ScalingRun::Raw),
            "global" => Ok(ScalingRun::Global),
            "day_block" => Ok(ScalingRun::DayBlock),
            "within_day_slot" => Ok(ScalingRun::WithinDaySlot),
            _ => Err(Error::Input(format!("unknown scaling mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    /// Aggregation factors; defaults to powers of two up to half a day.
    pub scales: Option<Vec<usize>>,
    /// Rescaling exponent; estimated by DFA when absent.
    pub hurst: Option<f64>,
    pub modes: Vec<ScalingRun>,
    pub reference: Reference,
    pub histogram_bins: usize,
    pub histogram_range: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            scales: None,
            hurst: None,
            modes: vec![ScalingRun::Raw, ScalingRun::Global, ScalingRun::DayBlock, ScalingRun::WithinDaySlot],
            reference: Reference::StandardNormal,
            histogram_bins: 100,
            histogram_range: 8.0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}
