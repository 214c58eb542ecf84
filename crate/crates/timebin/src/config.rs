//! Experiment configuration, read from TOML.
//!
//! Every field has a default, so an empty file runs the baseline: n = 8 Gray
//! coded bins, Gaussian jitter of a quarter bin, automatic per-layer rates.

use std::path::Path;

use serde::{Deserialize, Serialize};
use timebin_core::binning::{FrameConfig, Mapping};
use timebin_core::info::Metric;
use timebin_core::privacy::DEFAULT_SECURITY_MARGIN;
use timebin_core::reconcile::DecoderSettings;
use timebin_core::source::{DetectorParams, SourceParams};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub source: SourceConfig,
    pub detector_alice: DetectorConfig,
    pub detector_bob: DetectorConfig,
    pub frame: FrameSection,
    pub codes: CodesConfig,
    pub privacy: PrivacyConfig,
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    /// Pairs per second.
    pub pair_rate: f64,
    /// Seconds.
    pub coherence_time: f64,
    /// Simulated seconds.
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub jitter_sigma: f64,
    pub dead_time: f64,
    pub dark_rate: f64,
    pub efficiency: f64,
    pub num_detectors: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    pub frame_duration: f64,
    pub bins_per_frame: u32,
    pub mapping: MappingName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingName {
    Natural,
    Gray,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodesConfig {
    /// Fixed design rate per layer, most significant first. Empty selects
    /// rates from the training frames.
    pub rates: Vec<f64>,
    /// Fraction of retained frames spent on estimating the channel model.
    pub training_fraction: f64,
    pub max_iters: usize,
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrivacyConfig {
    pub security_margin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub candidates: Vec<u32>,
    pub metric: MetricName,
    pub model: SweepModelName,
    /// Offset span for the uniform-offset model, seconds.
    pub offset_span: f64,
    /// Frames per candidate for the uniform-offset model.
    pub frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    BitsPerFrame,
    BitsPerSecond,
    BitsPerPhoton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepModelName {
    Simulated,
    UniformOffset,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Also write `alice_tags.csv` and `bob_tags.csv`.
    pub export_tags: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            source: SourceConfig::default(),
            detector_alice: DetectorConfig::default(),
            detector_bob: DetectorConfig::default(),
            frame: FrameSection::default(),
            codes: CodesConfig::default(),
            privacy: PrivacyConfig::default(),
            sweep: None,
            output: OutputConfig::default(),
        }
    }
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            pair_rate: 5e5,
            coherence_time: 1e-6,
            duration: 0.1,
        }
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            jitter_sigma: 1e-6 / 8.0 / 4.0,
            dead_time: 0.0,
            dark_rate: 1e3,
            efficiency: 0.9,
            num_detectors: 1,
        }
    }
}

impl Default for FrameSection {
    fn default() -> Self {
        FrameSection {
            frame_duration: 1e-6,
            bins_per_frame: 8,
            mapping: MappingName::Gray,
        }
    }
}

impl Default for CodesConfig {
    fn default() -> Self {
        CodesConfig {
            rates: Vec::new(),
            training_fraction: 0.1,
            max_iters: 100,
            damping: 1.0,
        }
    }
}

impl Default for PrivacyConfig {
    fn default() -> Self {
        PrivacyConfig {
            security_margin: DEFAULT_SECURITY_MARGIN,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            candidates: vec![2, 4, 8, 16, 32],
            metric: MetricName::BitsPerSecond,
            model: SweepModelName::Simulated,
            offset_span: 0.25e-6,
            frames: 100_000,
        }
    }
}

impl From<MappingName> for Mapping {
    fn from(m: MappingName) -> Self {
        match m {
            MappingName::Natural => Mapping::Natural,
            MappingName::Gray => Mapping::Gray,
        }
    }
}

impl From<MetricName> for Metric {
    fn from(m: MetricName) -> Self {
        match m {
            MetricName::BitsPerFrame => Metric::BitsPerFrame,
            MetricName::BitsPerSecond => Metric::BitsPerSecond,
            MetricName::BitsPerPhoton => Metric::BitsPerPhoton,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> AppResult<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn source_params(&self) -> SourceParams {
        SourceParams {
            pair_rate: self.source.pair_rate,
            coherence_time: self.source.coherence_time,
            duration: self.source.duration,
        }
    }

    pub fn frame_config(&self) -> AppResult<FrameConfig> {
        FrameConfig::new(
            self.frame.frame_duration,
            self.frame.bins_per_frame,
            self.frame.mapping.into(),
        )
        .map_err(|e| AppError::stage("frame", e))
    }

    pub fn decoder_settings(&self) -> DecoderSettings {
        DecoderSettings {
            max_iters: self.codes.max_iters,
            damping: self.codes.damping,
        }
    }

    /// Checks every nested parameter block.
    pub fn validate(&self) -> AppResult<()> {
        self.source_params()
            .validate()
            .map_err(|e| AppError::stage("source", e))?;
        self.detector_alice
            .params()
            .validate()
            .map_err(|e| AppError::stage("detector_alice", e))?;
        self.detector_bob
            .params()
            .validate()
            .map_err(|e| AppError::stage("detector_bob", e))?;
        self.frame_config()?;
        self.decoder_settings()
            .validate()
            .map_err(|e| AppError::stage("codes", e))?;
        let c = &self.codes;
        if !(c.training_fraction > 0.0 && c.training_fraction < 1.0) {
            return Err(AppError::Parameter(
                "codes.training_fraction must lie in (0, 1)".into(),
            ));
        }
        if !c.rates.is_empty() {
            let width = self.frame.bins_per_frame.trailing_zeros() as usize;
            if c.rates.len() != width {
                return Err(AppError::Parameter(format!(
                    "codes.rates lists {} layers, bins_per_frame needs {width}",
                    c.rates.len()
                )));
            }
            if let Some(r) = c.rates.iter().find(|r| !(0.0..1.0).contains(*r)) {
                return Err(AppError::Parameter(format!(
                    "codes.rates entry {r} outside [0, 1)"
                )));
            }
        }
        if let Some(s) = &self.sweep {
            if s.candidates.is_empty() {
                return Err(AppError::Parameter("sweep.candidates is empty".into()));
            }
            if let Some(n) = s
                .candidates
                .iter()
                .find(|n| !n.is_power_of_two() || **n < 2)
            {
                return Err(AppError::Parameter(format!(
                    "sweep candidate {n} is not a power of two >= 2"
                )));
            }
            if s.model == SweepModelName::UniformOffset && !(s.offset_span > 0.0 && s.frames > 0) {
                return Err(AppError::Parameter(
                    "uniform-offset sweep needs offset_span > 0 and frames > 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Copy with `bins_per_frame = n`; fixed per-layer rates are dropped
    /// because their count depends on `n`.
    pub fn with_bins(&self, n: u32) -> Self {
        let mut cfg = self.clone();
        cfg.frame.bins_per_frame = n;
        if cfg.codes.rates.len() != n.trailing_zeros() as usize {
            cfg.codes.rates.clear();
        }
        cfg
    }
}

impl DetectorConfig {
    pub fn params(&self) -> DetectorParams {
        DetectorParams {
            jitter_sigma: self.jitter_sigma,
            dead_time: self.dead_time,
            dark_rate: self.dark_rate,
            efficiency: self.efficiency,
            num_detectors: self.num_detectors,
        }
    }
}
