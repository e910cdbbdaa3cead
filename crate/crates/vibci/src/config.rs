//! Experiment configuration file (TOML).
//!
//! Every field has a documented default; a minimal config only needs to pick
//! a data source. Exactly one of `[synth]` (generate sessions) or `[data]`
//! (ingest recordings + manifests) must be present.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsp::FilterChainConfig;
use crate::error::{Error, Result};
use crate::signal::ProtocolId;
use crate::synth::{default_spatial_gains, NoiseConfig, ResponseConfig, SpatialGain, SynthConfig};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub id: ProtocolId,
    pub rate_hz: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            id: ProtocolId::P3a,
            rate_hz: 256.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub overlap: f64,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            segment_len: crate::spectral::DEFAULT_SEGMENT_LEN,
            overlap: crate::spectral::DEFAULT_OVERLAP,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Feature band in Hz, inclusive on both ends.
    pub band: (f64, f64),
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { band: (2.0, 36.0) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningConfig {
    pub c_grid: Vec<f64>,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            c_grid: crate::svm::DEFAULT_C_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Electrode whose per-class averaged PSD curves are emitted.
    pub electrode: String,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            electrode: "AF4".to_string(),
        }
    }
}

/// Synthetic data source: how many sessions to generate per split plus the
/// generator parameters (rate and seeds are injected by the experiment).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub train_sessions: usize,
    pub test_sessions: usize,
    pub noise: NoiseConfig,
    pub response: ResponseConfig,
    pub vi_attenuation: f64,
    /// Optional per-electrode gain overrides on top of the defaults.
    pub spatial_gains: BTreeMap<String, SpatialGain>,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            train_sessions: 13,
            test_sessions: 6,
            noise: NoiseConfig::default(),
            response: ResponseConfig::default(),
            vi_attenuation: 0.3,
            spatial_gains: BTreeMap::new(),
        }
    }
}

impl SynthSection {
    /// Builds the generator config for one session.
    pub fn to_synth_config(&self, rate: f64, seed: u64) -> SynthConfig {
        let mut gains = default_spatial_gains();
        for (k, v) in &self.spatial_gains {
            gains.insert(k.clone(), *v);
        }
        SynthConfig {
            rate,
            noise: self.noise,
            response: self.response.clone(),
            spatial_gains: gains,
            vi_attenuation: self.vi_attenuation,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataEntry {
    pub recording: PathBuf,
    pub manifest: PathBuf,
}

/// File-based data source.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub train: Vec<DataEntry>,
    pub test: Vec<DataEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub protocol: ProtocolConfig,
    pub filters: FilterChainConfig,
    pub welch: WelchConfig,
    pub features: FeatureConfig,
    pub tuning: TuningConfig,
    pub report: ReportConfig,
    pub synth: Option<SynthSection>,
    pub data: Option<DataSection>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: 0,
            out_dir: PathBuf::from("out"),
            protocol: ProtocolConfig::default(),
            filters: FilterChainConfig::default(),
            welch: WelchConfig::default(),
            features: FeatureConfig::default(),
            tuning: TuningConfig::default(),
            report: ReportConfig::default(),
            synth: Some(SynthSection::default()),
            data: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::validation(format!("config: {e}")))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config = Self::from_toml(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::validation(format!(
                "unsupported config schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.protocol.rate_hz > 0.0) {
            return Err(Error::validation("protocol.rate_hz must be positive"));
        }
        if self.welch.segment_len < 8 {
            return Err(Error::validation("welch.segment_len must be at least 8"));
        }
        if !(0.0..1.0).contains(&self.welch.overlap) {
            return Err(Error::validation("welch.overlap must be in [0, 1)"));
        }
        let (lo, hi) = self.features.band;
        if !(0.0 <= lo && lo <= hi) {
            return Err(Error::validation(format!("features.band ({lo}, {hi}) is invalid")));
        }
        if self.tuning.c_grid.is_empty()
            || self.tuning.c_grid.iter().any(|c| !(*c > 0.0) || !c.is_finite())
        {
            return Err(Error::validation("tuning.c_grid must be non-empty and positive"));
        }
        if self.report.electrode.is_empty() {
            return Err(Error::validation("report.electrode must be set"));
        }
        match (&self.synth, &self.data) {
            (Some(_), Some(_)) => {
                return Err(Error::validation(
                    "config declares both [synth] and [data]; pick one data source",
                ));
            }
            (None, None) => {
                return Err(Error::validation(
                    "config needs a data source: either [synth] or [data]",
                ));
            }
            (Some(synth), None) => {
                if synth.train_sessions == 0 || synth.test_sessions == 0 {
                    return Err(Error::validation(
                        "synth.train_sessions and synth.test_sessions must be positive",
                    ));
                }
            }
            (None, Some(data)) => {
                if data.train.is_empty() || data.test.is_empty() {
                    return Err(Error::validation(
                        "data.train and data.test must both list at least one session",
                    ));
                }
                for entry in data.train.iter().chain(&data.test) {
                    for p in [&entry.recording, &entry.manifest] {
                        if !p.exists() {
                            return Err(Error::validation(format!(
                                "referenced file does not exist: {}",
                                p.display()
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let config = ExperimentConfig::default();
        config.validate().unwrap();
        let text = config.to_toml();
        let parsed = ExperimentConfig::from_toml(&text).unwrap();
        parsed.validate().unwrap();
        assert_eq!(parsed.seed, config.seed);
        assert_eq!(parsed.welch.segment_len, 512);
        assert_eq!(parsed.tuning.c_grid, crate::svm::DEFAULT_C_GRID.to_vec());
    }

    #[test]
    fn minimal_toml_fills_defaults() {
        let config = ExperimentConfig::from_toml("[synth]\ntrain_sessions = 2\ntest_sessions = 1\n").unwrap();
        config.validate().unwrap();
        assert_eq!(config.protocol.rate_hz, 256.0);
        assert_eq!(config.filters.bandpass_order, 8);
        assert_eq!(config.synth.as_ref().unwrap().train_sessions, 2);
    }

    #[test]
    fn bad_configs_are_rejected() {
        // Unknown key.
        assert!(ExperimentConfig::from_toml("nonsense_key = 3\n[synth]\n").is_err());
        // Both sources.
        let both = "\n[synth]\n[data]\n[[data.train]]\nrecording = \"a\"\nmanifest = \"b\"\n[[data.test]]\nrecording = \"c\"\nmanifest = \"d\"\n";
        let config = ExperimentConfig::from_toml(both).unwrap();
        assert!(config.validate().is_err());
        // No source.
        let neither: ExperimentConfig =
            ExperimentConfig { synth: None, data: None, ..ExperimentConfig::default() };
        assert!(neither.validate().is_err());
        // Missing referenced file.
        let missing = ExperimentConfig {
            synth: None,
            data: Some(DataSection {
                train: vec![DataEntry {
                    recording: PathBuf::from("/nonexistent/rec.csv"),
                    manifest: PathBuf::from("/nonexistent/m.txt"),
                }],
                test: vec![DataEntry {
                    recording: PathBuf::from("/nonexistent/rec2.csv"),
                    manifest: PathBuf::from("/nonexistent/m2.txt"),
                }],
            }),
            ..ExperimentConfig::default()
        };
        assert!(missing.validate().is_err());
        // Bad schema version.
        let config = ExperimentConfig { schema_version: 99, ..ExperimentConfig::default() };
        assert!(config.validate().is_err());
    }

    #[test]
    fn synth_section_applies_gain_overrides() {
        let mut section = SynthSection::default();
        section.spatial_gains.insert(
            "AF4".to_string(),
            SpatialGain { ssvep: 0.0, vi: 0.0 },
        );
        let sc = section.to_synth_config(256.0, 5);
        assert_eq!(sc.spatial_gains["AF4"], SpatialGain { ssvep: 0.0, vi: 0.0 });
        assert_eq!(sc.spatial_gains["O1"], SpatialGain { ssvep: 1.0, vi: 1.0 });
        assert_eq!(sc.seed, 5);
    }
}
