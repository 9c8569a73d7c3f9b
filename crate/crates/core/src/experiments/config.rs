use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PufError, Result};
use crate::fabrication::{CarvingPreset, FabricationParams, NoiseConfig};
use crate::metrics::{Looseness, DEFAULT_BIN_FRACTION};

pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// Everything that determines an experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub format_version: u32,
    pub preset: CarvingPreset,
    /// The first seed fabricates the chip both devices are carved from.
    pub chip_seeds: Vec<u64>,
    /// Carve device B from a different chip, with device A's slot map.
    pub adversary_seed: Option<u64>,
    /// Carve device B with exactly device A's slot map (a perfect clone).
    pub identical_carving: bool,
    pub challenge_seed: u64,
    pub noise_seed: u64,
    pub challenge_count: usize,
    pub repeat_count: usize,
    pub noise: NoiseConfig,
    pub fabrication: FabricationParams,
    pub bin_fraction: f64,
    /// Looseness used for the headline LHD statistics.
    pub looseness: Looseness,
    pub looseness_max: u32,
}

impl ExperimentConfig {
    pub fn small_pair() -> Self {
        Self {
            format_version: CONFIG_FORMAT_VERSION,
            preset: CarvingPreset::SmallPair,
            chip_seeds: vec![2020],
            adversary_seed: None,
            identical_carving: false,
            challenge_seed: 1,
            noise_seed: 7,
            challenge_count: 2000,
            repeat_count: 500,
            noise: NoiseConfig::default(),
            fabrication: FabricationParams::default(),
            bin_fraction: DEFAULT_BIN_FRACTION,
            looseness: Looseness::SMALL_DEVICE,
            looseness_max: 10,
        }
    }

    pub fn large_pair() -> Self {
        Self {
            preset: CarvingPreset::LargePair,
            challenge_count: 1000,
            ..Self::small_pair()
        }
    }

    pub fn for_preset(preset: CarvingPreset) -> Self {
        match preset {
            CarvingPreset::SmallPair => Self::small_pair(),
            CarvingPreset::LargePair => Self::large_pair(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != CONFIG_FORMAT_VERSION {
            return Err(PufError::FormatVersion {
                found: self.format_version,
                expected: CONFIG_FORMAT_VERSION,
            });
        }
        if self.chip_seeds.is_empty() {
            return Err(PufError::Config("at least one chip seed is required".into()));
        }
        if self.challenge_count == 0 {
            return Err(PufError::Config("challenge_count must be >= 1".into()));
        }
        if self.repeat_count < 2 {
            return Err(PufError::Config("repeat_count must be >= 2".into()));
        }
        if self.looseness_max == 0 {
            return Err(PufError::Config("looseness_max must be >= 1".into()));
        }
        if self.looseness.get() > self.looseness_max {
            return Err(PufError::Config("looseness exceeds looseness_max".into()));
        }
        if !(self.bin_fraction > 0.0 && self.bin_fraction < 1.0) {
            return Err(PufError::Config("bin_fraction must be in (0, 1)".into()));
        }
        if self.adversary_seed.is_some() && self.identical_carving {
            return Err(PufError::Config(
                "adversary_seed and identical_carving are exclusive".into(),
            ));
        }
        self.fabrication.validate()?;
        self.noise.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| PufError::io(path, e))?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::small_pair()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"preset": "large-pair", "challenge_count": 10}"#).unwrap();
        assert_eq!(cfg.preset, CarvingPreset::LargePair);
        assert_eq!(cfg.challenge_count, 10);
        assert_eq!(cfg.repeat_count, 500);
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::small_pair();
        assert!(cfg.validate().is_ok());
        cfg.repeat_count = 1;
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            challenge_count: 0,
            ..ExperimentConfig::small_pair()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            adversary_seed: Some(3),
            identical_carving: true,
            ..ExperimentConfig::small_pair()
        };
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"looseness": 0}"#).is_err());
    }
}
