use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{PufError, Result};
use crate::photonic::CouplerPair;

pub const CHIP_FORMAT_VERSION: u32 = 1;

/// Nominal full-switching heater voltage in volts.
pub const NOMINAL_V2PI: f64 = 7.0;

/// Ground-loop voltage coupling of −45 dB, as an amplitude ratio.
pub fn ground_loop_kappa(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Fabrication spreads used when sampling a chip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FabricationParams {
    pub nominal_v2pi: f64,
    /// Relative standard deviation of heater resistance.
    pub heater_sigma: f64,
    /// Standard deviation of each coupler's power splitting ratio.
    pub coupler_sigma: f64,
    /// Mean ground-loop coupling in dB.
    pub ground_loop_db: f64,
}

impl Default for FabricationParams {
    fn default() -> Self {
        Self {
            nominal_v2pi: NOMINAL_V2PI,
            heater_sigma: 0.1543,
            coupler_sigma: 0.02,
            ground_loop_db: -45.0,
        }
    }
}

impl FabricationParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.nominal_v2pi.is_finite()
            && self.nominal_v2pi > 0.0
            && self.heater_sigma.is_finite()
            && self.heater_sigma >= 0.0
            && self.coupler_sigma.is_finite()
            && self.coupler_sigma >= 0.0
            && self.ground_loop_db.is_finite();
        if ok {
            Ok(())
        } else {
            Err(PufError::Config(format!("invalid fabrication parameters {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeaterParams {
    pub v2pi: f64,
    pub resistance_factor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MziParams {
    pub heater: HeaterParams,
    pub couplers: CouplerPair,
}

/// Heater-to-heater voltage coupling through a shared ground lead.
/// Serialized as an `[a, b, coefficient]` triplet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u32, u32, f64)", into = "(u32, u32, f64)")]
pub struct GroundLoop {
    pub a: u32,
    pub b: u32,
    pub coefficient: f64,
}

impl From<(u32, u32, f64)> for GroundLoop {
    fn from((a, b, coefficient): (u32, u32, f64)) -> Self {
        Self { a, b, coefficient }
    }
}

impl From<GroundLoop> for (u32, u32, f64) {
    fn from(g: GroundLoop) -> Self {
        (g.a, g.b, g.coefficient)
    }
}

/// Global MZI ids of a chip and which pairs share ground leads.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChipLayout {
    pub mzi_count: u32,
    pub adjacency: Vec<(u32, u32)>,
}

impl ChipLayout {
    /// Sorts pairs as `(min, max)`, drops duplicates and self-loops.
    pub fn new(mzi_count: u32, pairs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut adjacency: Vec<(u32, u32)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        adjacency.sort_unstable();
        adjacency.dedup();
        if let Some(&(_, b)) = adjacency.iter().find(|(_, b)| *b >= mzi_count) {
            return Err(PufError::UnknownMzi(b));
        }
        Ok(Self { mzi_count, adjacency })
    }
}

/// Every per-MZI fabrication parameter of one chip. This is the PUF secret.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChipFingerprint {
    pub format_version: u32,
    pub seed: u64,
    pub params: FabricationParams,
    pub mzis: Vec<MziParams>,
    pub ground_loops: Vec<GroundLoop>,
}

/// Samples a chip deterministically from `seed`.
///
/// Panics if `params` fails [`FabricationParams::validate`].
///
/// MZIs are drawn in id order (resistance, then both couplers), followed by
/// one ground-loop coefficient per adjacent pair in sorted order.
pub fn fabricate_chip(seed: u64, layout: &ChipLayout, params: &FabricationParams) -> ChipFingerprint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let resistance = Normal::new(1.0, params.heater_sigma).expect("finite heater sigma");
    let coupler = Normal::new(0.5, params.coupler_sigma).expect("finite coupler sigma");
    let kappa = ground_loop_kappa(params.ground_loop_db);
    let loop_dist = Normal::new(kappa, kappa / 4.0).expect("finite ground-loop level");

    let mzis = (0..layout.mzi_count)
        .map(|_| {
            let resistance_factor = resistance.sample(&mut rng).max(0.05);
            let eta1 = coupler.sample(&mut rng).clamp(0.01, 0.99);
            let eta2 = coupler.sample(&mut rng).clamp(0.01, 0.99);
            MziParams {
                heater: HeaterParams {
                    v2pi: params.nominal_v2pi * resistance_factor.sqrt(),
                    resistance_factor,
                },
                couplers: CouplerPair { eta1, eta2 },
            }
        })
        .collect();
    let ground_loops = layout
        .adjacency
        .iter()
        .map(|&(a, b)| GroundLoop {
            a,
            b,
            coefficient: loop_dist.sample(&mut rng).clamp(0.0, 2.0 * kappa),
        })
        .collect();

    ChipFingerprint {
        format_version: CHIP_FORMAT_VERSION,
        seed,
        params: params.clone(),
        mzis,
        ground_loops,
    }
}

impl ChipFingerprint {
    pub fn mzi_count(&self) -> usize {
        self.mzis.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let chip: Self = serde_json::from_str(text)?;
        if chip.format_version != CHIP_FORMAT_VERSION {
            return Err(PufError::FormatVersion {
                found: chip.format_version,
                expected: CHIP_FORMAT_VERSION,
            });
        }
        Ok(chip)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| PufError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| PufError::io(path, e))?;
        Self::from_json(&text)
    }
}
