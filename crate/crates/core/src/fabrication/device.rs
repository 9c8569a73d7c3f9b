use std::collections::{BTreeSet, HashMap};
use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::challenge::Challenge;
use super::chip::{ChipFingerprint, ChipLayout};
use crate::error::{PufError, Result};
use crate::photonic::{build_mesh, propagate, CouplerPair, IntensityVector, MeshLayout, MziSettings};

/// A pyramid carved out of a chip. Parameters are read through the shared
/// chip, so two devices may reference the same physical MZIs.
#[derive(Clone, Debug)]
pub struct DeviceInstance {
    chip: Arc<ChipFingerprint>,
    layout: MeshLayout,
    slot_to_global: Vec<u32>,
    couplers: Vec<CouplerPair>,
    /// Ground loops with both ends inside this device, as slot pairs.
    loops: Vec<(usize, usize, f64)>,
    ambient_phase: f64,
}

/// Carves a `columns`-column pyramid whose slot `i` is chip MZI `slot_map[i]`.
pub fn carve_device(chip: &Arc<ChipFingerprint>, slot_map: Vec<u32>, columns: usize) -> Result<DeviceInstance> {
    let layout = build_mesh(columns)?;
    if slot_map.len() != layout.mzi_count() {
        return Err(PufError::LengthMismatch {
            expected: layout.mzi_count(),
            actual: slot_map.len(),
        });
    }
    if let Some(&bad) = slot_map.iter().find(|&&id| id as usize >= chip.mzi_count()) {
        return Err(PufError::UnknownMzi(bad));
    }
    let mut slot_of: HashMap<u32, usize> = HashMap::with_capacity(slot_map.len());
    for (slot, &id) in slot_map.iter().enumerate() {
        if slot_of.insert(id, slot).is_some() {
            return Err(PufError::Domain(format!("MZI {id} mapped to two slots")));
        }
    }
    let loops = chip
        .ground_loops
        .iter()
        .filter_map(|g| match (slot_of.get(&g.a), slot_of.get(&g.b)) {
            (Some(&a), Some(&b)) => Some((a, b, g.coefficient)),
            _ => None,
        })
        .collect();
    let couplers = slot_map.iter().map(|&id| chip.mzis[id as usize].couplers).collect();
    Ok(DeviceInstance {
        chip: Arc::clone(chip),
        layout,
        slot_to_global: slot_map,
        couplers,
        loops,
        ambient_phase: 0.0,
    })
}

/// Number of chip MZIs used by both devices.
pub fn overlap_count(a: &DeviceInstance, b: &DeviceInstance) -> usize {
    if !Arc::ptr_eq(&a.chip, &b.chip) && a.chip.as_ref() != b.chip.as_ref() {
        return 0;
    }
    let ids: BTreeSet<u32> = a.slot_to_global.iter().copied().collect();
    b.slot_to_global.iter().filter(|id| ids.contains(id)).count()
}

impl DeviceInstance {
    pub fn layout(&self) -> &MeshLayout {
        &self.layout
    }

    pub fn chip(&self) -> &Arc<ChipFingerprint> {
        &self.chip
    }

    pub fn slot_to_global(&self) -> &[u32] {
        &self.slot_to_global
    }

    pub fn mzi_count(&self) -> usize {
        self.layout.mzi_count()
    }

    pub fn output_modes(&self) -> usize {
        self.layout.output_modes()
    }

    pub fn couplers(&self) -> &[CouplerPair] {
        &self.couplers
    }

    /// Ground loops internal to the device, as `(slot, slot, coefficient)`.
    pub fn ground_loops(&self) -> &[(usize, usize, f64)] {
        &self.loops
    }

    /// Constant phase added to every internal shifter (global temperature).
    pub fn with_ambient_phase(mut self, phase: f64) -> Self {
        self.ambient_phase = phase;
        self
    }

    /// Applies ground-loop crosstalk to the programmed voltages.
    pub fn effective_voltages(&self, challenge: &Challenge) -> Result<Vec<f64>> {
        if challenge.len() != self.mzi_count() {
            return Err(PufError::LengthMismatch {
                expected: self.mzi_count(),
                actual: challenge.len(),
            });
        }
        let v = challenge.voltages();
        let mut eff = v.clone();
        for &(a, b, g) in &self.loops {
            eff[a] += g * v[b];
            eff[b] += g * v[a];
        }
        Ok(eff)
    }

    /// `θ = 2π·(V_eff / V2π)²` per slot; output shifters stay at zero.
    pub fn voltages_to_phases(&self, challenge: &Challenge) -> Result<Vec<MziSettings>> {
        let eff = self.effective_voltages(challenge)?;
        Ok(eff
            .iter()
            .zip(&self.slot_to_global)
            .map(|(v, &id)| {
                let v2pi = self.chip.mzis[id as usize].heater.v2pi;
                MziSettings::internal(TAU * (v / v2pi).powi(2) + self.ambient_phase)
            })
            .collect())
    }

    /// Noise-free output intensities for a challenge.
    pub fn ideal_response(&self, challenge: &Challenge) -> Result<IntensityVector> {
        let phases = self.voltages_to_phases(challenge)?;
        propagate(&self.layout, &phases, &self.couplers)
    }

    /// Stable digest of the device's identity: chip seed, carving and layout.
    pub fn descriptor_digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.chip.seed.to_le_bytes());
        h.update((self.layout.columns() as u64).to_le_bytes());
        for id in &self.slot_to_global {
            h.update(id.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Named carvings of a chip into two devices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CarvingPreset {
    /// Two disjoint 4-column (10-MZI, 8-output) devices, electrically separate.
    SmallPair,
    /// Two 11-column (66-MZI, 22-output) devices sharing columns 7–11.
    LargePair,
}

/// Chip layout plus the slot maps of both devices of a preset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresetCarving {
    pub columns: usize,
    pub chip_layout: ChipLayout,
    pub slot_maps: [Vec<u32>; 2],
}

impl CarvingPreset {
    pub fn name(self) -> &'static str {
        match self {
            CarvingPreset::SmallPair => "small-pair",
            CarvingPreset::LargePair => "large-pair",
        }
    }

    pub fn columns(self) -> usize {
        match self {
            CarvingPreset::SmallPair => 4,
            CarvingPreset::LargePair => 11,
        }
    }

    /// First column (1-based) whose MZIs are shared by both devices, if any.
    pub fn shared_from_column(self) -> Option<usize> {
        match self {
            CarvingPreset::SmallPair => None,
            CarvingPreset::LargePair => Some(7),
        }
    }

    pub fn carving(self) -> PresetCarving {
        let columns = self.columns();
        let layout = build_mesh(columns).expect("preset has columns");
        let n = layout.mzi_count() as u32;
        let slot_maps = match self.shared_from_column() {
            None => [(0..n).collect(), (n..2 * n).collect()],
            Some(first_shared) => {
                // slots of columns < first_shared come first in column-major order
                let unique = crate::photonic::pyramid_mzi_count(first_shared - 1) as u32;
                let a: Vec<u32> = (0..n).collect();
                let b: Vec<u32> = (0..n).map(|s| if s < unique { n + s } else { s }).collect();
                [a, b]
            }
        };
        let total = slot_maps.iter().flatten().max().map_or(0, |m| m + 1);
        let neighbours = layout.grid_neighbours();
        let pairs = slot_maps
            .iter()
            .flat_map(|map| neighbours.iter().map(move |&(x, y)| (map[x], map[y])));
        let chip_layout = ChipLayout::new(total, pairs).expect("preset ids are in range");
        PresetCarving {
            columns,
            chip_layout,
            slot_maps,
        }
    }

    /// Carves both preset devices from an already fabricated chip.
    pub fn carve(self, chip: &Arc<ChipFingerprint>) -> Result<[DeviceInstance; 2]> {
        let PresetCarving { columns, slot_maps, .. } = self.carving();
        let [a, b] = slot_maps;
        Ok([carve_device(chip, a, columns)?, carve_device(chip, b, columns)?])
    }
}

impl std::str::FromStr for CarvingPreset {
    type Err = PufError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small-pair" => Ok(CarvingPreset::SmallPair),
            "large-pair" => Ok(CarvingPreset::LargePair),
            other => Err(PufError::Config(format!("unknown preset {other:?}"))),
        }
    }
}

pub const DEVICE_FORMAT_VERSION: u32 = 1;

/// Serializable carving: which chip the device lives on and which chip MZI
/// sits in each slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub format_version: u32,
    pub chip_seed: u64,
    pub columns: usize,
    pub slot_map: Vec<u32>,
}

impl DeviceSpec {
    pub fn of(device: &DeviceInstance) -> Self {
        Self {
            format_version: DEVICE_FORMAT_VERSION,
            chip_seed: device.chip.seed,
            columns: device.layout.columns(),
            slot_map: device.slot_to_global.clone(),
        }
    }

    /// Carves the described device, refusing a chip with a different seed.
    pub fn carve(&self, chip: &Arc<ChipFingerprint>) -> Result<DeviceInstance> {
        if chip.seed != self.chip_seed {
            return Err(PufError::Config(format!(
                "device was carved from chip seed {}, not {}",
                self.chip_seed, chip.seed
            )));
        }
        carve_device(chip, self.slot_map.clone(), self.columns)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        if spec.format_version != DEVICE_FORMAT_VERSION {
            return Err(PufError::FormatVersion {
                found: spec.format_version,
                expected: DEVICE_FORMAT_VERSION,
            });
        }
        Ok(spec)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| PufError::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PufError::io(path, e))?;
        Self::from_json(&text)
    }
}
