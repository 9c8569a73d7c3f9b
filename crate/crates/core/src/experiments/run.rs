use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{PufError, Result};
use crate::fabrication::{
    carve_device, fabricate_chip, measure, overlap_count, CarvingPreset, Challenge, DeviceInstance, NoiseSource,
};
use crate::metrics::{
    aggregate_uniqueness, distance_stats, l2_unchecked, lhd_unchecked, looseness_sweep, pooled_std,
    quantize_intensities, DistanceStats, Looseness, LoosenessSweep, QuantizedResponse,
};

/// Same challenge on device A and device B.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterRow {
    pub index: usize,
    pub digest_a: String,
    pub digest_b: String,
    /// LHD at `L = 1..=looseness_max`.
    pub lhd: Vec<u32>,
    pub l2: f64,
}

/// One device's response compared with its typical (first) repeated response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    /// 0 for device A, 1 for device B.
    pub device: u8,
    /// Repeat number, or random-challenge index.
    pub index: usize,
    pub lhd: Vec<u32>,
    pub l2: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RawComparisons {
    pub inter: Vec<InterRow>,
    /// Repeated challenge, typical response against every other repeat.
    pub intra: Vec<PairRow>,
    /// Typical response against responses to random challenges, same device.
    pub random: Vec<PairRow>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CollisionSummary {
    /// Mirrored challenges where both devices agree in every channel.
    pub inter: usize,
    /// Pairs of distinct challenges with identical responses on one device.
    pub intra_device: usize,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessPoint {
    pub looseness: u32,
    pub percent: f64,
}

/// Headline statistics of a run. Every field is recomputable from the raw rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub preset: String,
    pub looseness: u32,
    pub output_modes: usize,
    pub overlap: usize,
    pub challenge_count: usize,
    pub repeat_count: usize,
    pub intra_lhd: Option<DistanceStats>,
    pub inter_lhd: Option<DistanceStats>,
    pub random_lhd: Option<DistanceStats>,
    pub intra_l2: Option<DistanceStats>,
    pub inter_l2: Option<DistanceStats>,
    pub uniqueness: Vec<UniquenessPoint>,
    pub collisions: CollisionSummary,
    /// Share of mirrored challenges with no channel in common (`L = 1`).
    pub full_disagreement_fraction: Option<f64>,
    /// Share of repeats whose LHD to the typical response is at most 4.
    pub intra_lhd_at_most_4_fraction: Option<f64>,
    /// `(mean ℓ²_inter − mean ℓ²_intra) / pooled std`.
    pub l2_separation: Option<f64>,
    pub l2_histograms_disjoint: Option<bool>,
    pub looseness_curves: Option<LoosenessSweep>,
    pub optimal_looseness: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub summary: ExperimentSummary,
    pub raw: RawComparisons,
}

/// Carves the two devices a configuration describes.
pub fn build_devices(config: &ExperimentConfig) -> Result<[DeviceInstance; 2]> {
    config.validate()?;
    let carving = config.preset.carving();
    let chip = Arc::new(fabricate_chip(
        config.chip_seeds[0],
        &carving.chip_layout,
        &config.fabrication,
    ));
    let [a, b] = config.preset.carve(&chip)?;
    if let Some(seed) = config.adversary_seed {
        let other = Arc::new(fabricate_chip(seed, &carving.chip_layout, &config.fabrication));
        let clone = carve_device(&other, a.slot_to_global().to_vec(), carving.columns)?;
        return Ok([a, clone]);
    }
    if config.identical_carving {
        let twin = carve_device(&chip, a.slot_to_global().to_vec(), carving.columns)?;
        return Ok([a, twin]);
    }
    Ok([a, b])
}

fn readout_seed(base: u64, device: u8) -> u64 {
    // splitmix-style spread so the two readout chains are unrelated
    base.wrapping_add(u64::from(device).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Responses of one device: the repeated challenge `repeat_count` times
/// (measurements `0..R`), then each random challenge (measurement `R + i`).
struct DeviceResponses {
    repeats: Vec<QuantizedResponse>,
    random: Vec<QuantizedResponse>,
}

fn collect_responses(
    device: &DeviceInstance,
    noise: &NoiseSource,
    repeated: &Challenge,
    challenges: &[Challenge],
    repeat_count: usize,
    bin_fraction: f64,
) -> Result<DeviceResponses> {
    let one = |c: &Challenge, index: usize| -> Result<QuantizedResponse> {
        let raw = measure(device, c, noise, index as u64)?;
        quantize_intensities(raw.intensities.as_slice(), bin_fraction)
    };
    let repeats = (0..repeat_count)
        .into_par_iter()
        .map(|r| one(repeated, r))
        .collect::<Result<Vec<_>>>()?;
    let random = challenges
        .par_iter()
        .enumerate()
        .map(|(i, c)| one(c, repeat_count + i))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeviceResponses { repeats, random })
}

fn lhd_profile(a: &[u32], b: &[u32], max: u32) -> Vec<u32> {
    (1..=max)
        .map(|l| lhd_unchecked(a, b, Looseness::new(l).expect("l >= 1")) as u32)
        .collect()
}

fn intra_device_collisions(challenges: &[Challenge], responses: &[QuantizedResponse]) -> usize {
    let mut groups: HashMap<&[u32], Vec<&Challenge>> = HashMap::new();
    for (c, r) in challenges.iter().zip(responses) {
        let group = groups.entry(r.bins.as_slice()).or_default();
        if !group.contains(&c) {
            group.push(c);
        }
    }
    groups.values().map(|g| g.len() * (g.len() - 1) / 2).sum()
}

/// Mirrors every challenge on both devices of a preset and compares.
pub fn run_pair(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let devices = build_devices(config)?;
    let overlap = overlap_count(&devices[0], &devices[1]);
    if config.preset == CarvingPreset::LargePair
        && config.adversary_seed.is_none()
        && !config.identical_carving
        && overlap != 45
    {
        return Err(PufError::Config(format!(
            "large-pair devices share {overlap} MZIs, expected 45"
        )));
    }
    let modes = devices[0].output_modes();
    let mzis = devices[0].mzi_count();

    let mut rng = ChaCha8Rng::seed_from_u64(config.challenge_seed);
    let repeated = Challenge::random(mzis, &mut rng);
    let challenges: Vec<Challenge> = (0..config.challenge_count)
        .map(|_| Challenge::random(mzis, &mut rng))
        .collect();

    let responses = devices
        .iter()
        .enumerate()
        .map(|(d, device)| {
            let noise = NoiseSource::new(config.noise.clone(), readout_seed(config.noise_seed, d as u8), modes)?;
            collect_responses(
                device,
                &noise,
                &repeated,
                &challenges,
                config.repeat_count,
                config.bin_fraction,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let lmax = config.looseness_max;
    let mut raw = RawComparisons::default();
    for (i, c) in challenges.iter().enumerate() {
        let (a, b) = (&responses[0].random[i], &responses[1].random[i]);
        raw.inter.push(InterRow {
            index: i,
            digest_a: c.digest(),
            digest_b: c.digest(),
            lhd: lhd_profile(&a.bins, &b.bins, lmax),
            l2: l2_unchecked(&a.bins, &b.bins),
        });
    }
    for (d, resp) in responses.iter().enumerate() {
        let typical = &resp.repeats[0];
        for (r, other) in resp.repeats.iter().enumerate().skip(1) {
            raw.intra.push(PairRow {
                device: d as u8,
                index: r,
                lhd: lhd_profile(&typical.bins, &other.bins, lmax),
                l2: l2_unchecked(&typical.bins, &other.bins),
            });
        }
        for (i, other) in resp.random.iter().enumerate() {
            raw.random.push(PairRow {
                device: d as u8,
                index: i,
                lhd: lhd_profile(&typical.bins, &other.bins, lmax),
                l2: l2_unchecked(&typical.bins, &other.bins),
            });
        }
    }

    let mirrored: Vec<[QuantizedResponse; 2]> = responses[0]
        .random
        .iter()
        .zip(&responses[1].random)
        .map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    let uniqueness = (1..=lmax)
        .map(|l| {
            Ok(UniquenessPoint {
                looseness: l,
                percent: aggregate_uniqueness(&mirrored, Looseness::new(l)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let intra_device: usize = responses
        .iter()
        .map(|r| intra_device_collisions(&challenges, &r.random))
        .sum();

    let mut summary = summarize(config, modes, overlap, &raw, uniqueness, intra_device)?;
    let rep_pairs: Vec<_> = raw
        .intra
        .iter()
        .map(|r| {
            let resp = &responses[r.device as usize];
            (&resp.repeats[0], &resp.repeats[r.index])
        })
        .collect();
    let rnd_pairs: Vec<_> = raw
        .random
        .iter()
        .map(|r| {
            let resp = &responses[r.device as usize];
            (&resp.repeats[0], &resp.random[r.index])
        })
        .collect();
    let sweep = looseness_sweep(&rep_pairs, &rnd_pairs, lmax)?;
    summary.optimal_looseness = sweep.optimal_looseness();
    summary.looseness_curves = Some(sweep);
    Ok(ExperimentReport { summary, raw })
}

/// Headline statistics from raw rows. The looseness curves are left empty.
pub fn summarize(
    config: &ExperimentConfig,
    output_modes: usize,
    overlap: usize,
    raw: &RawComparisons,
    uniqueness: Vec<UniquenessPoint>,
    intra_device_collisions: usize,
) -> Result<ExperimentSummary> {
    let li = config.looseness.get() as usize - 1;
    let stats = |values: Vec<f64>| -> Result<Option<DistanceStats>> {
        if values.is_empty() {
            Ok(None)
        } else {
            distance_stats(&values, 1.0).map(Some)
        }
    };
    let intra_lhd = stats(raw.intra.iter().map(|r| f64::from(r.lhd[li])).collect())?;
    let inter_lhd = stats(raw.inter.iter().map(|r| f64::from(r.lhd[li])).collect())?;
    let random_lhd = stats(raw.random.iter().map(|r| f64::from(r.lhd[li])).collect())?;
    let intra_l2 = stats(raw.intra.iter().map(|r| r.l2).collect())?;
    let inter_l2 = stats(raw.inter.iter().map(|r| r.l2).collect())?;

    let inter_collisions = raw.inter.iter().filter(|r| r.lhd[0] == 0).count();
    let full_disagreement_fraction = (!raw.inter.is_empty()).then(|| {
        raw.inter.iter().filter(|r| r.lhd[0] as usize == output_modes).count() as f64 / raw.inter.len() as f64
    });
    let intra_lhd_at_most_4_fraction = (!raw.intra.is_empty())
        .then(|| raw.intra.iter().filter(|r| r.lhd[li] <= 4).count() as f64 / raw.intra.len() as f64);
    let (l2_separation, l2_histograms_disjoint) = match (&intra_l2, &inter_l2) {
        (Some(a), Some(b)) => {
            let spread = pooled_std(a, b);
            let gap = b.mean - a.mean;
            let sep = if spread > 0.0 {
                gap / spread
            } else if gap > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            (Some(sep), Some(a.max < b.min))
        }
        _ => (None, None),
    };

    Ok(ExperimentSummary {
        preset: config.preset.name().to_string(),
        looseness: config.looseness.get(),
        output_modes,
        overlap,
        challenge_count: raw.inter.len(),
        repeat_count: config.repeat_count,
        intra_lhd,
        inter_lhd,
        random_lhd,
        intra_l2,
        inter_l2,
        uniqueness,
        collisions: CollisionSummary {
            inter: inter_collisions,
            intra_device: intra_device_collisions,
            total: inter_collisions + intra_device_collisions,
        },
        full_disagreement_fraction,
        intra_lhd_at_most_4_fraction,
        l2_separation,
        l2_histograms_disjoint,
        looseness_curves: None,
        optimal_looseness: None,
    })
}

pub fn run_small_pair(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.preset != CarvingPreset::SmallPair {
        return Err(PufError::Config("run_small_pair needs the small-pair preset".into()));
    }
    run_pair(config)
}

pub fn run_large_pair(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.preset != CarvingPreset::LargePair {
        return Err(PufError::Config("run_large_pair needs the large-pair preset".into()));
    }
    run_pair(config)
}
