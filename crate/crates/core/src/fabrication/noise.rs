//! Sample-averaged photodiode readout with coupling jitter and drift.

use std::sync::RwLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::challenge::Challenge;
use super::device::DeviceInstance;
use crate::error::{PufError, Result};
use crate::photonic::IntensityVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub enabled: bool,
    /// Additive detector noise per sample, in units of input power.
    pub detector_sigma: f64,
    /// Relative per-sample, per-channel multiplicative coupling jitter.
    pub coupling_jitter_sigma: f64,
    /// Relative random-walk step of each channel's coupling per measurement.
    pub coupling_drift_step: f64,
    /// Drift is reflected back into `[1 − bound, 1 + bound]`.
    pub coupling_drift_bound: f64,
    pub samples_per_response: u32,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            detector_sigma: 1e-5,
            coupling_jitter_sigma: 0.14,
            coupling_drift_step: 0.005,
            coupling_drift_bound: 0.05,
            samples_per_response: 1000,
        }
    }
}

impl NoiseConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            self.detector_sigma,
            self.coupling_jitter_sigma,
            self.coupling_drift_step,
            self.coupling_drift_bound,
        ];
        if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(PufError::Config("noise sigmas must be finite and >= 0".into()));
        }
        if self.coupling_drift_bound >= 1.0 {
            return Err(PufError::Config("drift bound must be below 1".into()));
        }
        if self.samples_per_response == 0 {
            return Err(PufError::Config("samples_per_response must be >= 1".into()));
        }
        Ok(())
    }
}

/// Seeded noise state of one readout chain.
///
/// Per-sample noise for measurement `i` comes from ChaCha stream `i + 1`, and
/// the drift walk from stream 0, so any measurement can be reproduced from
/// `(seed, i)` alone regardless of evaluation order.
#[derive(Debug)]
pub struct NoiseSource {
    config: NoiseConfig,
    seed: u64,
    modes: usize,
    drift: RwLock<DriftWalk>,
}

#[derive(Debug)]
struct DriftWalk {
    rng: ChaCha8Rng,
    /// `history[i][k]`: coupling factor of channel `k` at measurement `i`.
    history: Vec<Vec<f64>>,
}

impl NoiseSource {
    pub fn new(config: NoiseConfig, seed: u64, modes: usize) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        Ok(Self {
            config,
            seed,
            modes,
            drift: RwLock::new(DriftWalk {
                rng,
                history: vec![vec![1.0; modes]],
            }),
        })
    }

    pub fn config(&self) -> &NoiseConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Per-channel coupling factors at a measurement index.
    pub fn drift_at(&self, index: u64) -> Vec<f64> {
        let i = index as usize;
        {
            let walk = self.drift.read().expect("drift lock poisoned");
            if let Some(d) = walk.history.get(i) {
                return d.clone();
            }
        }
        let mut walk = self.drift.write().expect("drift lock poisoned");
        let (step, bound) = (self.config.coupling_drift_step, self.config.coupling_drift_bound);
        while walk.history.len() <= i {
            let prev = walk.history.last().expect("walk starts non-empty").clone();
            let next = prev
                .iter()
                .map(|&d| {
                    let z: f64 = StandardNormal.sample(&mut walk.rng);
                    reflect(d + step * z, 1.0 - bound, 1.0 + bound)
                })
                .collect();
            walk.history.push(next);
        }
        walk.history[i].clone()
    }

    fn sample_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index.wrapping_add(1));
        rng
    }

    /// Visits every noisy sample of one measurement, in sample order.
    fn for_each_sample(&self, ideal: &[f64], index: u64, mut visit: impl FnMut(&[f64])) {
        let drift = self.drift_at(index);
        let mut rng = self.sample_rng(index);
        let mut sample = vec![0.0; ideal.len()];
        for _ in 0..self.config.samples_per_response {
            for ((s, &i), &d) in sample.iter_mut().zip(ideal).zip(&drift) {
                let jitter: f64 = StandardNormal.sample(&mut rng);
                let dark: f64 = StandardNormal.sample(&mut rng);
                let reading =
                    d * (1.0 + self.config.coupling_jitter_sigma * jitter) * i + self.config.detector_sigma * dark;
                *s = reading.max(0.0);
            }
            visit(&sample);
        }
    }
}

fn reflect(mut x: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    let width = hi - lo;
    // fold into [lo, hi] by mirroring; the walk step is far below the width
    for _ in 0..8 {
        if x < lo {
            x = 2.0 * lo - x;
        } else if x > hi {
            x = 2.0 * hi - x;
        } else {
            return x;
        }
    }
    lo + (x - lo).rem_euclid(width)
}

/// Sample-averaged readout before normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawResponse {
    pub intensities: IntensityVector,
    pub total_power: f64,
}

impl RawResponse {
    pub fn new(intensities: IntensityVector) -> Self {
        let total_power = intensities.total();
        Self {
            intensities,
            total_power,
        }
    }
}

/// Measures a device's response to a challenge as measurement `index` of
/// the readout chain `noise`. With noise disabled this is the ideal response.
pub fn measure(device: &DeviceInstance, challenge: &Challenge, noise: &NoiseSource, index: u64) -> Result<RawResponse> {
    let ideal = device.ideal_response(challenge)?;
    if !noise.config.enabled {
        return Ok(RawResponse::new(ideal));
    }
    check_modes(device, noise)?;
    let mut acc = vec![0.0; ideal.len()];
    noise.for_each_sample(ideal.as_slice(), index, |s| {
        for (a, x) in acc.iter_mut().zip(s) {
            *a += x;
        }
    });
    let n = f64::from(noise.config.samples_per_response);
    Ok(RawResponse::new(IntensityVector(
        acc.into_iter().map(|a| a / n).collect(),
    )))
}

/// Every individual noisy sample behind one measurement, for calibration.
pub fn measure_samples(
    device: &DeviceInstance,
    challenge: &Challenge,
    noise: &NoiseSource,
    index: u64,
) -> Result<Vec<IntensityVector>> {
    let ideal = device.ideal_response(challenge)?;
    if !noise.config.enabled {
        return Ok(vec![ideal; noise.config.samples_per_response as usize]);
    }
    check_modes(device, noise)?;
    let mut out = Vec::with_capacity(noise.config.samples_per_response as usize);
    noise.for_each_sample(ideal.as_slice(), index, |s| out.push(IntensityVector(s.to_vec())));
    Ok(out)
}

fn check_modes(device: &DeviceInstance, noise: &NoiseSource) -> Result<()> {
    if noise.modes != device.output_modes() {
        return Err(PufError::LengthMismatch {
            expected: device.output_modes(),
            actual: noise.modes,
        });
    }
    Ok(())
}
