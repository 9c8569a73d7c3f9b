use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::database::{audit_collisions, CrpDatabase, CrpRecord, DbHeader, EnrollmentInfo, DB_FORMAT_VERSION};
use crate::error::{PufError, Result};
use crate::fabrication::{measure, Challenge, DeviceInstance, NoiseSource};
use crate::metrics::{
    distance_stats, l2_unchecked, lhd_unchecked, quantize_intensities, Looseness, DEFAULT_BIN_FRACTION,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnrollParams {
    pub challenge_count: usize,
    pub repeats_per_challenge: u32,
    pub rng_seed: u64,
    pub bin_fraction: f64,
    pub looseness: Looseness,
}

impl Default for EnrollParams {
    fn default() -> Self {
        Self {
            challenge_count: 100,
            repeats_per_challenge: 5,
            rng_seed: 0,
            bin_fraction: DEFAULT_BIN_FRACTION,
            looseness: Looseness::SMALL_DEVICE,
        }
    }
}

/// Draws `challenge_count` uniform challenges and records, for each, the
/// quantized mean of `repeats_per_challenge` measurements.
///
/// Repeat `r` of challenge `i` is measurement `i · repeats + r` of `noise`,
/// so the result does not depend on how the work is scheduled.
pub fn enroll(device: &DeviceInstance, params: &EnrollParams, noise: &NoiseSource) -> Result<CrpDatabase> {
    if params.challenge_count == 0 || params.repeats_per_challenge == 0 {
        return Err(PufError::Config("challenge and repeat counts must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let challenges: Vec<Challenge> = (0..params.challenge_count)
        .map(|_| Challenge::random(device.mzi_count(), &mut rng))
        .collect();
    let repeats = u64::from(params.repeats_per_challenge);

    let records = challenges
        .into_par_iter()
        .enumerate()
        .map(|(i, challenge)| {
            let raws = (0..repeats)
                .map(|r| measure(device, &challenge, noise, i as u64 * repeats + r))
                .collect::<Result<Vec<_>>>()?;
            let modes = device.output_modes();
            let mut mean = vec![0.0; modes];
            for raw in &raws {
                for (m, x) in mean.iter_mut().zip(raw.intensities.as_slice()) {
                    *m += x;
                }
            }
            mean.iter_mut().for_each(|m| *m /= repeats as f64);
            let reference = quantize_intensities(&mean, params.bin_fraction)?;

            let (repeat_l2, repeat_lhd) = if repeats > 1 {
                let mut l2 = Vec::with_capacity(raws.len());
                let mut lhd = Vec::with_capacity(raws.len());
                for raw in &raws {
                    let q = quantize_intensities(raw.intensities.as_slice(), params.bin_fraction)?;
                    l2.push(l2_unchecked(&reference.bins, &q.bins));
                    lhd.push(lhd_unchecked(&reference.bins, &q.bins, params.looseness) as f64);
                }
                (Some(distance_stats(&l2, 1.0)?), Some(distance_stats(&lhd, 1.0)?))
            } else {
                (None, None)
            };
            Ok(CrpRecord {
                challenge_id: i as u64,
                challenge,
                reference,
                repeat_l2,
                repeat_lhd,
                consumed: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let collision_count = audit_collisions(&records).complete_collisions;
    let header = DbHeader {
        format_version: DB_FORMAT_VERSION,
        device_digest: device.descriptor_digest(),
        enrollment: EnrollmentInfo {
            challenge_count: params.challenge_count,
            repeats_per_challenge: params.repeats_per_challenge,
            rng_seed: params.rng_seed,
            noise_seed: noise.seed(),
            bin_fraction: params.bin_fraction,
            looseness: params.looseness.get(),
        },
        collision_count,
        policy: None,
    };
    CrpDatabase::new(header, records)
}
