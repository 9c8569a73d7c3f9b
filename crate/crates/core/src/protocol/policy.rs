use serde::{Deserialize, Serialize};

use super::database::CrpDatabase;
use crate::error::{PufError, Result};
use crate::metrics::{distance_stats, euclidean_distance, loose_hamming_distance, Looseness, QuantizedResponse};

/// Joint LHD and ℓ² acceptance thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyPolicy {
    pub looseness: Looseness,
    pub lhd_threshold: u32,
    pub l2_threshold: f64,
    #[serde(default)]
    pub calibration: Option<CalibrationInfo>,
}

/// How a calibrated policy was derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationInfo {
    pub intra_l2_mean: f64,
    pub intra_l2_std: f64,
    pub intra_l2_max: f64,
    pub inter_l2_min: f64,
    /// `mean + 3·std` before clamping.
    pub l2_rule_value: f64,
    /// The threshold was pulled below the closest impostor.
    pub clamped: bool,
    pub low_confidence: bool,
    pub legitimate_samples: usize,
    pub impostor_samples: usize,
}

impl VerifyPolicy {
    pub fn new(looseness: Looseness, lhd_threshold: u32, l2_threshold: f64) -> Result<Self> {
        if l2_threshold.is_nan() || l2_threshold < 0.0 {
            return Err(PufError::Domain("l2 threshold must be >= 0".into()));
        }
        Ok(Self {
            looseness,
            lhd_threshold,
            l2_threshold,
            calibration: None,
        })
    }
}

impl Default for VerifyPolicy {
    fn default() -> Self {
        Self {
            looseness: Looseness::SMALL_DEVICE,
            lhd_threshold: 4,
            l2_threshold: 8.0,
            calibration: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthDecision {
    pub challenge_id: u64,
    pub accepted: bool,
    pub lhd: usize,
    pub l2: f64,
}

/// Compares a candidate response with the enrolled reference.
pub fn verify(
    db: &CrpDatabase,
    challenge_id: u64,
    candidate: &QuantizedResponse,
    policy: &VerifyPolicy,
) -> Result<AuthDecision> {
    let record = db.get(challenge_id)?;
    let lhd = loose_hamming_distance(&record.reference, candidate, policy.looseness)?;
    let l2 = euclidean_distance(&record.reference, candidate)?;
    Ok(AuthDecision {
        challenge_id,
        accepted: lhd <= policy.lhd_threshold as usize && l2 <= policy.l2_threshold,
        lhd,
        l2,
    })
}

/// `mean + 3·std` of the legitimate ℓ² distances, pulled strictly below the
/// smallest impostor distance when the two populations do not overlap.
/// Returns `(threshold, rule_value, clamped)`.
pub fn l2_threshold_rule(intra_mean: f64, intra_std: f64, intra_max: f64, inter_min: f64) -> (f64, f64, bool) {
    let rule = intra_mean + 3.0 * intra_std;
    let disjoint = intra_max < inter_min;
    if disjoint && rule >= inter_min {
        (inter_min.next_down().max(intra_max), rule, true)
    } else {
        (rule, rule, false)
    }
}

/// Derives thresholds from responses of the genuine device (`legitimate`)
/// and of other devices (`impostor`), each tagged with its challenge id.
pub fn calibrate_policy(
    db: &CrpDatabase,
    legitimate: &[(u64, QuantizedResponse)],
    impostor: &[(u64, QuantizedResponse)],
    looseness: Looseness,
) -> Result<VerifyPolicy> {
    if legitimate.is_empty() {
        return Err(PufError::Empty("legitimate samples"));
    }
    if impostor.is_empty() {
        return Err(PufError::Empty("impostor samples"));
    }
    let distances = |samples: &[(u64, QuantizedResponse)]| -> Result<(Vec<f64>, Vec<usize>)> {
        let mut l2 = Vec::with_capacity(samples.len());
        let mut lhd = Vec::with_capacity(samples.len());
        for (id, response) in samples {
            let reference = &db.get(*id)?.reference;
            l2.push(euclidean_distance(reference, response)?);
            lhd.push(loose_hamming_distance(reference, response, looseness)?);
        }
        Ok((l2, lhd))
    };
    let (intra_l2, intra_lhd) = distances(legitimate)?;
    let (inter_l2, _) = distances(impostor)?;
    let intra = distance_stats(&intra_l2, 1.0)?;
    let inter_min = inter_l2.iter().copied().fold(f64::INFINITY, f64::min);
    let (l2_threshold, rule, clamped) = l2_threshold_rule(intra.mean, intra.std_dev, intra.max, inter_min);
    Ok(VerifyPolicy {
        looseness,
        lhd_threshold: intra_lhd.iter().copied().max().unwrap_or(0) as u32,
        l2_threshold,
        calibration: Some(CalibrationInfo {
            intra_l2_mean: intra.mean,
            intra_l2_std: intra.std_dev,
            intra_l2_max: intra.max,
            inter_l2_min: inter_min,
            l2_rule_value: rule,
            clamped,
            low_confidence: legitimate.len() < 2 || impostor.len() < 2,
            legitimate_samples: legitimate.len(),
            impostor_samples: impostor.len(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_is_clamped() {
        // intra mean 6, std 4, inter minimum 11: 6 + 3·4 = 18 is pulled below 11
        let (t, rule, clamped) = l2_threshold_rule(6.0, 4.0, 10.0, 11.0);
        assert_eq!(rule, 18.0);
        assert!(clamped);
        assert!(t < 11.0 && t > 11.0 - 1e-12);
    }

    #[test]
    fn overlapping_populations_keep_rule() {
        let (t, _, clamped) = l2_threshold_rule(6.0, 4.0, 15.0, 11.0);
        assert_eq!(t, 18.0);
        assert!(!clamped);
        let (t, _, clamped) = l2_threshold_rule(1.0, 1.0, 3.0, 50.0);
        assert_eq!(t, 4.0);
        assert!(!clamped);
    }

    #[test]
    fn policy_rejects_negative_threshold() {
        assert!(VerifyPolicy::new(Looseness::HAMMING, 0, -1.0).is_err());
        assert!(VerifyPolicy::new(Looseness::HAMMING, 0, 0.0).is_ok());
    }
}
