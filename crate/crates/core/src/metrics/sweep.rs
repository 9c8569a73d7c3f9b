use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::distance::{loose_hamming_distance, Looseness};
use super::quantize::QuantizedResponse;
use super::stats::{distance_stats, DistanceStats};
use crate::error::{PufError, Result};

pub type ResponsePair<'a> = (&'a QuantizedResponse, &'a QuantizedResponse);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub looseness: u32,
    pub repeated: DistanceStats,
    pub random: DistanceStats,
}

impl SweepPoint {
    /// Gap between the population means in units of their pooled spread.
    /// Infinite when both populations are constant but differ.
    pub fn separation(&self) -> f64 {
        let gap = self.random.mean - self.repeated.mean;
        let spread = ((self.random.std_dev.powi(2) + self.repeated.std_dev.powi(2)) / 2.0).sqrt();
        if spread > 0.0 {
            gap / spread
        } else if gap > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// LHD statistics for `L = 1..=max` over repeated-challenge and random-challenge pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoosenessSweep {
    pub points: Vec<SweepPoint>,
}

pub fn looseness_sweep(
    repeated_pairs: &[ResponsePair<'_>],
    random_pairs: &[ResponsePair<'_>],
    max_looseness: u32,
) -> Result<LoosenessSweep> {
    if max_looseness == 0 {
        return Err(PufError::Domain("max looseness must be >= 1".into()));
    }
    if repeated_pairs.is_empty() {
        return Err(PufError::Empty("repeated-challenge pairs"));
    }
    if random_pairs.is_empty() {
        return Err(PufError::Empty("random-challenge pairs"));
    }
    let lhds = |pairs: &[ResponsePair<'_>], l: Looseness| -> Result<Vec<f64>> {
        pairs
            .iter()
            .map(|(a, b)| loose_hamming_distance(a, b, l).map(|d| d as f64))
            .collect()
    };
    let points = (1..=max_looseness)
        .map(|l| {
            let looseness = Looseness::new(l)?;
            Ok(SweepPoint {
                looseness: l,
                repeated: distance_stats(&lhds(repeated_pairs, looseness)?, 1.0)?,
                random: distance_stats(&lhds(random_pairs, looseness)?, 1.0)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LoosenessSweep { points })
}

impl LoosenessSweep {
    /// Looseness with the largest separation; the smallest such `L` on ties.
    pub fn optimal_looseness(&self) -> Option<u32> {
        let mut best: Option<&SweepPoint> = None;
        for p in &self.points {
            if best.is_none_or(|b| p.separation() > b.separation()) {
                best = Some(p);
            }
        }
        best.map(|p| p.looseness)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("looseness,repeated_mean,repeated_std,random_mean,random_std,separation\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                p.looseness,
                p.repeated.mean,
                p.repeated.std_dev,
                p.random.mean,
                p.random.std_dev,
                p.separation()
            );
        }
        out
    }
}
