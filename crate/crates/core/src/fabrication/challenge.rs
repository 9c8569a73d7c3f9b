use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::chip::NOMINAL_V2PI;
use crate::error::{PufError, Result};

/// Voltage resolution per MZI.
pub const CHALLENGE_BITS: u32 = 10;
pub const CHALLENGE_LEVELS: u16 = 1 << CHALLENGE_BITS;

/// Heater voltages, one per device slot, on the grid `k · V2π_nominal / 1024`.
///
/// Stored as integer grid codes so that challenges round-trip exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Challenge {
    codes: Vec<u16>,
}

impl Challenge {
    pub fn from_codes(codes: Vec<u16>) -> Result<Self> {
        if let Some(bad) = codes.iter().find(|&&c| c >= CHALLENGE_LEVELS) {
            return Err(PufError::Domain(format!(
                "challenge code {bad} exceeds {} levels",
                CHALLENGE_LEVELS
            )));
        }
        Ok(Self { codes })
    }

    /// Snaps exact grid voltages back to codes; off-grid values are rejected.
    pub fn from_voltages(voltages: &[f64]) -> Result<Self> {
        let step = Self::step();
        let codes = voltages
            .iter()
            .map(|&v| {
                let k = (v / step).round();
                if !(0.0..f64::from(CHALLENGE_LEVELS)).contains(&k) || (k * step - v).abs() > 1e-12 {
                    Err(PufError::Domain(format!("voltage {v} is not on the challenge grid")))
                } else {
                    Ok(k as u16)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { codes })
    }

    pub fn zeros(len: usize) -> Self {
        Self { codes: vec![0; len] }
    }

    /// Uniform draw over the grid for every slot.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self {
            codes: (0..len).map(|_| rng.random_range(0..CHALLENGE_LEVELS)).collect(),
        }
    }

    /// Voltage step of one grid code.
    pub fn step() -> f64 {
        NOMINAL_V2PI / f64::from(CHALLENGE_LEVELS)
    }

    pub fn codes(&self) -> &[u16] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn voltages(&self) -> Vec<f64> {
        let step = Self::step();
        self.codes.iter().map(|&c| f64::from(c) * step).collect()
    }

    /// Returns a copy with one slot's code replaced.
    pub fn with_code(&self, slot: usize, code: u16) -> Result<Self> {
        let mut codes = self.codes.clone();
        *codes.get_mut(slot).ok_or(PufError::LengthMismatch {
            expected: self.codes.len(),
            actual: slot + 1,
        })? = code;
        Self::from_codes(codes)
    }

    /// First 16 hex digits of SHA-256 over the little-endian codes.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.codes {
            h.update(c.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}
