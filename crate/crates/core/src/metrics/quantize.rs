use serde::{Deserialize, Serialize};

use crate::error::{PufError, Result};
use crate::fabrication::RawResponse;

/// Default bin width: 0.5% of total detected power.
pub const DEFAULT_BIN_FRACTION: f64 = 0.005;

/// Slack applied before flooring so that values landing exactly on a bin
/// edge are not pushed down by rounding in the division.
const EDGE_EPSILON: f64 = 1e-9;

/// Output intensities normalized to unit total power and floored into bins
/// of width `bin_fraction`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantizedResponse {
    pub bins: Vec<u32>,
    pub bin_fraction: BinFraction,
}

/// Bin width as a fraction of total power. Compared bit-for-bit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinFraction(pub f64);

impl Eq for BinFraction {}

impl std::hash::Hash for BinFraction {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl QuantizedResponse {
    pub fn new(bins: Vec<u32>, bin_fraction: f64) -> Self {
        Self {
            bins,
            bin_fraction: BinFraction(bin_fraction),
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.bins.len() != other.bins.len() {
            return Err(PufError::LengthMismatch {
                expected: self.bins.len(),
                actual: other.bins.len(),
            });
        }
        if self.bin_fraction != other.bin_fraction {
            return Err(PufError::BinMismatch(self.bin_fraction.0, other.bin_fraction.0));
        }
        Ok(())
    }
}

/// Normalizes to unit total power, then `bins_k = ⌊I_k / (f · ΣI)⌋`.
pub fn quantize(raw: &RawResponse, bin_fraction: f64) -> Result<QuantizedResponse> {
    quantize_intensities(raw.intensities.as_slice(), bin_fraction)
}

pub fn quantize_intensities(intensities: &[f64], bin_fraction: f64) -> Result<QuantizedResponse> {
    if !(bin_fraction > 0.0 && bin_fraction < 1.0) {
        return Err(PufError::Domain(format!("bin fraction {bin_fraction} outside (0, 1)")));
    }
    if intensities.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(PufError::Domain("intensities must be finite and non-negative".into()));
    }
    let total: f64 = intensities.iter().sum();
    if total <= 0.0 {
        return Err(PufError::DegenerateResponse);
    }
    let bins = intensities
        .iter()
        .map(|&x| ((x / total) / bin_fraction + EDGE_EPSILON).floor() as u32)
        .collect();
    Ok(QuantizedResponse::new(bins, bin_fraction))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[f64]) -> Vec<u32> {
        quantize_intensities(v, DEFAULT_BIN_FRACTION).unwrap().bins
    }

    #[test]
    fn floor_binning() {
        assert_eq!(q(&[0.5, 0.5]), vec![100, 100]);
        assert_eq!(q(&[1.0, 0.0]), vec![200, 0]);
        // 0.0049 / 0.005 = 0.98 → 0; 0.9951 / 0.005 = 199.02 → 199
        assert_eq!(q(&[0.0049, 0.9951]), vec![0, 199]);
    }

    #[test]
    fn normalizes_total_power() {
        assert_eq!(q(&[2.5, 2.5]), vec![100, 100]);
        assert_eq!(q(&[0.3, 0.1]), vec![150, 50]);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        assert!(matches!(
            quantize_intensities(&[0.0, 0.0], 0.005),
            Err(PufError::DegenerateResponse)
        ));
        assert!(quantize_intensities(&[1.0], 0.0).is_err());
        assert!(quantize_intensities(&[1.0], 1.0).is_err());
        assert!(quantize_intensities(&[-1.0, 2.0], 0.005).is_err());
    }

    #[test]
    fn bin_total_bounded() {
        let v = [0.123, 0.456, 0.0789, 0.3421, 0.0001];
        let r = quantize_intensities(&v, 0.005).unwrap();
        assert!(r.bins.iter().sum::<u32>() <= 200);
        let r = quantize_intensities(&v, 0.001).unwrap();
        assert!(r.bins.iter().sum::<u32>() <= 1000);
    }
}
