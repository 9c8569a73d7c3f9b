use serde::{Deserialize, Serialize};

use super::quantize::QuantizedResponse;
use crate::error::{PufError, Result};

/// Looseness `L ≥ 1` of the loose Hamming distance; `L = 1` is plain Hamming.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Looseness(u32);

impl Looseness {
    pub const HAMMING: Looseness = Looseness(1);
    /// Default for small devices.
    pub const SMALL_DEVICE: Looseness = Looseness(2);

    pub fn new(l: u32) -> Result<Self> {
        if l == 0 {
            return Err(PufError::Domain("looseness must be >= 1".into()));
        }
        Ok(Self(l))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for Looseness {
    type Error = PufError;

    fn try_from(l: u32) -> Result<Self> {
        Self::new(l)
    }
}

impl From<Looseness> for u32 {
    fn from(l: Looseness) -> u32 {
        l.0
    }
}

/// Number of channels whose bins differ by at least `L`.
pub fn loose_hamming_distance(a: &QuantizedResponse, b: &QuantizedResponse, l: Looseness) -> Result<usize> {
    a.check_compatible(b)?;
    Ok(lhd_unchecked(&a.bins, &b.bins, l))
}

pub(crate) fn lhd_unchecked(a: &[u32], b: &[u32], l: Looseness) -> usize {
    a.iter().zip(b).filter(|(x, y)| x.abs_diff(**y) >= l.0).count()
}

/// Euclidean (ℓ²) distance between bin vectors.
pub fn euclidean_distance(a: &QuantizedResponse, b: &QuantizedResponse) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(l2_unchecked(&a.bins, &b.bins))
}

pub(crate) fn l2_unchecked(a: &[u32], b: &[u32]) -> f64 {
    let sum: u64 = a.iter().zip(b).map(|(x, y)| u64::from(x.abs_diff(*y)).pow(2)).sum();
    (sum as f64).sqrt()
}

/// Uniqueness (in percent) of `n` devices' responses to one challenge:
/// the mean pairwise LHD normalized by the channel count `m`.
pub fn uniqueness(responses: &[QuantizedResponse], l: Looseness) -> Result<f64> {
    let n = responses.len();
    if n < 2 {
        return Err(PufError::Domain("uniqueness needs at least two devices".into()));
    }
    let m = responses[0].len();
    if m == 0 {
        return Err(PufError::Empty("response channels"));
    }
    let mut total = 0usize;
    for i in 0..n - 1 {
        for j in i + 1..n {
            total += loose_hamming_distance(&responses[i], &responses[j], l)?;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(total as f64 / m as f64 / pairs * 100.0)
}

/// Mean uniqueness over a set of mirrored challenges. Each inner slice holds
/// every device's response to the same challenge.
pub fn aggregate_uniqueness<R: AsRef<[QuantizedResponse]>>(mirrored: &[R], l: Looseness) -> Result<f64> {
    if mirrored.is_empty() {
        return Err(PufError::Empty("mirrored challenge set"));
    }
    let sum = mirrored
        .iter()
        .map(|r| uniqueness(r.as_ref(), l))
        .sum::<Result<f64>>()?;
    Ok(sum / mirrored.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(bins: &[u32]) -> QuantizedResponse {
        QuantizedResponse::new(bins.to_vec(), 0.005)
    }

    #[test]
    fn lhd_examples() {
        let a = r(&[3, 7, 2]);
        let b = r(&[3, 8, 9]);
        let l2 = Looseness::new(2).unwrap();
        assert_eq!(loose_hamming_distance(&a, &a, l2).unwrap(), 0);
        assert_eq!(loose_hamming_distance(&a, &b, l2).unwrap(), 1);
        assert_eq!(loose_hamming_distance(&a, &b, Looseness::HAMMING).unwrap(), 2);
    }

    #[test]
    fn lhd_rejects_mismatch() {
        let l = Looseness::HAMMING;
        assert!(matches!(
            loose_hamming_distance(&r(&[1, 2]), &r(&[1]), l),
            Err(PufError::LengthMismatch { .. })
        ));
        let other = QuantizedResponse::new(vec![1, 2], 0.001);
        assert!(matches!(
            loose_hamming_distance(&r(&[1, 2]), &other, l),
            Err(PufError::BinMismatch(..))
        ));
        assert!(Looseness::new(0).is_err());
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_distance(&r(&[4, 5]), &r(&[4, 5])).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&r(&[0, 3, 4]), &r(&[0, 0, 0])).unwrap(), 5.0);
        let mut a = vec![0; 8];
        let mut b = vec![0; 8];
        a[0] = 200;
        b[1] = 200;
        let d = euclidean_distance(&r(&a), &r(&b)).unwrap();
        assert!((d - 200.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((d - 282.84).abs() < 0.01);
        assert!(euclidean_distance(&r(&[1]), &r(&[1, 2])).is_err());
    }

    #[test]
    fn uniqueness_examples() {
        let l = Looseness::SMALL_DEVICE;
        let a = r(&[10; 8]);
        assert_eq!(uniqueness(&[a.clone(), a.clone()], l).unwrap(), 0.0);
        assert_eq!(uniqueness(&[a.clone(), r(&[20; 8])], l).unwrap(), 100.0);
        assert!(uniqueness(&[a], l).is_err());
    }

    #[test]
    fn uniqueness_with_lhds_8_4_0() {
        // At L = 2: (x,y) = 8, (x,z) = 4, (y,z) = 0.
        let l = Looseness::SMALL_DEVICE;
        let x = r(&[0; 8]);
        let y = r(&[2; 8]);
        let z = r(&[1, 1, 1, 1, 2, 2, 2, 2]);
        assert_eq!(loose_hamming_distance(&x, &y, l).unwrap(), 8);
        assert_eq!(loose_hamming_distance(&x, &z, l).unwrap(), 4);
        assert_eq!(loose_hamming_distance(&y, &z, l).unwrap(), 0);
        // (2/6)(1 + 0.5 + 0)·100
        assert!((uniqueness(&[x, y, z], l).unwrap() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_examples() {
        let l = Looseness::SMALL_DEVICE;
        let full = vec![vec![r(&[0; 8]), r(&[9; 8])]; 5];
        assert_eq!(aggregate_uniqueness(&full, l).unwrap(), 100.0);
        let same = vec![vec![r(&[3; 8]), r(&[3; 8])]; 5];
        assert_eq!(aggregate_uniqueness(&same, l).unwrap(), 0.0);
        let empty: Vec<Vec<QuantizedResponse>> = vec![];
        assert!(matches!(aggregate_uniqueness(&empty, l), Err(PufError::Empty(_))));
    }
}
