//! Response quantization and the PUF comparison metrics.

mod distance;
mod quantize;
mod stats;
mod sweep;

pub use distance::{aggregate_uniqueness, euclidean_distance, loose_hamming_distance, uniqueness, Looseness};
pub(crate) use distance::{l2_unchecked, lhd_unchecked};
pub use quantize::{quantize, quantize_intensities, BinFraction, QuantizedResponse, DEFAULT_BIN_FRACTION};
pub use stats::{distance_stats, histogram_csv, pooled_std, DistanceStats, HistogramBin};
pub use sweep::{looseness_sweep, LoosenessSweep, ResponsePair, SweepPoint};
