use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{PufError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: u64,
}

/// Summary of a distance population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (`n − 1` denominator; 0 for a single value).
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub bin_width: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Exact summary statistics plus a histogram with bins
/// `[k·w, (k+1)·w)` covering `[min, max]`.
pub fn distance_stats(values: &[f64], bin_width: f64) -> Result<DistanceStats> {
    if values.is_empty() {
        return Err(PufError::Empty("distance values"));
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(PufError::Domain(format!("histogram bin width {bin_width}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PufError::Domain("non-finite distance".into()));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_dev = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (min, max) = (sorted[0], sorted[n - 1]);

    let first = (min / bin_width).floor() as i64;
    let last = (max / bin_width).floor() as i64;
    let mut histogram: Vec<HistogramBin> = (first..=last)
        .map(|k| HistogramBin {
            low: k as f64 * bin_width,
            high: (k + 1) as f64 * bin_width,
            count: 0,
        })
        .collect();
    for v in &sorted {
        let k = ((v / bin_width).floor() as i64 - first) as usize;
        histogram[k].count += 1;
    }

    Ok(DistanceStats {
        count: n,
        mean,
        median,
        std_dev,
        min,
        max,
        bin_width,
        histogram,
    })
}

impl DistanceStats {
    /// Fraction of values falling in bins whose upper edge is `<= threshold`.
    /// Exact when `threshold` is a bin edge.
    pub fn fraction_below(&self, threshold: f64) -> f64 {
        let hits: u64 = self
            .histogram
            .iter()
            .filter(|b| b.high <= threshold + 1e-12)
            .map(|b| b.count)
            .sum();
        hits as f64 / self.count as f64
    }

    /// Histogram as CSV with header `bin_low,bin_high,count`.
    pub fn histogram_csv(&self) -> String {
        histogram_csv(&self.histogram)
    }
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_low,bin_high,count\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{}", b.low, b.high, b.count);
    }
    out
}

/// Pooled standard deviation of two populations, weighted equally:
/// `sqrt((s_a² + s_b²) / 2)`. Sample sizes are deliberately ignored so a
/// large inter-device population does not swamp a small repeat population.
pub fn pooled_std(a: &DistanceStats, b: &DistanceStats) -> f64 {
    ((a.std_dev.powi(2) + b.std_dev.powi(2)) / 2.0).sqrt()
}
