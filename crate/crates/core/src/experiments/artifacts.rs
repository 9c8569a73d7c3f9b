use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::run::{ExperimentReport, InterRow, PairRow, RawComparisons};
use crate::error::{PufError, Result};
use crate::metrics::{histogram_csv, DistanceStats};

pub const INTER_CSV: &str = "inter_distances.csv";
pub const INTRA_CSV: &str = "intra_distances.csv";
pub const RANDOM_CSV: &str = "random_distances.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const CONFIG_JSON: &str = "config.json";
pub const MANIFEST_JSON: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

fn lhd_header(max: u32) -> String {
    (1..=max).map(|l| format!(",lhd_l{l}")).collect()
}

fn lhd_cells(lhd: &[u32]) -> String {
    lhd.iter().map(|v| format!(",{v}")).collect()
}

fn inter_csv(rows: &[InterRow], lmax: u32) -> String {
    let mut out = format!("index,digest_a,digest_b,l2{}\n", lhd_header(lmax));
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}{}",
            r.index,
            r.digest_a,
            r.digest_b,
            r.l2,
            lhd_cells(&r.lhd)
        );
    }
    out
}

fn pair_csv(rows: &[PairRow], lmax: u32, index_name: &str) -> String {
    let mut out = format!("device,{index_name},l2{}\n", lhd_header(lmax));
    for r in rows {
        let _ = writeln!(out, "{},{},{}{}", r.device, r.index, r.l2, lhd_cells(&r.lhd));
    }
    out
}

fn hist(stats: &Option<DistanceStats>) -> String {
    match stats {
        Some(s) => s.histogram_csv(),
        None => histogram_csv(&[]),
    }
}

/// Writes raw distances, histograms, the summary and the exact config, plus
/// a manifest of SHA-256 digests. Output is a pure function of its inputs.
pub fn emit_artifacts(report: &ExperimentReport, config: &ExperimentConfig, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| PufError::io(dir, e))?;
    let lmax = config.looseness_max;
    let s = &report.summary;
    let mut files: Vec<(&str, String)> = vec![
        (CONFIG_JSON, config.to_json()?),
        (SUMMARY_JSON, serde_json::to_string_pretty(s)?),
        (INTER_CSV, inter_csv(&report.raw.inter, lmax)),
        (INTRA_CSV, pair_csv(&report.raw.intra, lmax, "repeat")),
        (RANDOM_CSV, pair_csv(&report.raw.random, lmax, "index")),
        ("hist_l2_inter.csv", hist(&s.inter_l2)),
        ("hist_l2_intra.csv", hist(&s.intra_l2)),
        ("hist_lhd_inter.csv", hist(&s.inter_lhd)),
        ("hist_lhd_intra.csv", hist(&s.intra_lhd)),
    ];
    let curves = s
        .looseness_curves
        .as_ref()
        .map(|c| c.to_csv())
        .unwrap_or_else(|| "looseness,repeated_mean,repeated_std,random_mean,random_std,separation\n".into());
    files.push(("looseness.csv", curves));

    let mut manifest = Manifest { files: Vec::new() };
    for (name, body) in &files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| PufError::io(&path, e))?;
        manifest.files.push(ManifestEntry {
            file: (*name).to_string(),
            sha256: hex::encode(Sha256::digest(body.as_bytes())),
            bytes: body.len(),
        });
    }
    let path = dir.join(MANIFEST_JSON);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| PufError::io(&path, e))?;
    Ok(manifest)
}

fn read(dir: &Path, name: &str) -> Result<(PathBuf, String)> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| PufError::io(&path, e))?;
    Ok((path, text))
}

fn bad(path: &Path, line: usize) -> PufError {
    PufError::Config(format!("{}: malformed row {line}", path.display()))
}

fn parse_pair_rows(path: &Path, text: &str) -> Result<Vec<PairRow>> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(n, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() < 3 {
                return Err(bad(path, n));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(path, n));
            Ok(PairRow {
                device: cells[0].parse().map_err(|_| bad(path, n))?,
                index: cells[1].parse().map_err(|_| bad(path, n))?,
                l2: num(cells[2])?,
                lhd: cells[3..]
                    .iter()
                    .map(|c| c.parse().map_err(|_| bad(path, n)))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// Reads the raw distance CSVs back from an artifact directory.
pub fn read_raw_comparisons(dir: &Path) -> Result<RawComparisons> {
    let (path, text) = read(dir, INTER_CSV)?;
    let inter = text
        .lines()
        .enumerate()
        .skip(1)
        .map(|(n, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() < 4 {
                return Err(bad(&path, n));
            }
            Ok(InterRow {
                index: cells[0].parse().map_err(|_| bad(&path, n))?,
                digest_a: cells[1].to_string(),
                digest_b: cells[2].to_string(),
                l2: cells[3].parse().map_err(|_| bad(&path, n))?,
                lhd: cells[4..]
                    .iter()
                    .map(|c| c.parse().map_err(|_| bad(&path, n)))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    let (path, text) = read(dir, INTRA_CSV)?;
    let intra = parse_pair_rows(&path, &text)?;
    let (path, text) = read(dir, RANDOM_CSV)?;
    let random = parse_pair_rows(&path, &text)?;
    Ok(RawComparisons { inter, intra, random })
}
