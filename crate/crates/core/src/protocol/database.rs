use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::VerifyPolicy;
use crate::error::{PufError, Result};
use crate::fabrication::Challenge;
use crate::metrics::{DistanceStats, QuantizedResponse};

pub const DB_FORMAT_VERSION: u32 = 1;

/// One enrolled challenge-response pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrpRecord {
    pub challenge_id: u64,
    pub challenge: Challenge,
    pub reference: QuantizedResponse,
    /// ℓ² distances of the enrollment repeats to the reference.
    pub repeat_l2: Option<DistanceStats>,
    /// LHD (at the enrollment looseness) of the repeats to the reference.
    pub repeat_lhd: Option<DistanceStats>,
    pub consumed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnrollmentInfo {
    pub challenge_count: usize,
    pub repeats_per_challenge: u32,
    pub rng_seed: u64,
    pub noise_seed: u64,
    pub bin_fraction: f64,
    pub looseness: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbHeader {
    pub format_version: u32,
    /// Digest of the enrolled device's chip seed and carving.
    pub device_digest: String,
    pub enrollment: EnrollmentInfo,
    pub collision_count: usize,
    pub policy: Option<VerifyPolicy>,
}

/// Enrolled CRPs. Persisted as line-delimited JSON: the header on the first
/// line, then one record per line in ascending id order.
#[derive(Clone, Debug, PartialEq)]
pub struct CrpDatabase {
    pub header: DbHeader,
    records: Vec<CrpRecord>,
    index: HashMap<u64, usize>,
}

impl CrpDatabase {
    pub fn new(header: DbHeader, mut records: Vec<CrpRecord>) -> Result<Self> {
        if header.format_version != DB_FORMAT_VERSION {
            return Err(PufError::FormatVersion {
                found: header.format_version,
                expected: DB_FORMAT_VERSION,
            });
        }
        records.sort_by_key(|r| r.challenge_id);
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if index.insert(r.challenge_id, i).is_some() {
                return Err(PufError::Config(format!("duplicate challenge id {}", r.challenge_id)));
            }
        }
        Ok(Self { header, records, index })
    }

    pub fn records(&self) -> &[CrpRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, challenge_id: u64) -> Result<&CrpRecord> {
        self.index
            .get(&challenge_id)
            .map(|&i| &self.records[i])
            .ok_or(PufError::UnknownChallenge(challenge_id))
    }

    pub fn unconsumed(&self) -> usize {
        self.records.iter().filter(|r| !r.consumed).count()
    }

    /// Draws an unconsumed record uniformly at random and marks it consumed.
    pub fn issue_challenge<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<CrpRecord> {
        let open: Vec<usize> = (0..self.records.len()).filter(|&i| !self.records[i].consumed).collect();
        if open.is_empty() {
            return Err(PufError::Exhausted);
        }
        let pick = open[rng.random_range(0..open.len())];
        self.records[pick].consumed = true;
        Ok(self.records[pick].clone())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| PufError::io("<writer>", e);
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n").map_err(io)?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header_line = lines
            .next()
            .ok_or(PufError::Empty("database header"))?
            .map_err(|e| PufError::io("<reader>", e))?;
        let header: DbHeader = serde_json::from_str(&header_line)?;
        let mut records = Vec::new();
        for line in lines {
            let line = line.map_err(|e| PufError::io("<reader>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        Self::new(header, records)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| PufError::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| match e {
            PufError::Io { source, .. } => PufError::io(path, source),
            other => other,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| PufError::io(path, e))?;
        Self::read_from(file)
    }
}

/// Distinct challenges whose enrolled references are identical in every channel.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionReport {
    /// Number of colliding record pairs.
    pub complete_collisions: usize,
    /// Groups of challenge ids sharing one reference response.
    pub groups: Vec<Vec<u64>>,
}

pub fn audit_collisions(records: &[CrpRecord]) -> CollisionReport {
    let mut by_response: HashMap<&QuantizedResponse, Vec<&CrpRecord>> = HashMap::new();
    for r in records {
        by_response.entry(&r.reference).or_default().push(r);
    }
    let mut report = CollisionReport::default();
    for group in by_response.into_values() {
        // identical challenges drawn twice are not collisions
        let mut distinct: Vec<&CrpRecord> = Vec::new();
        for r in group {
            if !distinct.iter().any(|d| d.challenge == r.challenge) {
                distinct.push(r);
            }
        }
        if distinct.len() > 1 {
            let k = distinct.len();
            report.complete_collisions += k * (k - 1) / 2;
            let mut ids: Vec<u64> = distinct.iter().map(|r| r.challenge_id).collect();
            ids.sort_unstable();
            report.groups.push(ids);
        }
    }
    report.groups.sort();
    report
}
