//! Paired-set manifest: one CSV row per accepted original/degraded pair.
//! Relative image paths resolve against the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{pnm, DegradationKind, PairedSample};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub original_path: String,
    pub degraded_path: String,
    pub degradation_kind: String,
    pub parameter_value: String,
    pub mos: f64,
    pub filter_attempts: usize,
}

impl PairRecord {
    pub fn new(original_path: String, degraded_path: String, pair: &PairedSample) -> Self {
        Self {
            original_path,
            degraded_path,
            degradation_kind: pair.degradation.name().to_string(),
            parameter_value: pair.degradation.parameter_value(),
            mos: pair.mos,
            filter_attempts: pair.filter_attempts,
        }
    }
}

pub fn write_records(path: &Path, records: &[PairRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if records.is_empty() {
        w.write_record([
            "original_path",
            "degraded_path",
            "degradation_kind",
            "parameter_value",
            "mos",
            "filter_attempts",
        ])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<PairRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .enumerate()
        .map(|(i, rec)| {
            rec.map_err(|e| Error::MalformedRow {
                row: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub(crate) fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Writes both images of every pair under `dir/images/` and the manifest at
/// `dir/pairs.csv`. `stems` names each pair's files.
pub fn save_pairs(dir: &Path, pairs: &[(String, PairedSample)]) -> Result<Vec<PairRecord>> {
    fs::create_dir_all(dir.join("images"))?;
    let mut records = Vec::with_capacity(pairs.len());
    for (stem, pair) in pairs {
        let ext = pnm::extension(&pair.original);
        let orig = format!("images/{stem}_orig.{ext}");
        let deg = format!("images/{stem}_deg.{ext}");
        pnm::write(&dir.join(&orig), &pair.original)?;
        pnm::write(&dir.join(&deg), &pair.degraded)?;
        records.push(PairRecord::new(orig, deg, pair));
    }
    write_records(&dir.join("pairs.csv"), &records)?;
    Ok(records)
}

/// Reads a paired manifest and its images.
pub fn load_pairs(path: &Path) -> Result<Vec<PairedSample>> {
    let base = path.parent().unwrap_or(Path::new("."));
    read_records(path)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let row_err = |reason: String| Error::MalformedRow { row: i + 1, reason };
            let degradation = DegradationKind::parse(&r.degradation_kind, &r.parameter_value)
                .map_err(|e| row_err(e.to_string()))?;
            if !(1.0..=5.0).contains(&r.mos) {
                return Err(Error::OutOfRange {
                    value: r.mos,
                    min: 1.0,
                    max: 5.0,
                });
            }
            let original = pnm::read(&resolve(base, &r.original_path))?;
            let degraded = pnm::read(&resolve(base, &r.degraded_path))?;
            if !original.same_shape(&degraded) {
                return Err(row_err("original and degraded shapes differ".into()));
            }
            Ok(PairedSample {
                original,
                degraded,
                degradation,
                mos: r.mos,
                filter_attempts: r.filter_attempts,
            })
        })
        .collect()
}
