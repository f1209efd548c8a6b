//! Synthetic labelled images with a known quality oracle, MOS normalization,
//! and manifest ingestion for external image sets.

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::imgcore::manifest::resolve;
use crate::imgcore::{
    build_pair, gaussian_blur, pnm, ContrastJudge, DegradationKind, Image, PairedSample,
};
use crate::rng::{derive_seed, derived, seeded};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Gradient,
    Checkerboard,
    Texture,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Gradient, Pattern::Checkerboard, Pattern::Texture];
}

/// Which operator a synthetic image is degraded with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindTag {
    Noise,
    Blur,
    Jpeg,
    Darken,
}

impl KindTag {
    pub const ALL: [KindTag; 4] = [
        KindTag::Noise,
        KindTag::Blur,
        KindTag::Jpeg,
        KindTag::Darken,
    ];

    /// Operator at strength `s`: no-op at 0, the default configuration at 1.
    pub fn at_strength(self, s: f64) -> DegradationKind {
        match self {
            KindTag::Noise => DegradationKind::Noise {
                sigma: DegradationKind::DEFAULT_NOISE_SIGMA * s,
            },
            KindTag::Blur => DegradationKind::Blur {
                radius: DegradationKind::DEFAULT_BLUR_RADIUS * s,
            },
            KindTag::Jpeg => DegradationKind::Jpeg {
                quality: (100.0 - 95.0 * s).round() as u8,
                repeats: DegradationKind::DEFAULT_JPEG_REPEATS,
            },
            KindTag::Darken => DegradationKind::Darken {
                lambda: 1.0 - (1.0 - DegradationKind::DEFAULT_DARKEN_LAMBDA) * s,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub size: usize,
    pub pattern: Pattern,
    /// Degradation strength in [0, 1].
    pub strength: f64,
    pub kind: KindTag,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Synthetic,
    Manifest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledImage {
    pub image: Image,
    pub mos: f64,
    pub provenance: Provenance,
}

/// Quality oracle of the synthetic set: linear in strength.
pub fn synthetic_mos(strength: f64) -> f64 {
    5.0 - 4.0 * strength
}

fn render(pattern: Pattern, size: usize, seed: u64) -> Result<Image> {
    let n = size as f64;
    match pattern {
        Pattern::Gradient => Image::from_fn_gray(size, size, |x, y| {
            40.0 + 175.0 * (x + y) as f64 / (2.0 * n - 2.0)
        }),
        Pattern::Checkerboard => {
            let mut rng = seeded(seed);
            let (ox, oy) = (rng.random_range(0..10usize), rng.random_range(0..10usize));
            Image::from_fn_gray(size, size, |x, y| {
                if ((x + ox) / 5 + (y + oy) / 5) % 2 == 0 {
                    60.0
                } else {
                    190.0
                }
            })
        }
        Pattern::Texture => {
            let mut rng = seeded(seed);
            let px: Vec<u8> = (0..size * size).map(|_| rng.random()).collect();
            let smooth = gaussian_blur(&Image::new(size, size, 1, px)?, 1.5)?;
            let m = smooth.pixels().iter().map(|&p| p as f64).sum::<f64>() / (size * size) as f64;
            Image::from_fn_gray(size, size, |x, y| {
                128.0 + 3.0 * (smooth.get(x, y, 0) as f64 - m)
            })
        }
    }
}

/// Renders the base pattern and applies the spec's degradation.
pub fn generate(spec: &SyntheticSpec) -> Result<LabeledImage> {
    if spec.size < 16 {
        return Err(Error::InvalidParameter(format!(
            "synthetic size {} below 16",
            spec.size
        )));
    }
    if !(0.0..=1.0).contains(&spec.strength) {
        return Err(Error::OutOfRange {
            value: spec.strength,
            min: 0.0,
            max: 1.0,
        });
    }
    let base = render(spec.pattern, spec.size, derive_seed(spec.seed, &[0]))?;
    let image = if spec.strength == 0.0 {
        base
    } else {
        spec.kind
            .at_strength(spec.strength)
            .apply(&base, derive_seed(spec.seed, &[1]))?
    };
    Ok(LabeledImage {
        image,
        mos: synthetic_mos(spec.strength),
        provenance: Provenance::Synthetic,
    })
}

/// Sampling ranges for a synthetic set: every image draws its pattern and
/// operator uniformly from the lists and its strength uniformly from the
/// closed interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticRanges {
    pub size: usize,
    pub patterns: Vec<Pattern>,
    pub kinds: Vec<KindTag>,
    pub strength_min: f64,
    pub strength_max: f64,
}

impl Default for SyntheticRanges {
    fn default() -> Self {
        Self {
            size: 32,
            patterns: Pattern::ALL.to_vec(),
            kinds: KindTag::ALL.to_vec(),
            strength_min: 0.0,
            strength_max: 1.0,
        }
    }
}

impl SyntheticRanges {
    pub fn validate(&self) -> Result<()> {
        if self.size < 16 {
            return Err(Error::InvalidParameter(format!(
                "synthetic size {} below 16",
                self.size
            )));
        }
        if self.patterns.is_empty() || self.kinds.is_empty() {
            return Err(Error::InvalidParameter(
                "pattern and kind lists must be non-empty".into(),
            ));
        }
        let ok = 0.0 <= self.strength_min
            && self.strength_min <= self.strength_max
            && self.strength_max <= 1.0;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "strength range [{}, {}] outside [0, 1]",
                self.strength_min, self.strength_max
            )));
        }
        Ok(())
    }
}

/// `count` specs drawn from `ranges`; spec `i` uses the stream `derived(seed, [i])`.
pub fn sample_specs(
    count: usize,
    ranges: &SyntheticRanges,
    seed: u64,
) -> Result<Vec<SyntheticSpec>> {
    ranges.validate()?;
    Ok((0..count)
        .map(|i| {
            let mut rng = derived(seed, &[i as u64]);
            SyntheticSpec {
                size: ranges.size,
                pattern: ranges.patterns[rng.random_range(0..ranges.patterns.len())],
                kind: ranges.kinds[rng.random_range(0..ranges.kinds.len())],
                strength: rng.random_range(ranges.strength_min..=ranges.strength_max),
                seed: rng.random(),
            }
        })
        .collect())
}

pub fn generate_set(
    count: usize,
    ranges: &SyntheticRanges,
    seed: u64,
) -> Result<Vec<LabeledImage>> {
    sample_specs(count, ranges, seed)?
        .par_iter()
        .map(generate)
        .collect()
}

/// Runs the contrast filter over every item. Item `i` draws from its own
/// stream `derived(seed, [i])`, so results do not depend on evaluation order.
pub fn build_pairs<J>(
    items: &[LabeledImage],
    judge: &J,
    seed: u64,
    max_attempts: usize,
) -> Vec<Result<PairedSample>>
where
    J: ContrastJudge + Sync + ?Sized,
{
    items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let mut rng = derived(seed, &[i as u64]);
            build_pair(&item.image, item.mos, judge, &mut rng, max_attempts)
        })
        .collect()
}

/// `1 + 4 (raw - raw_min) / (raw_max - raw_min)`.
pub fn normalize_mos(raw: f64, raw_min: f64, raw_max: f64) -> Result<f64> {
    if !(raw_min < raw_max) {
        return Err(Error::InvalidParameter(format!(
            "raw range [{raw_min}, {raw_max}]"
        )));
    }
    if !(raw_min..=raw_max).contains(&raw) {
        return Err(Error::OutOfRange {
            value: raw,
            min: raw_min,
            max: raw_max,
        });
    }
    Ok(1.0 + 4.0 * (raw - raw_min) / (raw_max - raw_min))
}

pub const MANIFEST_HEADER: [&str; 2] = ["image_path", "raw_mos"];

/// Reads `(image_path, raw_mos)` rows; relative paths resolve against the
/// manifest's directory. Row numbers in errors count data rows from 1.
pub fn load_manifest(path: &Path, raw_min: f64, raw_max: f64) -> Result<Vec<LabeledImage>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        if rec.len() != 2 {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected 2 columns, got {}", rec.len()),
            });
        }
        let raw: f64 = rec[1].parse().map_err(|_| Error::MalformedRow {
            row,
            reason: format!("non-numeric MOS {:?}", &rec[1]),
        })?;
        let mos = normalize_mos(raw, raw_min, raw_max)?;
        let image = pnm::read(&resolve(base, &rec[0]))?;
        out.push(LabeledImage {
            image,
            mos,
            provenance: Provenance::Manifest,
        });
    }
    Ok(out)
}

/// Dumps images as PGM/PPM under `dir/images/` plus `dir/manifest.csv`
/// carrying the MOS already on [1, 5].
pub fn save_labeled_set(dir: &Path, items: &[LabeledImage]) -> Result<()> {
    fs::create_dir_all(dir.join("images"))?;
    let mut w = csv::Writer::from_path(dir.join("manifest.csv"))?;
    w.write_record(MANIFEST_HEADER)?;
    for (i, item) in items.iter().enumerate() {
        let rel = format!("images/{i:05}.{}", pnm::extension(&item.image));
        pnm::write(&dir.join(&rel), &item.image)?;
        w.write_record([rel, item.mos.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
