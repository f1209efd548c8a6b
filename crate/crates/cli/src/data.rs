use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use hawkeye_core::dataset::{
    build_pairs, generate_set, load_manifest, save_labeled_set, KindTag, Pattern, SyntheticRanges,
};
use hawkeye_core::imgcore::manifest::save_pairs;
use hawkeye_core::imgcore::{
    AlwaysAccept, ContrastJudge, DegradationKind, Image, PixelDifferenceJudge, Verdict,
};
use serde::{Deserialize, Serialize};

use crate::flags::{load_toml, parse_enum, parse_list, write_resolved};

/// Settings of `gen-data`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub count: usize,
    pub seed: u64,
    pub size: usize,
    pub patterns: Vec<Pattern>,
    pub kinds: Vec<KindTag>,
    pub strength_min: f64,
    pub strength_max: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        let r = SyntheticRanges::default();
        Self {
            count: 200,
            seed: 0,
            size: r.size,
            patterns: r.patterns,
            kinds: r.kinds,
            strength_min: r.strength_min,
            strength_max: r.strength_max,
        }
    }
}

impl GenConfig {
    pub fn ranges(&self) -> SyntheticRanges {
        SyntheticRanges {
            size: self.size,
            patterns: self.patterns.clone(),
            kinds: self.kinds.clone(),
            strength_min: self.strength_min,
            strength_max: self.strength_max,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Output directory (images/ and manifest.csv)
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file with gen-data settings
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of images
    #[arg(long)]
    pub count: Option<usize>,
    /// Image side length in pixels
    #[arg(long)]
    pub size: Option<usize>,
    /// Comma-separated subset of gradient,checkerboard,texture
    #[arg(long, value_delimiter = ',', value_parser = parse_enum::<Pattern>)]
    pub patterns: Option<Vec<Pattern>>,
    /// Comma-separated subset of noise,blur,jpeg,darken
    #[arg(long, value_delimiter = ',', value_parser = parse_enum::<KindTag>)]
    pub kinds: Option<Vec<KindTag>>,
    #[arg(long)]
    pub strength_min: Option<f64>,
    #[arg(long)]
    pub strength_max: Option<f64>,
}

pub fn gen_data(args: &GenArgs) -> Result<()> {
    let mut cfg: GenConfig = match &args.config {
        Some(p) => load_toml(p)?,
        None => GenConfig::default(),
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.count {
        cfg.count = v;
    }
    if let Some(v) = args.size {
        cfg.size = v;
    }
    if let Some(v) = &args.patterns {
        cfg.patterns = v.clone();
    }
    if let Some(v) = &args.kinds {
        cfg.kinds = v.clone();
    }
    if let Some(v) = args.strength_min {
        cfg.strength_min = v;
    }
    if let Some(v) = args.strength_max {
        cfg.strength_max = v;
    }
    let items = generate_set(cfg.count, &cfg.ranges(), cfg.seed)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    save_labeled_set(&args.out, &items)
        .with_context(|| format!("writing dataset to {}", args.out.display()))?;
    write_resolved(&args.out, &cfg)?;
    println!("wrote {} images to {}", items.len(), args.out.display());
    Ok(())
}

/// Settings of `degrade`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradeConfig {
    pub seed: u64,
    /// `pixel`, `accept`, or `reject:<kind>[,<kind>...]`.
    pub judge: String,
    /// Mean absolute pixel difference the `pixel` judge requires.
    pub threshold: f64,
    pub max_attempts: usize,
    /// Raw MOS range of the input manifest.
    pub raw_min: f64,
    pub raw_max: f64,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            judge: "pixel".into(),
            threshold: 1.0,
            max_attempts: 16,
            raw_min: 1.0,
            raw_max: 5.0,
        }
    }
}

#[derive(Args, Debug)]
pub struct DegradeArgs {
    /// Labelled manifest (image_path, raw_mos)
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory (images/ and pairs.csv)
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file with degrade settings
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// pixel | accept | reject:<kind>[,<kind>...]
    #[arg(long)]
    pub judge: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub max_attempts: Option<usize>,
    #[arg(long)]
    pub raw_min: Option<f64>,
    #[arg(long)]
    pub raw_max: Option<f64>,
}

/// Judges selectable from the command line.
enum CliJudge {
    Pixel(PixelDifferenceJudge),
    Accept(AlwaysAccept),
    /// Rejects the named operators and accepts every other.
    Reject(Vec<KindTag>),
}

impl CliJudge {
    fn parse(spec: &str, threshold: f64) -> Result<Self> {
        match spec.split_once(':') {
            None if spec == "pixel" => Ok(CliJudge::Pixel(PixelDifferenceJudge { threshold })),
            None if spec == "accept" => Ok(CliJudge::Accept(AlwaysAccept)),
            Some(("reject", kinds)) => Ok(CliJudge::Reject(
                parse_list(kinds).map_err(anyhow::Error::msg)?,
            )),
            _ => bail!("unknown judge {spec:?} (expected pixel, accept or reject:<kinds>)"),
        }
    }
}

fn tag_of(kind: &DegradationKind) -> KindTag {
    match kind {
        DegradationKind::Noise { .. } => KindTag::Noise,
        DegradationKind::Blur { .. } => KindTag::Blur,
        DegradationKind::Jpeg { .. } => KindTag::Jpeg,
        DegradationKind::Darken { .. } => KindTag::Darken,
    }
}

impl ContrastJudge for CliJudge {
    fn judge(
        &self,
        original: &Image,
        degraded: &Image,
        kind: &DegradationKind,
    ) -> hawkeye_core::Result<Verdict> {
        match self {
            CliJudge::Pixel(j) => j.judge(original, degraded, kind),
            CliJudge::Accept(j) => j.judge(original, degraded, kind),
            CliJudge::Reject(tags) if tags.contains(&tag_of(kind)) => {
                Ok(Verdict::Indistinguishable)
            }
            CliJudge::Reject(_) => Ok(Verdict::Distinguishable),
        }
    }
}

pub fn degrade(args: &DegradeArgs) -> Result<()> {
    let mut cfg: DegradeConfig = match &args.config {
        Some(p) => load_toml(p)?,
        None => DegradeConfig::default(),
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.judge {
        cfg.judge = v.clone();
    }
    if let Some(v) = args.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = args.max_attempts {
        cfg.max_attempts = v;
    }
    if let Some(v) = args.raw_min {
        cfg.raw_min = v;
    }
    if let Some(v) = args.raw_max {
        cfg.raw_max = v;
    }
    let judge = CliJudge::parse(&cfg.judge, cfg.threshold)?;
    let items = load_manifest(&args.manifest, cfg.raw_min, cfg.raw_max)
        .with_context(|| format!("loading {}", args.manifest.display()))?;

    let mut kept = Vec::new();
    let (mut resamples, mut exhausted) = (0usize, 0usize);
    for (i, result) in build_pairs(&items, &judge, cfg.seed, cfg.max_attempts)
        .into_iter()
        .enumerate()
    {
        match result {
            Ok(pair) => {
                resamples += pair.filter_attempts - 1;
                kept.push((format!("{i:05}"), pair));
            }
            Err(hawkeye_core::Error::FilterExhausted { attempts }) => {
                eprintln!("item {i}: no distinguishable degradation in {attempts} attempts");
                exhausted += 1;
            }
            Err(e) => return Err(e).with_context(|| format!("item {i}")),
        }
    }
    if kept.is_empty() && exhausted > 0 {
        bail!("every item exhausted the contrast filter ({exhausted} items)");
    }
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    save_pairs(&args.out, &kept)
        .with_context(|| format!("writing pairs to {}", args.out.display()))?;
    write_resolved(&args.out, &cfg)?;
    println!("pairs kept: {}", kept.len());
    println!("total resamples: {resamples}");
    println!("exhausted: {exhausted}");
    Ok(())
}
