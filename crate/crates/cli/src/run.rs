use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use hawkeye_core::grpo::{
    train, write_step_log, StepLog, TrainConfig, TrainOutcome, WeightingMode,
};
use hawkeye_core::imgcore::manifest::load_pairs;
use hawkeye_core::imgcore::PairedSample;
use hawkeye_core::policy::Checkpoint;
use serde::{Deserialize, Serialize};

use crate::flags::{load_toml, parse_enum, write_resolved, TrainFlags};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Paired manifest written by `degrade`
    #[arg(long)]
    pub pairs: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// TOML training config (flat keys)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainFlags,
}

fn read_pairs(path: &Path) -> Result<Vec<PairedSample>> {
    let pairs = load_pairs(path).with_context(|| format!("loading {}", path.display()))?;
    if pairs.is_empty() {
        bail!("{} holds no pairs", path.display());
    }
    Ok(pairs)
}

/// Trains once and writes steps.csv, u_histogram.csv, checkpoint.json and
/// resolved.toml into `dir`.
fn run_one(pairs: &[PairedSample], cfg: &TrainConfig, dir: &Path) -> Result<TrainOutcome> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_resolved(dir, cfg)?;
    let out = train(pairs, cfg).context("training failed")?;
    write_step_log(
        BufWriter::new(File::create(dir.join("steps.csv"))?),
        &out.log,
    )?;
    let mut hist = csv::Writer::from_path(dir.join("u_histogram.csv"))?;
    hist.write_record(["u_lo", "u_hi", "count"])?;
    for (i, c) in out.u_histogram.iter().enumerate() {
        hist.write_record([
            format!("{:.1}", i as f64 / 10.0),
            format!("{:.1}", (i + 1) as f64 / 10.0),
            c.to_string(),
        ])?;
    }
    hist.flush()?;
    Checkpoint::new(out.params.clone(), Some(out.optimizer.clone()))
        .with_features(cfg.standardization())
        .save(&dir.join("checkpoint.json"))?;
    Ok(out)
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = args.flags.resolve(args.config.as_deref())?;
    let pairs = read_pairs(&args.pairs)?;
    let out = run_one(&pairs, &cfg, &args.out)?;
    match out.log.last() {
        Some(last) => println!(
            "{} steps, final mean reward {:.4}, reward std {:.4}",
            out.log.len(),
            last.mean_reward,
            last.reward_std
        ),
        None => println!("0 steps; checkpoint holds the initial policy"),
    }
    Ok(())
}

/// Ablation arms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Vanilla,
    Uncertainty,
    Reverse,
    PerceptionOff,
    EntropyOff,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Vanilla,
        Variant::Uncertainty,
        Variant::Reverse,
        Variant::PerceptionOff,
        Variant::EntropyOff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Vanilla => "vanilla",
            Variant::Uncertainty => "uncertainty",
            Variant::Reverse => "reverse",
            Variant::PerceptionOff => "perception-off",
            Variant::EntropyOff => "entropy-off",
        }
    }

    pub fn apply(self, base: &TrainConfig) -> TrainConfig {
        let mut cfg = base.clone();
        match self {
            Variant::Vanilla => cfg.weighting = WeightingMode::Vanilla,
            Variant::Uncertainty => cfg.weighting = WeightingMode::Uncertainty,
            Variant::Reverse => cfg.weighting = WeightingMode::Reverse,
            Variant::PerceptionOff => cfg.gamma = 0.0,
            Variant::EntropyOff => {
                cfg.eta1 = 0.0;
                cfg.eta2 = 0.0;
            }
        }
        cfg
    }
}

/// Settings of `ablate`; the base training config sits under `[train]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblateConfig {
    /// Number of seeds, counted up from `train.seed`.
    pub seeds: u64,
    /// Trailing window (steps) summarized in compare.csv.
    pub window: usize,
    pub variants: Vec<Variant>,
    pub train: TrainConfig,
}

impl Default for AblateConfig {
    fn default() -> Self {
        Self {
            seeds: 5,
            window: 50,
            variants: Variant::ALL.to_vec(),
            train: TrainConfig::default(),
        }
    }
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    /// Paired manifest written by `degrade`
    #[arg(long)]
    pub pairs: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// TOML ablation config (`seeds`, `window`, `variants`, `[train]`)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of seeds
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Final-window length in steps
    #[arg(long)]
    pub window: Option<usize>,
    /// Comma-separated subset of vanilla,uncertainty,reverse,perception-off,entropy-off
    #[arg(long, value_delimiter = ',', value_parser = parse_enum::<Variant>)]
    pub variants: Option<Vec<Variant>>,
    #[command(flatten)]
    pub flags: TrainFlags,
}

/// Mean reward and mean reward std over the last `window` steps.
pub fn final_window(log: &[StepLog], window: usize) -> (f64, f64) {
    let tail = &log[log.len().saturating_sub(window)..];
    let n = tail.len().max(1) as f64;
    (
        tail.iter().map(|s| s.mean_reward).sum::<f64>() / n,
        tail.iter().map(|s| s.reward_std).sum::<f64>() / n,
    )
}

pub fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    let mut cfg: AblateConfig = match &args.config {
        Some(p) => load_toml(p)?,
        None => AblateConfig::default(),
    };
    // flags override the [train] table; --desk only matters without a config
    let base = match &args.config {
        Some(_) => cfg.train.clone(),
        None => args.flags.base(),
    };
    cfg.train = args.flags.apply(base)?;
    if let Some(v) = args.seeds {
        cfg.seeds = v;
    }
    if let Some(v) = args.window {
        cfg.window = v;
    }
    if let Some(v) = &args.variants {
        cfg.variants = v.clone();
    }
    if cfg.seeds == 0 || cfg.variants.is_empty() {
        bail!("ablate needs at least one seed and one variant");
    }

    let pairs = read_pairs(&args.pairs)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_resolved(&args.out, &cfg)?;
    let mut compare = csv::Writer::from_path(args.out.join("compare.csv"))?;
    compare.write_record([
        "variant",
        "seed",
        "final_mean_reward",
        "final_reward_std",
        "window",
    ])?;
    for &variant in &cfg.variants {
        for offset in 0..cfg.seeds {
            let seed = cfg.train.seed + offset;
            let run_cfg = TrainConfig {
                seed,
                ..variant.apply(&cfg.train)
            };
            let dir = args.out.join(variant.name()).join(format!("seed-{seed}"));
            let out = run_one(&pairs, &run_cfg, &dir)
                .with_context(|| format!("variant {} seed {seed}", variant.name()))?;
            let (reward, std) = final_window(&out.log, cfg.window);
            compare.write_record([
                variant.name().to_string(),
                seed.to_string(),
                reward.to_string(),
                std.to_string(),
                cfg.window.to_string(),
            ])?;
            println!(
                "{:<15} seed {seed}: final mean reward {reward:.4}, reward std {std:.4}",
                variant.name()
            );
        }
    }
    compare.flush()?;
    Ok(())
}
