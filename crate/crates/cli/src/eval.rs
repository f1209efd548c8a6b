use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use hawkeye_core::dataset::load_manifest;
use hawkeye_core::featex::{extract, Standardization};
use hawkeye_core::metrics::{plcc, srcc};
use hawkeye_core::policy::{greedy, Checkpoint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flags::{load_toml, write_resolved};

/// Settings of `eval`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Name written in the report's `dataset` column.
    pub dataset: String,
    pub raw_min: f64,
    pub raw_max: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            dataset: "synthetic".into(),
            raw_min: 1.0,
            raw_max: 5.0,
        }
    }
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// checkpoint.json written by `train`
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Labelled manifest (image_path, raw_mos)
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file with eval settings
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub raw_min: Option<f64>,
    #[arg(long)]
    pub raw_max: Option<f64>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let mut cfg: EvalConfig = match &args.config {
        Some(p) => load_toml(p)?,
        None => EvalConfig::default(),
    };
    if let Some(v) = &args.dataset {
        cfg.dataset = v.clone();
    }
    if let Some(v) = args.raw_min {
        cfg.raw_min = v;
    }
    if let Some(v) = args.raw_max {
        cfg.raw_max = v;
    }
    let ck = Checkpoint::load(&args.checkpoint)
        .with_context(|| format!("loading {}", args.checkpoint.display()))?;
    let features = ck.features.clone().unwrap_or_default();
    let items = load_manifest(&args.manifest, cfg.raw_min, cfg.raw_max)
        .with_context(|| format!("loading {}", args.manifest.display()))?;
    if items.len() < 2 {
        bail!("evaluation needs at least 2 images, got {}", items.len());
    }
    let preds = predict(&ck, &features, &items)?;
    let truth: Vec<f64> = items.iter().map(|i| i.mos).collect();

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_resolved(&args.out, &cfg)?;
    let mut w = csv::Writer::from_path(args.out.join("predictions.csv"))?;
    w.write_record(["index", "mos", "predicted"])?;
    for (i, (t, p)) in truth.iter().zip(&preds).enumerate() {
        w.write_record([i.to_string(), t.to_string(), p.to_string()])?;
    }
    w.flush()?;

    let constant = |e: hawkeye_core::Error| match e {
        hawkeye_core::Error::ConstantInput => {
            anyhow::anyhow!("ConstantInput: predicted scores are constant, correlation undefined")
        }
        other => other.into(),
    };
    let p = plcc(&preds, &truth).map_err(constant)?;
    let s = srcc(&preds, &truth).map_err(constant)?;
    let mut w = csv::Writer::from_path(args.out.join("report.csv"))?;
    w.write_record(["dataset_name", "N", "plcc", "srcc"])?;
    w.write_record([
        cfg.dataset.clone(),
        items.len().to_string(),
        p.to_string(),
        s.to_string(),
    ])?;
    w.flush()?;
    println!("{}: n={} plcc={p:.4} srcc={s:.4}", cfg.dataset, items.len());
    Ok(())
}

fn predict(
    ck: &Checkpoint,
    features: &Standardization,
    items: &[hawkeye_core::dataset::LabeledImage],
) -> Result<Vec<f64>> {
    let preds = items
        .par_iter()
        .map(|item| Ok(greedy(&ck.params, &extract(&item.image, features))?.2))
        .collect::<hawkeye_core::Result<Vec<f64>>>()?;
    Ok(preds)
}
