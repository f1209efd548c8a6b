use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use hawkeye_core::grpo::{KlMode, TrainConfig, WeightingMode};
use serde::de::{value::StrDeserializer, DeserializeOwned, IntoDeserializer};
use serde::Serialize;

/// Parses a unit enum variant by its serde name.
pub fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    let de: StrDeserializer<'_, serde::de::value::Error> = s.into_deserializer();
    T::deserialize(de).map_err(|e| e.to_string())
}

pub fn parse_list<T: DeserializeOwned>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').map(|v| parse_enum(v.trim())).collect()
}

fn parse_vec6(s: &str) -> Result<[f64; 6], String> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<_, _>>()?;
    vals.try_into()
        .map_err(|v: Vec<f64>| format!("expected 6 comma-separated values, got {}", v.len()))
}

pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Writes `resolved.toml` into `dir`.
pub fn write_resolved<T: Serialize>(dir: &Path, cfg: &T) -> Result<()> {
    let text = toml::to_string(cfg).context("serializing resolved config")?;
    fs::write(dir.join("resolved.toml"), text).context("writing resolved.toml")?;
    Ok(())
}

/// One optional override per training hyperparameter.
#[derive(Args, Clone, Debug, Default)]
pub struct TrainFlags {
    /// Rollouts per sample
    #[arg(long)]
    pub k: Option<usize>,
    /// Accuracy-reward tolerance
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Reference-KL coefficient
    #[arg(long)]
    pub beta: Option<f64>,
    /// Perception-KL coefficient
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Uncertainty temperature
    #[arg(long)]
    pub tau: Option<f64>,
    /// Entropy coefficient, original condition
    #[arg(long, allow_negative_numbers = true)]
    pub eta1: Option<f64>,
    /// Entropy coefficient, degraded condition
    #[arg(long, allow_negative_numbers = true)]
    pub eta2: Option<f64>,
    #[arg(long)]
    pub eps_clip: Option<f64>,
    #[arg(long)]
    pub eps_std: Option<f64>,
    #[arg(long)]
    pub eps_u: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub adam_beta1: Option<f64>,
    #[arg(long)]
    pub adam_beta2: Option<f64>,
    #[arg(long)]
    pub adam_eps: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Optimizer step cap (0 = none)
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of score bins
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub y_min: Option<f64>,
    #[arg(long)]
    pub y_max: Option<f64>,
    /// exact | monte_carlo
    #[arg(long, value_parser = parse_enum::<KlMode>)]
    pub kl_mode: Option<KlMode>,
    /// vanilla | uncertainty | reverse
    #[arg(long, value_parser = parse_enum::<WeightingMode>)]
    pub weighting: Option<WeightingMode>,
    /// Six comma-separated feature centers
    #[arg(long, value_parser = parse_vec6, allow_hyphen_values = true)]
    pub feature_center: Option<[f64; 6]>,
    /// Six comma-separated feature scales
    #[arg(long, value_parser = parse_vec6)]
    pub feature_scale: Option<[f64; 6]>,
    /// Start from the small-scale preset (lr 1e-2, 300 steps) instead of
    /// the defaults; ignored when --config is given
    #[arg(long)]
    pub desk: bool,
}

macro_rules! apply_overrides {
    ($flags:expr, $cfg:expr, $($field:ident),* $(,)?) => {
        $(if let Some(v) = $flags.$field { $cfg.$field = v; })*
    };
}

impl TrainFlags {
    /// Defaults, or the desk preset with `--desk`.
    pub fn base(&self) -> TrainConfig {
        if self.desk {
            TrainConfig::desk_scale(0)
        } else {
            TrainConfig::default()
        }
    }

    /// Applies every given flag on top of `cfg` and validates the result.
    pub fn apply(&self, mut cfg: TrainConfig) -> Result<TrainConfig> {
        apply_overrides!(
            self,
            cfg,
            k,
            alpha,
            beta,
            gamma,
            tau,
            eta1,
            eta2,
            eps_clip,
            eps_std,
            eps_u,
            lr,
            adam_beta1,
            adam_beta2,
            adam_eps,
            weight_decay,
            batch_size,
            epochs,
            max_steps,
            seed,
            bins,
            y_min,
            y_max,
            kl_mode,
            weighting,
            feature_center,
            feature_scale,
        );
        if let Err(e) = cfg.validate() {
            bail!("invalid training config: {e}");
        }
        Ok(cfg)
    }

    /// Defaults (or the desk preset), then the config file, then the flags.
    pub fn resolve(&self, config: Option<&Path>) -> Result<TrainConfig> {
        let base = match config {
            Some(path) => load_toml(path)?,
            None => self.base(),
        };
        self.apply(base)
    }
}
