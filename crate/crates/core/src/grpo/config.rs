use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::featex::Standardization;
use crate::policy::AdamWConfig;
use crate::reward::RewardConfig;
use crate::{Error, Result};

/// How KL and entropy terms are evaluated inside the training objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlMode {
    /// Enumerate the joint outcome space.
    Exact,
    /// Average log-ratios over the rollout group.
    MonteCarlo,
}

/// Sample-level advantage weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingMode {
    /// `w = 1`.
    Vanilla,
    /// `w = exp(-tau * u_norm)`.
    Uncertainty,
    /// `w = exp(-tau * (1 - u_norm))`, favouring unstable samples.
    Reverse,
}

impl WeightingMode {
    pub fn weight(self, u_norm: f64, tau: f64) -> f64 {
        match self {
            WeightingMode::Vanilla => 1.0,
            WeightingMode::Uncertainty => super::uncertainty_weight(u_norm, tau),
            WeightingMode::Reverse => (-tau * (1.0 - u_norm)).exp(),
        }
    }
}

/// Every training hyperparameter. Serialized as flat TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Rollouts per sample.
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tau: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eps_clip: f64,
    pub eps_std: f64,
    pub eps_u: f64,
    pub lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Stop after this many optimizer steps; 0 means no cap.
    pub max_steps: usize,
    pub seed: u64,
    pub bins: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub kl_mode: KlMode,
    pub weighting: WeightingMode,
    pub feature_center: [f64; 6],
    pub feature_scale: [f64; 6],
}

impl Default for TrainConfig {
    fn default() -> Self {
        let std = Standardization::default();
        Self {
            k: 8,
            alpha: 0.30,
            beta: 1e-3,
            gamma: 5e-4,
            tau: 0.2,
            eta1: 1e-4,
            eta2: 1e-4,
            eps_clip: 0.2,
            eps_std: 1e-8,
            eps_u: 1e-6,
            lr: 5e-6,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            weight_decay: 0.01,
            batch_size: 32,
            epochs: 15,
            max_steps: 0,
            seed: 0,
            bins: 17,
            y_min: 1.0,
            y_max: 5.0,
            kl_mode: KlMode::Exact,
            weighting: WeightingMode::Uncertainty,
            feature_center: std.center,
            feature_scale: std.scale,
        }
    }
}

impl TrainConfig {
    /// Small-scale settings used for synthetic experiments: larger step size,
    /// fixed step budget, everything else at its default.
    pub fn desk_scale(seed: u64) -> Self {
        Self {
            lr: 1e-2,
            max_steps: 300,
            epochs: 1000,
            seed,
            ..Self::default()
        }
    }

    pub fn reward(&self) -> RewardConfig {
        RewardConfig {
            alpha: self.alpha,
            y_min: self.y_min,
            y_max: self.y_max,
        }
    }

    pub fn adamw(&self) -> AdamWConfig {
        AdamWConfig {
            lr: self.lr,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
            weight_decay: self.weight_decay,
        }
    }

    pub fn standardization(&self) -> Standardization {
        Standardization {
            center: self.feature_center,
            scale: self.feature_scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.k < 2 {
            return fail("k must be at least 2");
        }
        if self.bins < 2 {
            return fail("bins must be at least 2");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive");
        }
        if !(self.alpha > 0.0) || !(self.tau > 0.0) || !(self.eps_clip > 0.0) {
            return fail("alpha, tau and eps_clip must be positive");
        }
        if !(self.eps_std > 0.0) || !(self.eps_u > 0.0) || !(self.lr > 0.0) {
            return fail("eps_std, eps_u and lr must be positive");
        }
        if !(self.y_min < self.y_max) {
            return fail("y_min must be below y_max");
        }
        let coeffs = [
            self.beta,
            self.gamma,
            self.eta1,
            self.eta2,
            self.weight_decay,
        ];
        if coeffs.iter().any(|c| !c.is_finite())
            || self.beta < 0.0
            || self.gamma < 0.0
            || self.weight_decay < 0.0
        {
            return fail(
                "beta, gamma and weight_decay must be finite and non-negative; eta must be finite",
            );
        }
        if !self.standardization().validate() {
            return fail("feature_scale must be positive and finite");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: TrainConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}
