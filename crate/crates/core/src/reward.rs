//! Continuous accuracy reward, binary format reward, and their sum.

use serde::{Deserialize, Serialize};

use crate::policy::{FormatToken, Rollout};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    /// Tolerance in score units; smaller is stricter.
    pub alpha: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            alpha: 0.30,
            y_min: 1.0,
            y_max: 5.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardBreakdown {
    pub r_acc: f64,
    pub r_fmt: f64,
    pub r_total: f64,
}

/// `exp(-|pred - truth| / alpha)`.
pub fn accuracy_reward(pred: f64, truth: f64, alpha: f64) -> f64 {
    (-(pred - truth).abs() / alpha).exp()
}

pub fn format_reward(rollout: &Rollout) -> f64 {
    if rollout.format_token == FormatToken::Ok {
        1.0
    } else {
        0.0
    }
}

/// Unparseable rollouts earn no accuracy reward.
pub fn total_reward(rollout: &Rollout, truth: f64, cfg: &RewardConfig) -> RewardBreakdown {
    let r_fmt = format_reward(rollout);
    let r_acc = rollout
        .parsed_score
        .map_or(0.0, |s| accuracy_reward(s, truth, cfg.alpha));
    RewardBreakdown {
        r_acc,
        r_fmt,
        r_total: r_acc + r_fmt,
    }
}
