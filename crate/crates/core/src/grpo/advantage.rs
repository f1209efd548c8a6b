use super::config::TrainConfig;
use crate::policy::Rollout;
use crate::reward::total_reward;

/// One scored rollout group.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutGroup {
    pub rollouts: Vec<Rollout>,
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
    pub weighted_advantages: Vec<f64>,
    pub u_raw: f64,
    pub u_norm: f64,
    pub weight: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

impl RolloutGroup {
    pub fn mean_reward(&self) -> f64 {
        mean(&self.rewards)
    }

    pub fn reward_std(&self) -> f64 {
        population_std(&self.rewards)
    }
}

/// `(r - mean) / std` with population statistics; an all-zero vector when the
/// group's reward spread is below `eps_std`.
pub fn group_advantages(rewards: &[f64], eps_std: f64) -> Vec<f64> {
    let mu = mean(rewards);
    let sigma = population_std(rewards);
    if !(sigma >= eps_std) {
        return vec![0.0; rewards.len()];
    }
    rewards.iter().map(|r| (r - mu) / sigma).collect()
}

/// Population variance of the parsed scores and its normalization by the
/// largest variance a distribution on `[y_min, y_max]` can have. With fewer
/// than two parseable scores the normalized value is 1.
pub fn estimate_uncertainty(scores: &[f64], y_min: f64, y_max: f64, eps_u: f64) -> (f64, f64) {
    if scores.len() < 2 {
        return (0.0, 1.0);
    }
    let m = mean(scores);
    let u = scores.iter().map(|s| (s - m).powi(2)).sum::<f64>() / scores.len() as f64;
    let delta = y_max - y_min;
    let u_norm = (u / (delta * delta / 4.0 + eps_u)).min(1.0);
    (u, u_norm)
}

/// `exp(-tau * u_norm)`.
pub fn uncertainty_weight(u_norm: f64, tau: f64) -> f64 {
    (-tau * u_norm).exp()
}

pub fn reweight_advantages(advantages: &[f64], w: f64) -> Vec<f64> {
    advantages.iter().map(|a| w * a).collect()
}

/// Rewards, advantages, uncertainty and weight for one group.
pub fn score_group(rollouts: Vec<Rollout>, truth: f64, cfg: &TrainConfig) -> RolloutGroup {
    let reward_cfg = cfg.reward();
    let rewards: Vec<f64> = rollouts
        .iter()
        .map(|r| total_reward(r, truth, &reward_cfg).r_total)
        .collect();
    let advantages = group_advantages(&rewards, cfg.eps_std);
    let scores: Vec<f64> = rollouts.iter().filter_map(|r| r.parsed_score).collect();
    let (u_raw, u_norm) = estimate_uncertainty(&scores, cfg.y_min, cfg.y_max, cfg.eps_u);
    let weight = cfg.weighting.weight(u_norm, cfg.tau);
    let weighted_advantages = reweight_advantages(&advantages, weight);
    RolloutGroup {
        rollouts,
        rewards,
        advantages,
        weighted_advantages,
        u_raw,
        u_norm,
        weight,
    }
}
