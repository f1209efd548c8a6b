//! The two-token categorical policy: a format token and a score-bin token,
//! each an independent softmax over affine functions of the image features.

mod adamw;
mod checkpoint;
mod params;

pub use adamw::{adamw_step, AdamWConfig, OptimizerState};
pub use checkpoint::Checkpoint;
pub use params::{
    exact_distribution, grad_logprob, greedy, head_log_probs, logprob, sample_rollouts, snapshot,
    token_distributions, FormatToken, Gradient, HeadLogProbs, PolicyParams, Rollout, Snapshot,
};
