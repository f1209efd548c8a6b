//! Group-relative policy optimization with uncertainty-weighted advantages,
//! a reference-policy KL, the implicit perception KL and double entropy
//! regularization.

mod advantage;
mod config;
mod objective;
mod train;

pub use advantage::{
    estimate_uncertainty, group_advantages, reweight_advantages, score_group, uncertainty_weight,
    RolloutGroup,
};
pub use config::{KlMode, TrainConfig, WeightingMode};
pub use objective::{
    clipped_surrogate, entropy_estimate, entropy_estimate_with_grad, exact_cross_entropy,
    exact_entropy, kl_reference, objective, perception_kl, total_loss, LossBreakdown,
    SampleOutcome,
};
pub use train::{
    prepare_samples, train, train_samples, write_step_log, StepLog, TrainOutcome, TrainSample,
    STEP_LOG_HEADER,
};
