use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::config::TrainConfig;
use super::objective::{total_loss, LossBreakdown, SampleOutcome};
use crate::featex::{extract, FeatureVector, NUM_FEATURES};
use crate::imgcore::PairedSample;
use crate::policy::{adamw_step, snapshot, OptimizerState, PolicyParams};
use crate::rng::derived;
use crate::{Error, Result};

/// Features of one original/degraded pair plus its label.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSample {
    pub feat_orig: FeatureVector,
    pub feat_deg: FeatureVector,
    pub mos: f64,
}

pub fn prepare_samples(pairs: &[PairedSample], cfg: &TrainConfig) -> Vec<TrainSample> {
    let std = cfg.standardization();
    pairs
        .par_iter()
        .map(|p| TrainSample {
            feat_orig: extract(&p.original, &std),
            feat_deg: extract(&p.degraded, &std),
            mos: p.mos,
        })
        .collect()
}

/// Batch means of one optimizer step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepLog {
    pub step: usize,
    /// Mean reward over every rollout in the batch.
    pub mean_reward: f64,
    /// Mean within-group population std of rewards.
    pub reward_std: f64,
    pub loss: LossBreakdown,
}

pub const STEP_LOG_HEADER: [&str; 11] = [
    "step",
    "mean_reward",
    "reward_std",
    "surrogate",
    "kl_ref",
    "kl_perception",
    "entropy_orig",
    "entropy_deg",
    "mean_w",
    "mean_u_norm",
    "total",
];

/// Writes the step log as CSV. Reals use the shortest round-tripping form,
/// so identical runs give byte-identical files.
pub fn write_step_log<W: Write>(out: W, log: &[StepLog]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STEP_LOG_HEADER)?;
    for s in log {
        let l = &s.loss;
        let vals = [
            s.mean_reward,
            s.reward_std,
            l.surrogate,
            l.kl_ref,
            l.kl_perception,
            l.entropy_orig,
            l.entropy_deg,
            l.weight,
            l.u_norm,
            l.total,
        ];
        let mut rec = vec![s.step.to_string()];
        rec.extend(vals.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: PolicyParams,
    pub optimizer: OptimizerState,
    pub log: Vec<StepLog>,
    /// Counts of per-sample normalized uncertainty in ten equal bins on [0, 1].
    pub u_histogram: [usize; 10],
}

/// Extracts features and runs [`train_samples`].
pub fn train(pairs: &[PairedSample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_samples(&prepare_samples(pairs, cfg), cfg)
}

/// Mini-batch training loop.
///
/// The reference policy is the initial (uniform) policy. Every mini-batch
/// snapshots the old policy, evaluates each sample against it (possibly in
/// parallel; sample `i` of step `t` draws from its own seeded stream), sums
/// the per-sample gradients in index order, and takes one AdamW step on
/// their mean.
pub fn train_samples(samples: &[TrainSample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    let mut params = PolicyParams::zeros(NUM_FEATURES, cfg.bins)?;
    let reference = snapshot(&params);
    let mut optimizer = OptimizerState::new(&params, cfg.adamw());
    let mut log = Vec::new();
    let mut u_histogram = [0usize; 10];
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut step = 0usize;

    'epochs: for epoch in 0..cfg.epochs {
        order.shuffle(&mut derived(cfg.seed, &[0, epoch as u64]));
        for batch in order.chunks(cfg.batch_size) {
            if cfg.max_steps > 0 && step >= cfg.max_steps {
                break 'epochs;
            }
            step += 1;
            let old = snapshot(&params);
            let outcomes: Vec<SampleOutcome> = batch
                .par_iter()
                .enumerate()
                .map(|(i, &idx)| {
                    let s = &samples[idx];
                    let mut rng = derived(cfg.seed, &[1, step as u64, i as u64]);
                    total_loss(
                        &params,
                        &old,
                        &reference,
                        &s.feat_orig,
                        &s.feat_deg,
                        s.mos,
                        cfg,
                        &mut rng,
                    )
                })
                .collect::<Result<_>>()?;

            let n = outcomes.len() as f64;
            let mut grad = params.zero_gradient();
            let mut agg = LossBreakdown::default();
            let (mut reward_sum, mut reward_count, mut std_sum) = (0.0, 0usize, 0.0);
            for o in &outcomes {
                grad.add_scaled(&o.gradient, 1.0 / n);
                let l = &o.loss;
                agg.surrogate += l.surrogate / n;
                agg.kl_ref += l.kl_ref / n;
                agg.kl_perception += l.kl_perception / n;
                agg.entropy_orig += l.entropy_orig / n;
                agg.entropy_deg += l.entropy_deg / n;
                agg.total += l.total / n;
                agg.weight += l.weight / n;
                agg.u_norm += l.u_norm / n;
                reward_sum += o.group.rewards.iter().sum::<f64>();
                reward_count += o.group.rewards.len();
                std_sum += o.group.reward_std();
                u_histogram[((l.u_norm * 10.0) as usize).min(9)] += 1;
            }
            if !agg.total.is_finite() {
                return Err(Error::NonFiniteGradient);
            }
            adamw_step(&mut params, &mut optimizer, &grad)?;
            log.push(StepLog {
                step,
                mean_reward: reward_sum / reward_count as f64,
                reward_std: std_sum / n,
                loss: agg,
            });
        }
    }
    Ok(TrainOutcome {
        params,
        optimizer,
        log,
        u_histogram,
    })
}
