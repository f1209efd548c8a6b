use rand::Rng;

use super::advantage::{score_group, RolloutGroup};
use super::config::{KlMode, TrainConfig};
use crate::featex::FeatureVector;
use crate::policy::{
    grad_logprob, head_log_probs, sample_rollouts, Gradient, HeadLogProbs, PolicyParams, Rollout,
};
use crate::{Error, Result};

/// Per-sample terms of the training objective.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub surrogate: f64,
    pub kl_ref: f64,
    pub kl_perception: f64,
    pub entropy_orig: f64,
    pub entropy_deg: f64,
    /// `surrogate + beta*kl_ref - gamma*kl_perception + eta1*entropy_orig + eta2*entropy_deg`
    pub total: f64,
    pub weight: f64,
    pub u_norm: f64,
}

/// Clipped importance-weighted surrogate over the group's reweighted
/// advantages, negated for minimization, with its gradient. Rollouts whose
/// clipped branch binds contribute no gradient.
pub fn clipped_surrogate(
    params: &PolicyParams,
    old_params: &PolicyParams,
    feat: &FeatureVector,
    group: &RolloutGroup,
    eps_clip: f64,
) -> Result<(f64, Gradient)> {
    let cur = head_log_probs(params, feat)?;
    let old = head_log_probs(old_params, feat)?;
    let k = group.rollouts.len() as f64;
    let mut loss = 0.0;
    let mut grad = params.zero_gradient();
    for (i, (r, &adv)) in group
        .rollouts
        .iter()
        .zip(&group.weighted_advantages)
        .enumerate()
    {
        let ratio = (cur.logprob(r) - old.logprob(r)).exp();
        if !ratio.is_finite() {
            return Err(Error::NonFiniteRatio { index: i });
        }
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - eps_clip, 1.0 + eps_clip) * adv;
        loss -= unclipped.min(clipped) / k;
        if unclipped <= clipped && adv != 0.0 {
            grad.add_scaled(&grad_logprob(params, feat, r)?, -adv * ratio / k);
        }
    }
    Ok((loss, grad))
}

/// KL of two softmax heads, with the gradients w.r.t. both heads' logits.
fn head_kl(p: &[f64], q: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let pp: Vec<f64> = p.iter().map(|l| l.exp()).collect();
    let qq: Vec<f64> = q.iter().map(|l| l.exp()).collect();
    let kl: f64 = pp
        .iter()
        .zip(p.iter().zip(q))
        .map(|(pi, (lp, lq))| pi * (lp - lq))
        .sum();
    let d_p = pp
        .iter()
        .zip(p.iter().zip(q))
        .map(|(pi, (lp, lq))| pi * (lp - lq - kl))
        .collect();
    let d_q = qq.iter().zip(&pp).map(|(qi, pi)| qi - pi).collect();
    (kl, d_p, d_q)
}

/// Cross-entropy `-sum p log q` of two heads with gradients w.r.t. both logits.
fn head_cross_entropy(p: &[f64], q: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let pp: Vec<f64> = p.iter().map(|l| l.exp()).collect();
    let qq: Vec<f64> = q.iter().map(|l| l.exp()).collect();
    let ce: f64 = -pp.iter().zip(q).map(|(pi, lq)| pi * lq).sum::<f64>();
    let d_p = pp.iter().zip(q).map(|(pi, lq)| pi * (-lq - ce)).collect();
    let d_q = qq.iter().zip(&pp).map(|(qi, pi)| qi - pi).collect();
    (ce, d_p, d_q)
}

/// Exact joint KL between two conditions/policies. The joint factorizes, so
/// the KL is the sum over heads. Returns the value and the logit gradients
/// `(d_p_format, d_p_score, d_q_format, d_q_score)`.
fn joint_kl(p: &HeadLogProbs, q: &HeadLogProbs) -> (f64, [Vec<f64>; 4]) {
    let (kf, dpf, dqf) = head_kl(&p.format, &q.format);
    let (ks, dps, dqs) = head_kl(&p.score, &q.score);
    (kf + ks, [dpf, dps, dqf, dqs])
}

fn joint_cross_entropy(p: &HeadLogProbs, q: &HeadLogProbs) -> (f64, [Vec<f64>; 4]) {
    let (cf, dpf, dqf) = head_cross_entropy(&p.format, &q.format);
    let (cs, dps, dqs) = head_cross_entropy(&p.score, &q.score);
    (cf + cs, [dpf, dps, dqf, dqs])
}

/// Exact entropy of the joint policy under `feat`, with gradient.
pub fn exact_entropy(params: &PolicyParams, feat: &FeatureVector) -> Result<(f64, Gradient)> {
    let h = head_log_probs(params, feat)?;
    // H(p) = CE(p, p); both logit slots belong to the same head
    let (v, [dpf, dps, dqf, dqs]) = joint_cross_entropy(&h, &h);
    let mut g = params.zero_gradient();
    params.backprop_logits(feat, &dpf, &dps, 1.0, &mut g);
    params.backprop_logits(feat, &dqf, &dqs, 1.0, &mut g);
    Ok((v, g))
}

/// Exact cross-entropy `-E_{o ~ pi(.|feat_p)} log pi(o|feat_q)`, with
/// gradient through both conditions.
pub fn exact_cross_entropy(
    params: &PolicyParams,
    feat_p: &FeatureVector,
    feat_q: &FeatureVector,
) -> Result<(f64, Gradient)> {
    let p = head_log_probs(params, feat_p)?;
    let q = head_log_probs(params, feat_q)?;
    let (v, [dpf, dps, dqf, dqs]) = joint_cross_entropy(&p, &q);
    let mut g = params.zero_gradient();
    params.backprop_logits(feat_p, &dpf, &dps, 1.0, &mut g);
    params.backprop_logits(feat_q, &dqf, &dqs, 1.0, &mut g);
    Ok((v, g))
}

fn mean_grad_logprob(
    params: &PolicyParams,
    feat: &FeatureVector,
    rollouts: &[Rollout],
    s: f64,
) -> Result<Gradient> {
    let mut g = params.zero_gradient();
    let k = rollouts.len() as f64;
    for r in rollouts {
        g.add_scaled(&grad_logprob(params, feat, r)?, s / k);
    }
    Ok(g)
}

/// `KL(pi_theta || pi_ref)` under one condition. In Monte-Carlo mode the
/// value is the mean log-ratio over `rollouts` and the gradient treats the
/// rollouts as fixed; reference parameters get no gradient in either mode.
pub fn kl_reference(
    params: &PolicyParams,
    ref_params: &PolicyParams,
    feat: &FeatureVector,
    mode: KlMode,
    rollouts: &[Rollout],
) -> Result<(f64, Gradient)> {
    let cur = head_log_probs(params, feat)?;
    let refp = head_log_probs(ref_params, feat)?;
    match mode {
        KlMode::Exact => {
            let (v, [dpf, dps, _, _]) = joint_kl(&cur, &refp);
            let mut g = params.zero_gradient();
            params.backprop_logits(feat, &dpf, &dps, 1.0, &mut g);
            Ok((v, g))
        }
        KlMode::MonteCarlo => {
            let k = rollouts.len() as f64;
            let v = rollouts
                .iter()
                .map(|r| cur.logprob(r) - refp.logprob(r))
                .sum::<f64>()
                / k;
            Ok((v, mean_grad_logprob(params, feat, rollouts, 1.0)?))
        }
    }
}

/// `KL(pi(.|original) || pi(.|degraded))` under the current parameters;
/// gradient flows through both conditions.
pub fn perception_kl(
    params: &PolicyParams,
    feat_orig: &FeatureVector,
    feat_deg: &FeatureVector,
    mode: KlMode,
    rollouts: &[Rollout],
) -> Result<(f64, Gradient)> {
    let p = head_log_probs(params, feat_orig)?;
    let q = head_log_probs(params, feat_deg)?;
    match mode {
        KlMode::Exact => {
            let (v, [dpf, dps, dqf, dqs]) = joint_kl(&p, &q);
            let mut g = params.zero_gradient();
            params.backprop_logits(feat_orig, &dpf, &dps, 1.0, &mut g);
            params.backprop_logits(feat_deg, &dqf, &dqs, 1.0, &mut g);
            Ok((v, g))
        }
        KlMode::MonteCarlo => {
            let k = rollouts.len() as f64;
            let v = rollouts
                .iter()
                .map(|r| p.logprob(r) - q.logprob(r))
                .sum::<f64>()
                / k;
            let mut g = mean_grad_logprob(params, feat_orig, rollouts, 1.0)?;
            g.add_scaled(&mean_grad_logprob(params, feat_deg, rollouts, 1.0)?, -1.0);
            Ok((v, g))
        }
    }
}

/// Rollout entropy estimate `-(1/K) sum log pi(o_k | feat)`.
pub fn entropy_estimate(
    params: &PolicyParams,
    feat: &FeatureVector,
    rollouts: &[Rollout],
) -> Result<f64> {
    let h = head_log_probs(params, feat)?;
    Ok(-rollouts.iter().map(|r| h.logprob(r)).sum::<f64>() / rollouts.len() as f64)
}

pub fn entropy_estimate_with_grad(
    params: &PolicyParams,
    feat: &FeatureVector,
    rollouts: &[Rollout],
) -> Result<(f64, Gradient)> {
    Ok((
        entropy_estimate(params, feat, rollouts)?,
        mean_grad_logprob(params, feat, rollouts, -1.0)?,
    ))
}

/// Loss and gradient for an already-scored group. Deterministic in its
/// inputs, so it is the function finite-difference checks differentiate.
///
/// In exact mode the two entropy terms are the enumerated expectations of the
/// rollout estimator: the entropy under the original condition and the
/// cross-entropy from original to degraded.
pub fn objective(
    params: &PolicyParams,
    old_params: &PolicyParams,
    ref_params: &PolicyParams,
    feat_orig: &FeatureVector,
    feat_deg: &FeatureVector,
    group: &RolloutGroup,
    cfg: &TrainConfig,
) -> Result<(LossBreakdown, Gradient)> {
    let (surrogate, mut grad) =
        clipped_surrogate(params, old_params, feat_orig, group, cfg.eps_clip)?;
    let rollouts = &group.rollouts;
    let (kl_ref, g_ref) = kl_reference(params, ref_params, feat_orig, cfg.kl_mode, rollouts)?;
    let (kl_perception, g_perc) =
        perception_kl(params, feat_orig, feat_deg, cfg.kl_mode, rollouts)?;
    let ((entropy_orig, g_ho), (entropy_deg, g_hd)) = match cfg.kl_mode {
        KlMode::Exact => (
            exact_entropy(params, feat_orig)?,
            exact_cross_entropy(params, feat_orig, feat_deg)?,
        ),
        KlMode::MonteCarlo => (
            entropy_estimate_with_grad(params, feat_orig, rollouts)?,
            entropy_estimate_with_grad(params, feat_deg, rollouts)?,
        ),
    };
    grad.add_scaled(&g_ref, cfg.beta);
    grad.add_scaled(&g_perc, -cfg.gamma);
    grad.add_scaled(&g_ho, cfg.eta1);
    grad.add_scaled(&g_hd, cfg.eta2);
    let total = surrogate + cfg.beta * kl_ref - cfg.gamma * kl_perception
        + cfg.eta1 * entropy_orig
        + cfg.eta2 * entropy_deg;
    let breakdown = LossBreakdown {
        surrogate,
        kl_ref,
        kl_perception,
        entropy_orig,
        entropy_deg,
        total,
        weight: group.weight,
        u_norm: group.u_norm,
    };
    Ok((breakdown, grad))
}

/// Result of one sample's pass through the objective.
#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub loss: LossBreakdown,
    pub gradient: Gradient,
    pub group: RolloutGroup,
}

/// One sample of the training loop: sample K rollouts from the old policy on
/// the original image, score them, and evaluate the full objective.
#[allow(clippy::too_many_arguments)]
pub fn total_loss<R: Rng + ?Sized>(
    params: &PolicyParams,
    old_params: &PolicyParams,
    ref_params: &PolicyParams,
    feat_orig: &FeatureVector,
    feat_deg: &FeatureVector,
    truth: f64,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<SampleOutcome> {
    let rollouts = sample_rollouts(old_params, feat_orig, cfg.k, rng)?;
    let group = score_group(rollouts, truth, cfg);
    let (loss, gradient) = objective(
        params, old_params, ref_params, feat_orig, feat_deg, &group, cfg,
    )?;
    Ok(SampleOutcome {
        loss,
        gradient,
        group,
    })
}
