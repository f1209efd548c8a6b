use std::ops::Deref;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::featex::FeatureVector;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormatToken {
    Ok,
    Bad,
}

impl FormatToken {
    pub fn index(self) -> usize {
        match self {
            FormatToken::Ok => 0,
            FormatToken::Bad => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            FormatToken::Ok
        } else {
            FormatToken::Bad
        }
    }
}

/// One sampled output with its log-probability under the sampling policy.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub format_token: FormatToken,
    pub score_token: usize,
    pub logprob_orig: f64,
    pub parsed_score: Option<f64>,
}

impl Rollout {
    /// Builds a rollout, parsing the score when the format is valid.
    pub fn new(
        params: &PolicyParams,
        format_token: FormatToken,
        score_token: usize,
        logprob_orig: f64,
    ) -> Self {
        let parsed_score =
            (format_token == FormatToken::Ok).then(|| params.bin_values[score_token]);
        Self {
            format_token,
            score_token,
            logprob_orig,
            parsed_score,
        }
    }

    /// Index into the joint outcome space of [`exact_distribution`].
    pub fn outcome(&self, n_bins: usize) -> usize {
        self.format_token.index() * n_bins + self.score_token
    }
}

/// Trainable weights stored flat:
/// `[format_weights (F x 2), format_bias (2), score_weights (F x B), score_bias (B)]`,
/// weight matrices row-major by feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    n_features: usize,
    n_bins: usize,
    theta: Vec<f64>,
    bin_values: Vec<f64>,
}

/// Flat gradient with the layout of [`PolicyParams`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gradient(pub Vec<f64>);

impl Gradient {
    pub fn zeros(len: usize) -> Self {
        Gradient(vec![0.0; len])
    }

    pub fn add_scaled(&mut self, other: &Gradient, s: f64) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.0.iter_mut().for_each(|v| *v *= s);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl PolicyParams {
    /// All-zero weights: the uniform policy. Bin values evenly span [1, 5].
    pub fn zeros(n_features: usize, n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 score bins, got {n_bins}"
            )));
        }
        let bin_values = (0..n_bins)
            .map(|i| 1.0 + 4.0 * i as f64 / (n_bins - 1) as f64)
            .collect();
        Ok(Self {
            n_features,
            n_bins,
            theta: vec![0.0; Self::len_for(n_features, n_bins)],
            bin_values,
        })
    }

    pub fn from_parts(n_features: usize, n_bins: usize, theta: Vec<f64>) -> Result<Self> {
        let mut p = Self::zeros(n_features, n_bins)?;
        if theta.len() != p.theta.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} parameters, got {}",
                p.theta.len(),
                theta.len()
            )));
        }
        p.theta = theta;
        Ok(p)
    }

    fn len_for(f: usize, b: usize) -> usize {
        f * 2 + 2 + f * b + b
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn bin_values(&self) -> &[f64] {
        &self.bin_values
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn zero_gradient(&self) -> Gradient {
        Gradient::zeros(self.theta.len())
    }

    fn format_bias_offset(&self) -> usize {
        self.n_features * 2
    }

    fn score_weight_offset(&self) -> usize {
        self.n_features * 2 + 2
    }

    fn score_bias_offset(&self) -> usize {
        self.score_weight_offset() + self.n_features * self.n_bins
    }

    pub fn format_weight_mut(&mut self, feature: usize, token: usize) -> &mut f64 {
        &mut self.theta[feature * 2 + token]
    }

    pub fn format_bias_mut(&mut self, token: usize) -> &mut f64 {
        let o = self.format_bias_offset();
        &mut self.theta[o + token]
    }

    pub fn score_weight_mut(&mut self, feature: usize, bin: usize) -> &mut f64 {
        let o = self.score_weight_offset();
        &mut self.theta[o + feature * self.n_bins + bin]
    }

    pub fn score_bias_mut(&mut self, bin: usize) -> &mut f64 {
        let o = self.score_bias_offset();
        &mut self.theta[o + bin]
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|v| v.is_finite())
    }

    fn logits(&self, feat: &FeatureVector) -> (Vec<f64>, Vec<f64>) {
        let f = feat.values();
        debug_assert_eq!(f.len(), self.n_features);
        let fb = self.format_bias_offset();
        let sw = self.score_weight_offset();
        let sb = self.score_bias_offset();
        let fmt = (0..2)
            .map(|j| {
                self.theta[fb + j]
                    + (0..self.n_features)
                        .map(|i| f[i] * self.theta[i * 2 + j])
                        .sum::<f64>()
            })
            .collect();
        let score = (0..self.n_bins)
            .map(|j| {
                self.theta[sb + j]
                    + (0..self.n_features)
                        .map(|i| f[i] * self.theta[sw + i * self.n_bins + j])
                        .sum::<f64>()
            })
            .collect();
        (fmt, score)
    }

    /// Accumulates `s * dL/dz` for both heads' logits into `grad`, with the
    /// features the logits were computed from.
    pub(crate) fn backprop_logits(
        &self,
        feat: &FeatureVector,
        d_fmt: &[f64],
        d_score: &[f64],
        s: f64,
        grad: &mut Gradient,
    ) {
        let f = feat.values();
        let g = &mut grad.0;
        let fb = self.format_bias_offset();
        let sw = self.score_weight_offset();
        let sb = self.score_bias_offset();
        for j in 0..2 {
            let d = s * d_fmt[j];
            g[fb + j] += d;
            for i in 0..self.n_features {
                g[i * 2 + j] += d * f[i];
            }
        }
        for j in 0..self.n_bins {
            let d = s * d_score[j];
            g[sb + j] += d;
            for i in 0..self.n_features {
                g[sw + i * self.n_bins + j] += d * f[i];
            }
        }
    }
}

fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

/// Log-probabilities of both heads under one visual condition.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadLogProbs {
    pub format: Vec<f64>,
    pub score: Vec<f64>,
}

impl HeadLogProbs {
    pub fn logprob(&self, r: &Rollout) -> f64 {
        self.format[r.format_token.index()] + self.score[r.score_token]
    }

    pub fn format_probs(&self) -> Vec<f64> {
        self.format.iter().map(|l| l.exp()).collect()
    }

    pub fn score_probs(&self) -> Vec<f64> {
        self.score.iter().map(|l| l.exp()).collect()
    }
}

pub fn head_log_probs(params: &PolicyParams, feat: &FeatureVector) -> Result<HeadLogProbs> {
    let (fz, sz) = params.logits(feat);
    if !fz.iter().chain(&sz).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteLogits);
    }
    Ok(HeadLogProbs {
        format: log_softmax(&fz),
        score: log_softmax(&sz),
    })
}

/// Softmax distributions of the format head and the score head.
pub fn token_distributions(
    params: &PolicyParams,
    feat: &FeatureVector,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = head_log_probs(params, feat)?;
    Ok((h.format_probs(), h.score_probs()))
}

/// Inverse-CDF draw from a categorical distribution.
fn draw<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding slack above the last cumulative sum
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

/// Draws `k` i.i.d. rollouts. Each rollout consumes two uniforms from `rng`.
pub fn sample_rollouts<R: Rng + ?Sized>(
    params: &PolicyParams,
    feat: &FeatureVector,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Rollout>> {
    let h = head_log_probs(params, feat)?;
    let (fp, sp) = (h.format_probs(), h.score_probs());
    Ok((0..k)
        .map(|_| {
            let fmt = FormatToken::from_index(draw(&fp, rng));
            let bin = draw(&sp, rng);
            Rollout::new(params, fmt, bin, h.format[fmt.index()] + h.score[bin])
        })
        .collect())
}

/// Joint log-probability of a rollout under `feat`.
pub fn logprob(params: &PolicyParams, feat: &FeatureVector, rollout: &Rollout) -> Result<f64> {
    Ok(head_log_probs(params, feat)?.logprob(rollout))
}

/// Probabilities of all `2 * B` outcomes, indexed `format * B + bin`.
pub fn exact_distribution(params: &PolicyParams, feat: &FeatureVector) -> Result<Vec<f64>> {
    let (fp, sp) = token_distributions(params, feat)?;
    Ok(fp
        .iter()
        .flat_map(|f| sp.iter().map(move |s| f * s))
        .collect())
}

/// Analytic gradient of `log pi(rollout | feat)`:
/// `(onehot(token) - probs)` per head, times the features for the weights.
pub fn grad_logprob(
    params: &PolicyParams,
    feat: &FeatureVector,
    rollout: &Rollout,
) -> Result<Gradient> {
    let (fp, sp) = token_distributions(params, feat)?;
    let mut d_fmt: Vec<f64> = fp.iter().map(|p| -p).collect();
    d_fmt[rollout.format_token.index()] += 1.0;
    let mut d_score: Vec<f64> = sp.iter().map(|p| -p).collect();
    d_score[rollout.score_token] += 1.0;
    let mut g = params.zero_gradient();
    params.backprop_logits(feat, &d_fmt, &d_score, 1.0, &mut g);
    Ok(g)
}

/// Modal tokens (argmax per head, lowest index on ties) and the decoded score.
pub fn greedy(params: &PolicyParams, feat: &FeatureVector) -> Result<(FormatToken, usize, f64)> {
    let (fz, sz) = params.logits(feat);
    if !fz.iter().chain(&sz).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteLogits);
    }
    let argmax = |z: &[f64]| (0..z.len()).fold(0, |best, i| if z[i] > z[best] { i } else { best });
    let bin = argmax(&sz);
    Ok((
        FormatToken::from_index(argmax(&fz)),
        bin,
        params.bin_values()[bin],
    ))
}

/// Immutable, cheaply shareable parameter copy (old and reference policies).
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot(Arc<PolicyParams>);

impl Deref for Snapshot {
    type Target = PolicyParams;
    fn deref(&self) -> &PolicyParams {
        &self.0
    }
}

pub fn snapshot(params: &PolicyParams) -> Snapshot {
    Snapshot(Arc::new(params.clone()))
}
