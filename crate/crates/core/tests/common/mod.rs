//! Independent oracles shared by the integration tests: random instances,
//! central differences, and brute-force enumeration of the joint outcome space.
#![allow(dead_code)]

use hawkeye_core::featex::{FeatureVector, NUM_FEATURES};
use hawkeye_core::policy::{exact_distribution, FormatToken, PolicyParams};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub fn normal<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> f64 {
    Normal::new(0.0, sd).unwrap().sample(rng)
}

pub fn random_params<R: Rng + ?Sized>(rng: &mut R, n_bins: usize, sd: f64) -> PolicyParams {
    let mut p = PolicyParams::zeros(NUM_FEATURES, n_bins).unwrap();
    for t in p.theta_mut() {
        *t = normal(rng, sd);
    }
    p
}

pub fn perturbed<R: Rng + ?Sized>(p: &PolicyParams, rng: &mut R, sd: f64) -> PolicyParams {
    let mut q = p.clone();
    for t in q.theta_mut() {
        *t += normal(rng, sd);
    }
    q
}

pub fn random_feat<R: Rng + ?Sized>(rng: &mut R) -> FeatureVector {
    let mut v = [0.0; NUM_FEATURES];
    for x in &mut v {
        *x = normal(rng, 1.0);
    }
    FeatureVector(v)
}

/// Central differences of `f` in every coordinate of `theta`.
pub fn central_diff(p: &PolicyParams, h: f64, f: impl Fn(&PolicyParams) -> f64) -> Vec<f64> {
    (0..p.len())
        .map(|i| {
            let mut plus = p.clone();
            plus.theta_mut()[i] += h;
            let mut minus = p.clone();
            minus.theta_mut()[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

/// `|a - b|_2 / max(|a|_2, |b|_2)`, zero when both vanish.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// All `(format, bin)` outcomes in `format * B + bin` order.
pub fn outcomes(n_bins: usize) -> Vec<(FormatToken, usize)> {
    (0..2)
        .flat_map(|f| (0..n_bins).map(move |b| (FormatToken::from_index(f), b)))
        .collect()
}

/// `sum_o p(o) log(p(o)/q(o))` over the enumerated joints.
pub fn enumerated_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).ln())
        .sum()
}

pub fn enumerated_entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|pi| **pi > 0.0)
        .map(|pi| pi * pi.ln())
        .sum::<f64>()
}

pub fn joint(params: &PolicyParams, feat: &FeatureVector) -> Vec<f64> {
    exact_distribution(params, feat).unwrap()
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
