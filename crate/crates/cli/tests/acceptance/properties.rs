//! Criteria 2 to 5: gradients, estimators, invariants and metrics on
//! randomized instances.

use hawkeye_core::featex::FeatureVector;
use hawkeye_core::grpo::{
    clipped_surrogate, entropy_estimate, estimate_uncertainty, group_advantages, kl_reference,
    objective, perception_kl, reweight_advantages, score_group, KlMode, RolloutGroup, TrainConfig,
    WeightingMode,
};
use hawkeye_core::metrics::{plcc, srcc};
use hawkeye_core::policy::{grad_logprob, logprob, sample_rollouts, PolicyParams};
use hawkeye_core::rng::{seeded, Rng as ChaCha};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::common::*;
use crate::Verdict;

const H: f64 = 1e-5;
const FD_TOL: f64 = 1e-5;
const CLIP_MARGIN: f64 = 1e-3;

struct Instance {
    params: PolicyParams,
    old: PolicyParams,
    reference: PolicyParams,
    feat: FeatureVector,
    feat_deg: FeatureVector,
    group: RolloutGroup,
}

fn instance(rng: &mut ChaCha, cfg: &TrainConfig) -> Instance {
    let n_bins = rng.random_range(2..=9);
    let old = random_params(rng, n_bins, 0.5);
    let params = perturbed(&old, rng, 0.2);
    let reference = perturbed(&old, rng, 0.5);
    let feat = random_feat(rng);
    let mut feat_deg = feat;
    for v in &mut feat_deg.0 {
        *v += normal(rng, 0.5);
    }
    let rollouts = sample_rollouts(&old, &feat, cfg.k, rng).unwrap();
    let truth = rng.random_range(1.0..=5.0);
    let group = score_group(rollouts, truth, cfg);
    Instance {
        params,
        old,
        reference,
        feat,
        feat_deg,
        group,
    }
}

fn off_clip(inst: &Instance, eps: f64) -> bool {
    inst.group.rollouts.iter().all(|r| {
        let rho = (logprob(&inst.params, &inst.feat, r).unwrap()
            - logprob(&inst.old, &inst.feat, r).unwrap())
        .exp();
        (rho - (1.0 - eps)).abs() > CLIP_MARGIN && (rho - (1.0 + eps)).abs() > CLIP_MARGIN
    })
}

/// Next instance whose ratios all keep `CLIP_MARGIN` away from the clip edges.
fn off_clip_instance(rng: &mut ChaCha, cfg: &TrainConfig) -> Instance {
    loop {
        let inst = instance(rng, cfg);
        if off_clip(&inst, cfg.eps_clip) {
            return inst;
        }
    }
}

/// `n` surrogate checks; returns (all within tolerance, worst relative error).
pub fn surrogate_fd(mut rng: ChaCha, n: usize) -> (bool, f64) {
    let cfg = TrainConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let inst = off_clip_instance(&mut rng, &cfg);
        let f = |p: &PolicyParams| {
            clipped_surrogate(p, &inst.old, &inst.feat, &inst.group, cfg.eps_clip)
                .unwrap()
                .0
        };
        let (_, g) = clipped_surrogate(
            &inst.params,
            &inst.old,
            &inst.feat,
            &inst.group,
            cfg.eps_clip,
        )
        .unwrap();
        worst = worst.max(rel_err(&g.0, &central_diff(&inst.params, H, f)));
    }
    (worst <= FD_TOL, worst)
}

/// `n` checks of the full objective with every coefficient raised so each
/// term shows up in the gradient.
pub fn objective_fd(mut rng: ChaCha, n: usize, mode: KlMode) -> (bool, f64) {
    let cfg = TrainConfig {
        kl_mode: mode,
        beta: 0.3,
        gamma: 0.2,
        eta1: 0.1,
        eta2: 0.15,
        ..TrainConfig::default()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let inst = off_clip_instance(&mut rng, &cfg);
        let eval = |p: &PolicyParams| {
            objective(
                p,
                &inst.old,
                &inst.reference,
                &inst.feat,
                &inst.feat_deg,
                &inst.group,
                &cfg,
            )
            .unwrap()
        };
        let (_, g) = eval(&inst.params);
        let numeric = central_diff(&inst.params, H, |p| eval(p).0.total);
        worst = worst.max(rel_err(&g.0, &numeric));
    }
    (worst <= FD_TOL, worst)
}

pub fn gradient_fidelity() -> Verdict {
    let mut rng = seeded(1001);
    let cfg = TrainConfig::default();
    let mut lp_worst: f64 = 0.0;
    for _ in 0..100 {
        let inst = instance(&mut rng, &cfg);
        let r = &inst.group.rollouts[rng.random_range(0..cfg.k)];
        let g = grad_logprob(&inst.params, &inst.feat, r).unwrap();
        let numeric = central_diff(&inst.params, H, |p| logprob(p, &inst.feat, r).unwrap());
        lp_worst = lp_worst.max(rel_err(&g.0, &numeric));
    }
    let (_, sur_worst) = surrogate_fd(seeded(1002), 100);
    let (_, ex_worst) = objective_fd(seeded(1003), 100, KlMode::Exact);
    let (_, mc_worst) = objective_fd(seeded(1004), 100, KlMode::MonteCarlo);
    let worst = lp_worst.max(sur_worst).max(ex_worst).max(mc_worst);
    Verdict::new(
        worst <= FD_TOL,
        format!(
            "worst relative error: logprob {lp_worst:.1e}, surrogate {sur_worst:.1e}, \
             total exact {ex_worst:.1e}, total monte-carlo {mc_worst:.1e} (limit 1e-5)"
        ),
    )
}

pub fn estimators() -> Verdict {
    let mut rng = seeded(2001);
    let n = 100_000;
    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let b = rng.random_range(2..=9);
        let params = random_params(&mut rng, b, 0.8);
        let reference = perturbed(&params, &mut rng, 0.6);
        let (orig, deg) = (random_feat(&mut rng), random_feat(&mut rng));
        let ro = sample_rollouts(&params, &orig, n, &mut rng).unwrap();
        let lp = |p: &PolicyParams, f: &FeatureVector| -> Vec<f64> {
            ro.iter().map(|r| logprob(p, f, r).unwrap()).collect()
        };
        let (cur, refl, degl) = (lp(&params, &orig), lp(&reference, &orig), lp(&params, &deg));
        let diff =
            |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
        let neg: Vec<f64> = cur.iter().map(|v| -v).collect();
        let p_orig = joint(&params, &orig);
        let checks = [
            (
                "kl_reference",
                kl_reference(&params, &reference, &orig, KlMode::MonteCarlo, &ro)
                    .unwrap()
                    .0,
                mean_se(&diff(&cur, &refl)).1,
                enumerated_kl(&p_orig, &joint(&reference, &orig)),
            ),
            (
                "perception_kl",
                perception_kl(&params, &orig, &deg, KlMode::MonteCarlo, &ro)
                    .unwrap()
                    .0,
                mean_se(&diff(&cur, &degl)).1,
                enumerated_kl(&p_orig, &joint(&params, &deg)),
            ),
            (
                "entropy_estimate",
                entropy_estimate(&params, &orig, &ro).unwrap(),
                mean_se(&neg).1,
                enumerated_entropy(&p_orig),
            ),
        ];
        for (name, est, se, exact) in checks {
            let z = (est - exact).abs() / se;
            worst = worst.max(z);
            if z > 3.0 {
                fails.push(format!("{name}#{i} z={z:.2}"));
            }
        }
    }
    let mut detail = format!("30 estimates at 1e5 samples, worst |z| = {worst:.2} (limit 3)");
    if !fails.is_empty() {
        detail.push_str(&format!("; outside: {}", fails.join(", ")));
    }
    Verdict::new(fails.is_empty(), detail)
}

pub fn invariants() -> Verdict {
    let mut rng = seeded(3001);
    let mut problems = Vec::new();
    let (mut mean_worst, mut std_worst, mut lin_worst): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut degenerate = 0;
    for g in 0..1000 {
        let k = rng.random_range(2..=16);
        let rewards: Vec<f64> = if g % 7 == 0 {
            degenerate += 1;
            vec![rng.random_range(0.0..2.0); k]
        } else {
            (0..k).map(|_| rng.random_range(0.0..2.0)).collect()
        };
        let a = group_advantages(&rewards, 1e-8);
        if g % 7 == 0 {
            if a.iter().any(|v| *v != 0.0) {
                problems.push(format!("degenerate group {g} not all zero"));
            }
        } else {
            let n = k as f64;
            let m = a.iter().sum::<f64>() / n;
            let sd = (a.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            mean_worst = mean_worst.max(m.abs());
            std_worst = std_worst.max((sd - 1.0).abs());
        }

        // adversarial scores far outside [1, 5], including huge magnitudes
        let scores: Vec<f64> = (0..k)
            .map(|_| match rng.random_range(0..4) {
                0 => rng.random_range(-1e3..1e3),
                1 => rng.random_range(1.0..=5.0),
                2 => {
                    if rng.random() {
                        1e300
                    } else {
                        -1e300
                    }
                }
                _ => rng.random_range(-10.0..10.0),
            })
            .collect();
        let (_, un) = estimate_uncertainty(&scores, 1.0, 5.0, 1e-6);
        let (_, un_in) = estimate_uncertainty(&scores[..k.min(1)], 1.0, 5.0, 1e-6);
        if !(0.0..=1.0).contains(&un) || !(0.0..=1.0).contains(&un_in) {
            problems.push(format!("group {g}: u_norm {un} / {un_in}"));
        }
        let tau = rng.random_range(1e-3..3.0);
        for mode in [WeightingMode::Uncertainty, WeightingMode::Reverse] {
            let w = mode.weight(un, tau);
            if !((-tau).exp() <= w && w <= 1.0) {
                problems.push(format!("group {g}: w {w} for tau {tau}"));
            }
        }
    }
    // gradient linearity in w, on 1,000 scored groups
    let cfg = TrainConfig::default();
    for g in 0..1000 {
        let inst = instance(&mut rng, &cfg);
        let w = (-rng.random_range(0.0..1.0) * cfg.tau).exp();
        let mut unit = inst.group.clone();
        unit.weighted_advantages = inst.group.advantages.clone();
        let mut scaled = inst.group.clone();
        scaled.weighted_advantages = reweight_advantages(&inst.group.advantages, w);
        let (_, g1) =
            clipped_surrogate(&inst.params, &inst.old, &inst.feat, &unit, cfg.eps_clip).unwrap();
        let (_, gw) =
            clipped_surrogate(&inst.params, &inst.old, &inst.feat, &scaled, cfg.eps_clip).unwrap();
        let want: Vec<f64> = g1.0.iter().map(|v| w * v).collect();
        let e = rel_err(&gw.0, &want);
        lin_worst = lin_worst.max(e);
        if e > 1e-12 {
            problems.push(format!("linearity group {g}: {e:.1e}"));
        }
    }
    if mean_worst > 1e-9 || std_worst > 1e-6 {
        problems.push("advantage normalization out of tolerance".into());
    }
    let mut detail = format!(
        "advantage |mean| <= {mean_worst:.1e}, |std - 1| <= {std_worst:.1e}, \
         {degenerate} degenerate groups zeroed, u_norm and w in range over 1000 groups, \
         linearity error <= {lin_worst:.1e} over 1000 groups"
    );
    if !problems.is_empty() {
        detail.push_str(&format!(
            "; {} problems, first: {}",
            problems.len(),
            problems[0]
        ));
    }
    Verdict::new(problems.is_empty(), detail)
}

/// `n` tie-free vectors against `1 - 6 sum d^2 / (N (N^2 - 1))`.
pub fn srcc_d2(mut rng: ChaCha, n: usize) -> (bool, f64) {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let len = rng.random_range(3..60);
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut rng);
        // distinct values in a random order; ranks are perm + 1
        let x: Vec<f64> = perm.iter().map(|&r| r as f64 * 1.7 + 0.3).collect();
        let mut perm2: Vec<usize> = (0..len).collect();
        perm2.shuffle(&mut rng);
        let y: Vec<f64> = perm2.iter().map(|&r| (r as f64).exp2().ln_1p()).collect();
        let d2: f64 = perm
            .iter()
            .zip(&perm2)
            .map(|(a, b)| (*a as f64 - *b as f64).powi(2))
            .sum();
        let nf = len as f64;
        let formula = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
        worst = worst.max((srcc(&x, &y).unwrap() - formula).abs());
    }
    (worst <= 1e-12, worst)
}

fn brute_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|a| {
            let less = x.iter().filter(|b| *b < a).count() as f64;
            let eq = x.iter().filter(|b| *b == a).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect()
}

/// Textbook two-pass Pearson over all pairs.
fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..x.len() {
        num += (x[i] - mx) * (y[i] - my);
        dx += (x[i] - mx).powi(2);
        dy += (y[i] - my).powi(2);
    }
    num / (dx.sqrt() * dy.sqrt())
}

pub fn metrics() -> Verdict {
    let (d2_ok, d2_worst) = srcc_d2(seeded(4001), 1000);
    let mut rng = seeded(4002);
    let (mut p_worst, mut s_worst): (f64, f64) = (0.0, 0.0);
    let (mut ties, mut checked) = (0, 0);
    while checked < 1000 {
        let len = rng.random_range(3..50);
        // coarse grid values produce frequent ties
        let levels = rng.random_range(2..10);
        let x: Vec<f64> = (0..len)
            .map(|_| rng.random_range(0..levels) as f64 * 0.5)
            .collect();
        let y: Vec<f64> = (0..len)
            .map(|_| rng.random_range(-3.0..3.0f64).round())
            .collect();
        let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
        if constant(&x) || constant(&y) {
            continue;
        }
        checked += 1;
        if x.iter().enumerate().any(|(i, a)| x[..i].contains(a)) {
            ties += 1;
        }
        p_worst = p_worst.max((plcc(&x, &y).unwrap() - brute_pearson(&x, &y)).abs());
        let oracle = brute_pearson(&brute_ranks(&x), &brute_ranks(&y));
        s_worst = s_worst.max((srcc(&x, &y).unwrap() - oracle).abs());
    }
    let ok = d2_ok && p_worst <= 1e-12 && s_worst <= 1e-12;
    Verdict::new(
        ok,
        format!(
            "d^2 formula gap {d2_worst:.1e} on 1000 tie-free vectors; \
             brute-force gap plcc {p_worst:.1e}, srcc {s_worst:.1e} on vectors with ties \
             ({ties} tied) (limit 1e-12)"
        ),
    )
}
