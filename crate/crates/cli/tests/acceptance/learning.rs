//! Criteria 6 to 9: training runs on the default synthetic set, seeds 0-4.

use std::fs;

use hawkeye_core::dataset::{build_pairs, generate_set, LabeledImage, SyntheticRanges};
use hawkeye_core::featex::{extract, Standardization};
use hawkeye_core::grpo::{
    train, write_step_log, StepLog, TrainConfig, TrainOutcome, WeightingMode,
};
use hawkeye_core::imgcore::{PairedSample, PixelDifferenceJudge};
use hawkeye_core::metrics::srcc;
use hawkeye_core::policy::{greedy, Checkpoint, PolicyParams};
use tempfile::tempdir;

use crate::support::*;
use crate::Verdict;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const TRAIN_SIZE: usize = 200;
const HELD_OUT_SIZE: usize = 200;
const WINDOW: usize = 50;

/// Final-window (reward, std) for the uncertainty, reverse and vanilla arms.
type ArmRow = ((f64, f64), (f64, f64), (f64, f64));

fn pairs_of(items: &[LabeledImage], seed: u64) -> Vec<PairedSample> {
    build_pairs(items, &PixelDifferenceJudge::default(), seed, 16)
        .into_iter()
        .map(|p| p.unwrap())
        .collect()
}

/// Training pairs for `seed`: images from stream 100 + seed, pairing from `seed`.
pub fn train_pairs(seed: u64, n: usize) -> Vec<PairedSample> {
    let items = generate_set(n, &SyntheticRanges::default(), 100 + seed).unwrap();
    pairs_of(&items, seed)
}

fn held_out(seed: u64) -> Vec<LabeledImage> {
    generate_set(HELD_OUT_SIZE, &SyntheticRanges::default(), 9000 + seed).unwrap()
}

fn held_out_pairs(seed: u64) -> Vec<PairedSample> {
    pairs_of(&held_out(seed), 7000 + seed)
}

fn predict(
    params: &PolicyParams,
    std: &Standardization,
    img: &hawkeye_core::imgcore::Image,
) -> f64 {
    greedy(params, &extract(img, std)).unwrap().2
}

fn run(seed: u64, cfg: TrainConfig) -> TrainOutcome {
    train(&train_pairs(seed, TRAIN_SIZE), &cfg).unwrap()
}

fn final_window(log: &[StepLog]) -> (f64, f64) {
    let tail = &log[log.len() - WINDOW..];
    let n = tail.len() as f64;
    (
        tail.iter().map(|s| s.mean_reward).sum::<f64>() / n,
        tail.iter().map(|s| s.reward_std).sum::<f64>() / n,
    )
}

fn list(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.3}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn end_to_end() -> Verdict {
    let scores: Vec<f64> = SEEDS
        .iter()
        .map(|&seed| {
            let cfg = TrainConfig::desk_scale(seed);
            let out = run(seed, cfg.clone());
            let std = cfg.standardization();
            let items = held_out(seed);
            let pred: Vec<f64> = items
                .iter()
                .map(|i| predict(&out.params, &std, &i.image))
                .collect();
            let mos: Vec<f64> = items.iter().map(|i| i.mos).collect();
            srcc(&pred, &mos).unwrap_or(f64::NAN)
        })
        .collect();
    let hits = scores.iter().filter(|s| **s >= 0.80).count();
    Verdict::new(
        hits >= 4,
        format!(
            "held-out SRCC by seed [{}]; {hits}/5 reach 0.80 (need 4)",
            list(&scores)
        ),
    )
}

pub fn weighting_trend() -> Verdict {
    let mut rows = Vec::new();
    for &seed in &SEEDS {
        let arm = |w: WeightingMode| {
            final_window(
                &run(
                    seed,
                    TrainConfig {
                        weighting: w,
                        ..TrainConfig::desk_scale(seed)
                    },
                )
                .log,
            )
        };
        rows.push((
            arm(WeightingMode::Uncertainty),
            arm(WeightingMode::Reverse),
            arm(WeightingMode::Vanilla),
        ));
    }
    let reward_vs_rev = rows.iter().filter(|(u, r, _)| u.0 >= r.0).count();
    let std_vs_rev = rows.iter().filter(|(u, r, _)| u.1 <= r.1).count();
    let reward_vs_van = rows.iter().filter(|(u, _, v)| u.0 >= v.0).count();
    let pick = |f: fn(&ArmRow) -> f64| list(&rows.iter().map(f).collect::<Vec<_>>());
    Verdict::new(
        reward_vs_rev >= 4 && std_vs_rev >= 4 && reward_vs_van >= 3,
        format!(
            "reward >= reverse in {reward_vs_rev}/5 (need 4), std <= reverse in {std_vs_rev}/5 \
             (need 4), reward >= vanilla in {reward_vs_van}/5 (need 3); final-{WINDOW} reward \
             uncertainty [{}] reverse [{}] vanilla [{}]; std uncertainty [{}] reverse [{}]",
            pick(|r| r.0 .0),
            pick(|r| r.1 .0),
            pick(|r| r.2 .0),
            pick(|r| r.0 .1),
            pick(|r| r.1 .1),
        ),
    )
}

pub fn perception_gap() -> Verdict {
    let mut with = Vec::new();
    let mut without = Vec::new();
    for &seed in &SEEDS {
        let test = held_out_pairs(seed);
        let gap = |gamma: f64| {
            let cfg = TrainConfig {
                gamma,
                ..TrainConfig::desk_scale(seed)
            };
            let std = cfg.standardization();
            let params = run(seed, cfg).params;
            test.iter()
                .map(|p| {
                    (predict(&params, &std, &p.original) - predict(&params, &std, &p.degraded))
                        .abs()
                })
                .sum::<f64>()
                / test.len() as f64
        };
        with.push(gap(5e-4));
        without.push(gap(0.0));
    }
    let larger = with.iter().zip(&without).filter(|(a, b)| a > b).count();
    Verdict::new(
        larger >= 4,
        format!(
            "mean |greedy(orig) - greedy(deg)|: gamma 5e-4 [{}] vs gamma 0 [{}]; \
             strictly larger in {larger}/5 (need 4)",
            list(&with),
            list(&without)
        ),
    )
}

pub fn determinism() -> Verdict {
    let mut problems = Vec::new();

    // library: two identical runs, byte-compared
    let data = train_pairs(0, TRAIN_SIZE);
    let cfg = TrainConfig::desk_scale(3);
    let bytes = |o: &TrainOutcome| {
        let mut log = Vec::new();
        write_step_log(&mut log, &o.log).unwrap();
        let ck = Checkpoint::new(o.params.clone(), Some(o.optimizer.clone()))
            .to_json()
            .unwrap();
        (log, ck)
    };
    if bytes(&train(&data, &cfg).unwrap()) != bytes(&train(&data, &cfg).unwrap()) {
        problems.push("library runs differ".to_string());
    }

    // binary: full pipeline twice under different worker counts
    let dir = tempdir().unwrap();
    let pipeline = |name: &str, threads: &str| {
        let root = dir.path().join(name);
        let (data, pairs, run) = (root.join("data"), root.join("pairs"), root.join("run"));
        let go = |args: &[&str]| {
            let out = std::process::Command::new(env!("CARGO_BIN_EXE_hawkeye"))
                .args(args)
                .env("HAWKEYE_THREADS", threads)
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        go(&[
            "gen-data",
            "--out",
            p(&data),
            "--count",
            "120",
            "--seed",
            "21",
        ]);
        go(&[
            "degrade",
            "--manifest",
            p(&data.join("manifest.csv")),
            "--out",
            p(&pairs),
            "--seed",
            "21",
        ]);
        go(&[
            "train",
            "--pairs",
            p(&pairs.join("pairs.csv")),
            "--out",
            p(&run),
            "--desk",
            "--max-steps",
            "40",
            "--seed",
            "21",
        ]);
        root
    };
    let (a, b) = (pipeline("a", "1"), pipeline("b", "4"));
    for sub in ["data", "pairs", "run"] {
        if snapshot_dir(&a.join(sub)) != snapshot_dir(&b.join(sub)) {
            problems.push(format!("{sub} differs between 1 and 4 workers"));
        }
    }

    // paired-set manifest parameters
    let params = manifest_parameters(&a.join("pairs/pairs.csv"));
    let mut shown = Vec::new();
    for (kind, want) in [
        ("noise", 45.0),
        ("blur", 2.0),
        ("jpeg", 5.0),
        ("darken", 0.6),
    ] {
        let vals: Vec<&str> = params
            .iter()
            .filter(|(k, _)| k == kind)
            .map(|(_, v)| v.as_str())
            .collect();
        match vals.first() {
            Some(v) if vals.iter().all(|x| x.parse::<f64>() == Ok(want) && x == v) => {
                shown.push(format!("{kind}={v}"))
            }
            _ => problems.push(format!("{kind} parameters {vals:?}")),
        }
    }
    let steps = fs::read_to_string(a.join("run/steps.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    let mut detail = format!(
        "identical library runs and 1-vs-4-worker pipelines byte-equal ({steps} logged steps); \
         manifest parameters {}",
        shown.join(" ")
    );
    if !problems.is_empty() {
        detail.push_str(&format!("; problems: {}", problems.join(", ")));
    }
    Verdict::new(problems.is_empty(), detail)
}
