//! Helpers for driving the `hawkeye` binary from tests.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hawkeye_core::featex::{index, NUM_FEATURES};
use hawkeye_core::imgcore::manifest::read_records;
use hawkeye_core::imgcore::{pnm, DegradationKind, Image};
use hawkeye_core::policy::PolicyParams;
use hawkeye_core::rng::derived;
use rand::RngCore;

pub fn hawkeye(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hawkeye"))
        .args(args)
        .env("HAWKEYE_THREADS", "2")
        .output()
        .expect("spawn hawkeye")
}

/// Runs the binary and panics with its stderr unless it exits zero.
pub fn ok(args: &[&str]) -> String {
    let out = hawkeye(args);
    assert!(
        out.status.success(),
        "hawkeye {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// `gen-data` then `degrade` with the pixel judge; returns the pairs.csv path.
pub fn paired_set(root: &Path, count: usize, seed: u64) -> PathBuf {
    let data = root.join("data");
    let pairs = root.join("pairs");
    let count = count.to_string();
    let seed = seed.to_string();
    ok(&[
        "gen-data",
        "--out",
        p(&data),
        "--count",
        &count,
        "--seed",
        &seed,
    ]);
    ok(&[
        "degrade",
        "--manifest",
        p(&data.join("manifest.csv")),
        "--out",
        p(&pairs),
        "--seed",
        &seed,
    ]);
    pairs.join("pairs.csv")
}

/// Replays the operator draws of `degrade` for a judge that rejects exactly
/// the kinds in `rejected`: per item, (attempts used, or None if exhausted).
pub fn scripted_trace(
    n_items: usize,
    seed: u64,
    max_attempts: usize,
    rejected: &[&str],
) -> Vec<Option<usize>> {
    let kinds = DegradationKind::defaults();
    (0..n_items)
        .map(|i| {
            let mut rng = derived(seed, &[i as u64]);
            for attempt in 1..=max_attempts {
                let kind = kinds[(rng.next_u64() >> 62) as usize];
                rng.next_u64();
                if !rejected.contains(&kind.name()) {
                    return Some(attempt);
                }
            }
            None
        })
        .collect()
}

/// Summary line value, e.g. `summary_count(stdout, "pairs kept")`.
pub fn summary_count(stdout: &str, label: &str) -> usize {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{label}: ")))
        .unwrap_or_else(|| panic!("no {label:?} line in {stdout:?}"))
        .trim()
        .parse()
        .unwrap()
}

pub fn manifest_parameters(pairs_csv: &Path) -> Vec<(String, String)> {
    read_records(pairs_csv)
        .unwrap()
        .into_iter()
        .map(|r| (r.degradation_kind, r.parameter_value))
        .collect()
}

/// Column `name` of a CSV file as strings.
pub fn column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name} in {}", path.display()));
    r.records()
        .map(|rec| rec.unwrap()[idx].to_string())
        .collect()
}

/// Gray levels 16 b with a score head whose logit for bin c is
/// c L / 16 - c^2 / 2, maximal at c = L / 16.
pub fn oracle_fixture(dir: &Path) -> (PathBuf, PolicyParams) {
    let mut params = PolicyParams::zeros(NUM_FEATURES, 17).unwrap();
    for c in 0..17 {
        *params.score_weight_mut(index::MEAN_LUMA, c) = c as f64 / 16.0;
        *params.score_bias_mut(c) = -((c * c) as f64) / 2.0;
    }
    fs::create_dir_all(dir.join("images")).unwrap();
    let mut rows = String::from("image_path,raw_mos\n");
    // shuffled so a sorted prediction vector is not trivially aligned
    for b in [3usize, 9, 0, 15, 7, 12, 1, 5] {
        let rel = format!("images/g{b}.pgm");
        pnm::write(
            &dir.join(&rel),
            &Image::filled(16, 16, 1, (16 * b) as u8).unwrap(),
        )
        .unwrap();
        rows.push_str(&format!("{rel},{}\n", params.bin_values()[b]));
    }
    fs::write(dir.join("manifest.csv"), rows).unwrap();
    (dir.join("manifest.csv"), params)
}
