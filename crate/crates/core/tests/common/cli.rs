use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub fn mrr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrr")).args(args).output().expect("run mrr")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

pub fn simulate_to(path: &Path, profile: &str, secs: &str, seed: &str) -> Output {
    mrr(&["simulate", "--patient", profile, "--duration", secs, "--seed", seed, "--out", path.to_str().unwrap()])
}

/// Copies `src` to `dst` with the `u` coordinate of one valid input sample
/// shifted by `delta`. Returns the mutated line number (1-based).
pub fn mutate_one_sample(src: &Path, dst: &Path, seed: u64, delta: f64) -> usize {
    let text = std::fs::read_to_string(src).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let candidates: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.contains("\"kind\":\"input\"") && l.contains("\"valid\":true"))
        .map(|(i, _)| i)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let i = candidates[rng.random_range(0..candidates.len())];
    let mut v: Value = serde_json::from_str(&lines[i]).unwrap();
    let u = v["sample"]["u"].as_f64().unwrap();
    let shifted = if u + delta <= 1.0 { u + delta } else { u - delta };
    v["sample"]["u"] = Value::from(shifted);
    lines[i] = serde_json::to_string(&v).unwrap();
    std::fs::write(dst, lines.join("\n") + "\n").unwrap();
    i + 1
}
