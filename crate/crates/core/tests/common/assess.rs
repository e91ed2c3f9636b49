use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use mrr::assessment::{aggregate_all, Condition, GeqComponent, GeqResponse};

/// Item pairs per component, read from the shipped item table without
/// going through the library's loader.
pub fn item_pairs() -> Vec<(String, Vec<usize>)> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/igeq_items.json");
    let items: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let mut out: Vec<(String, Vec<usize>)> = Vec::new();
    for it in items {
        let comp = it["component"].as_str().unwrap().to_owned();
        let n = it["item"].as_u64().unwrap() as usize;
        match out.iter_mut().find(|(c, _)| *c == comp) {
            Some((_, v)) => v.push(n),
            None => out.push((comp, vec![n])),
        }
    }
    out
}

pub fn responses() -> impl Strategy<Value = Vec<GeqResponse>> {
    let one = (
        prop::sample::select(Condition::ALL.to_vec()),
        prop::array::uniform14(prop_oneof![0.0..=4.0f64, (0u8..=4).prop_map(f64::from)]),
    );
    prop::collection::vec(one, 1..40).prop_map(|rs| {
        rs.into_iter()
            .enumerate()
            .map(|(i, (c, items))| GeqResponse::new(&format!("r{i}"), c, items))
            .collect()
    })
}

/// Largest deviation between the library's aggregates and a two-pass
/// oracle over one dataset.
pub fn aggregate_error(rs: &[GeqResponse]) -> f64 {
    let pairs = item_pairs();
    let stats = aggregate_all(rs).unwrap();
    let mut worst: f64 = 0.0;
    for s in &stats {
        let items = &pairs.iter().find(|(c, _)| *c == format!("{:?}", s.component)).unwrap().1;
        let scores: Vec<f64> = rs
            .iter()
            .filter(|r| r.condition == s.condition)
            .map(|r| items.iter().map(|&i| r.items[i - 1].unwrap()).sum::<f64>() / items.len() as f64)
            .collect();
        assert_eq!(scores.len(), s.n);
        let (m, sd) = super::two_pass(&scores);
        worst = worst.max((m - s.mean).abs()).max((sd - s.sd).abs());
    }
    let conditions = Condition::ALL.iter().filter(|c| rs.iter().any(|r| r.condition == **c)).count();
    assert_eq!(stats.len(), conditions * GeqComponent::ALL.len());
    worst
}

/// Worst oracle deviation over `n` fixed-seed datasets.
pub fn worst_aggregate_error(n: usize) -> f64 {
    let mut runner = TestRunner::deterministic();
    let strat = responses();
    (0..n)
        .map(|_| aggregate_error(&strat.new_tree(&mut runner).unwrap().current()))
        .fold(0.0, f64::max)
}

