//! Run a two-minute session against a simulated patient and print the
//! therapist metrics. Pass a profile name (stuck, mid, fast, tremor).

use mrr::patient::PatientModel;
use mrr::session_store::{compute_metrics, metrics_summary};
use mrr::sim::{simulate, SimOptions};
use mrr::GameConfig;

fn main() {
    let profile = std::env::args().nth(1).unwrap_or_else(|| "stuck".into());
    let model = PatientModel::builtin(&profile).expect("known profile");
    let out = simulate(&GameConfig::default(), &model, &SimOptions::new(120.0, 7), None).expect("simulation");
    for e in out.record.transitions() {
        println!("{:>7.2} s  {:?}", e.t, e.kind);
    }
    print!("{}", metrics_summary(&compute_metrics(&out.record).expect("enough trace")));
}
