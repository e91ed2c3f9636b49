//! Record a session to disk, reload it, replay it, then tamper with one
//! input and show where the replay diverges.

use mrr::patient::PatientModel;
use mrr::session_store::load_session;
use mrr::sim::{replay, simulate, SimOptions};
use mrr::GameConfig;

fn main() {
    let dir = std::env::temp_dir().join("mrr-replay-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tremor.jsonl");
    let _ = std::fs::remove_file(&path);

    let model = PatientModel::builtin("tremor").unwrap();
    simulate(&GameConfig::default(), &model, &SimOptions::new(20.0, 3), Some(&path)).unwrap();
    let loaded = load_session(&path).unwrap();
    println!("{} holds {} inputs and {} events", path.display(), loaded.record.inputs.len(), loaded.record.events.len());

    let report = replay(&loaded.record).unwrap();
    println!("untouched: {:?}", report.divergence);

    let mut tampered = loaded.record.clone();
    tampered.inputs[600].sample.u += 0.001;
    let report = replay(&tampered).unwrap();
    println!("tampered input at tick {}: {:?}", tampered.inputs[600].tick, report.divergence);
}
