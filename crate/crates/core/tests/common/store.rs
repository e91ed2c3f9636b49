use std::collections::HashMap;

use serde_json::Value;

use mrr::session_store::{parse_session, Header, SessionRecord, StoreError, TracePoint};
use mrr::{AgentMode, FishState, GameConfig, HandState, Vec3};

/// Record whose trace is a straight line at `speed` m/s along x, sampled
/// at `rate` Hz for `secs` seconds.
pub fn straight_line(speed: f64, secs: f64, rate: f64) -> SessionRecord {
    let mut rec = SessionRecord::new(Header::new("line", "scripted", 0, GameConfig::default()));
    let n = (secs * rate).round() as u64;
    for k in 0..=n {
        let t = k as f64 / rate;
        let pos = Vec3::planar(0.1 + speed * t, 0.2);
        rec.trace.push(TracePoint {
            tick: k,
            t,
            hand: HandState {
                pos,
                vel: Vec3::planar(speed, 0.0),
                speed,
                t,
            },
            fish: FishState::at_rest(Vec3::new(0.4, 0.25, 0.15)),
            mode: AgentMode::Wander,
            tracked: true,
        });
    }
    rec
}

/// Independent metrics from raw JSONL: hand path length over tracked
/// segments, endorsed touches and mode occupancy.
pub struct RawMetrics {
    pub movement_volume: f64,
    pub endorsed: u64,
    pub occupancy: HashMap<String, f64>,
}

pub fn raw_metrics(text: &str) -> RawMetrics {
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let of_kind = |k: &'static str| lines.iter().filter(move |v| v["kind"] == k);
    let pos = |v: &Value| {
        let p = &v["hand"]["pos"];
        [p["x"].as_f64().unwrap(), p["y"].as_f64().unwrap(), p["z"].as_f64().unwrap()]
    };
    let trace: Vec<&Value> = of_kind("trace").collect();
    let mut movement_volume = 0.0;
    for w in trace.windows(2) {
        if w[0]["tracked"] == true && w[1]["tracked"] == true {
            let (a, b) = (pos(w[0]), pos(w[1]));
            movement_volume += ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        }
    }
    let events: Vec<&Value> = of_kind("event").collect();
    let endorsed = events.iter().filter(|e| e["type"] == "TouchEndorsed").count() as u64;
    let end = of_kind("footer").next().unwrap()["ended_at"].as_f64().unwrap();
    let mut occupancy = HashMap::new();
    let (mut mode, mut since) = ("Wander".to_owned(), 0.0);
    for e in events.iter().filter(|e| e["type"] == "AgentTransition") {
        let t = e["t"].as_f64().unwrap();
        *occupancy.entry(mode.clone()).or_insert(0.0) += t - since;
        mode = e["to"].as_str().unwrap().to_owned();
        since = t;
    }
    *occupancy.entry(mode).or_insert(0.0) += end - since;
    for v in occupancy.values_mut() {
        *v /= end;
    }
    RawMetrics {
        movement_volume,
        endorsed,
        occupancy,
    }
}

/// Byte offsets where parsing the prefix fails in an unexpected way.
/// A prefix without a complete header must report `MissingHeader`; any
/// longer prefix must recover every complete line.
pub fn truncation_failures(bytes: &[u8]) -> Vec<usize> {
    let header_end = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
    (0..=bytes.len())
        .filter(|&cut| {
            let prefix = &bytes[..cut];
            let lines = prefix.iter().filter(|&&b| b == b'\n').count();
            match parse_session(prefix) {
                Err(StoreError::MissingHeader) => cut >= header_end,
                Err(_) => true,
                Ok(l) => {
                    let ends_clean = prefix.last().is_none_or(|&b| b == b'\n');
                    cut < header_end || l.complete_lines != lines || l.truncated == ends_clean
                }
            }
        })
        .collect()
}
