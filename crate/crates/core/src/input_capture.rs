//! Camera-space tracker samples to calibrated, smoothed game-space hand
//! states.
//!
//! The pipeline is: drop invalid or out-of-order samples, map `(u, v)`
//! through an affine [`CalibrationMap`] onto the table plane, smooth the
//! points in the trailing velocity window with an exponential filter, and
//! take the least-squares slope of the smoothed points as the velocity.

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

#[derive(Debug, Error, PartialEq)]
pub enum CaptureError {
    #[error("calibration needs at least 3 non-collinear correspondences")]
    DegenerateCorrespondences,
    #[error("sample at t={t} has no tracking lock")]
    InvalidSample { t: f64 },
    #[error("tracking lost (last valid sample: {last_seen:?})")]
    TrackingLost { last_seen: Option<f64> },
    #[error("sample stream line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("sample stream i/o: {0}")]
    Io(String),
}

/// One reading of the IR tracker in normalized camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub valid: bool,
}

impl RawSample {
    pub fn new(t: f64, u: f64, v: f64) -> Self {
        Self { t, u, v, valid: true }
    }

    pub fn lost(t: f64) -> Self {
        Self { t, u: 0.0, v: 0.0, valid: false }
    }
}

/// Affine map from the camera plane to the table plane:
///
/// ```text
/// x = m[0][0]*u + m[0][1]*v + m[0][2]
/// y = m[1][0]*u + m[1][1]*v + m[1][2]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMap {
    pub m: [[f64; 3]; 2],
}

impl Default for CalibrationMap {
    /// Camera frame stretched over the default 0.8 m x 0.5 m table.
    fn default() -> Self {
        Self::scale_translate(0.8, 0.5, 0.0, 0.0)
    }
}

impl CalibrationMap {
    pub const IDENTITY: CalibrationMap = CalibrationMap {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    };

    pub fn scale_translate(sx: f64, sy: f64, tx: f64, ty: f64) -> Self {
        Self {
            m: [[sx, 0.0, tx], [0.0, sy, ty]],
        }
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn is_invertible(&self) -> bool {
        let d = self.determinant();
        d.is_finite() && d.abs() > 1e-12
    }

    /// Camera point to table-plane point.
    pub fn forward(&self, u: f64, v: f64) -> (f64, f64) {
        let [r0, r1] = self.m;
        (
            r0[0] * u + r0[1] * v + r0[2],
            r1[0] * u + r1[1] * v + r1[2],
        )
    }

    /// Table-plane point back to camera coordinates.
    pub fn inverse(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        if !self.is_invertible() {
            return None;
        }
        let [r0, r1] = self.m;
        let det = self.determinant();
        let (dx, dy) = (x - r0[2], y - r1[2]);
        Some(((r1[1] * dx - r0[1] * dy) / det, (r0[0] * dy - r1[0] * dx) / det))
    }
}

/// Least-squares affine fit from camera points to game points.
pub fn solve_calibration(
    pairs: &[((f64, f64), (f64, f64))],
) -> Result<CalibrationMap, CaptureError> {
    if pairs.len() < 3 {
        return Err(CaptureError::DegenerateCorrespondences);
    }
    let n = pairs.len() as f64;
    let (mut mu, mut mv, mut mx, mut my) = (0.0, 0.0, 0.0, 0.0);
    for &((u, v), (x, y)) in pairs {
        mu += u;
        mv += v;
        mx += x;
        my += y;
    }
    mu /= n;
    mv /= n;
    mx /= n;
    my /= n;

    // Centered normal equations; the intercepts follow from the means.
    let (mut suu, mut suv, mut svv) = (0.0, 0.0, 0.0);
    let (mut sux, mut svx, mut suy, mut svy) = (0.0, 0.0, 0.0, 0.0);
    for &((u, v), (x, y)) in pairs {
        let (du, dv, dx, dy) = (u - mu, v - mv, x - mx, y - my);
        suu += du * du;
        suv += du * dv;
        svv += dv * dv;
        sux += du * dx;
        svx += dv * dx;
        suy += du * dy;
        svy += dv * dy;
    }
    let det = suu * svv - suv * suv;
    let scale = (suu + svv).max(f64::MIN_POSITIVE);
    if !det.is_finite() || det <= 1e-12 * scale * scale {
        return Err(CaptureError::DegenerateCorrespondences);
    }
    let solve = |bu: f64, bv: f64| ((svv * bu - suv * bv) / det, (suu * bv - suv * bu) / det);
    let (a, b) = solve(sux, svx);
    let (d, e) = solve(suy, svy);
    let map = CalibrationMap {
        m: [[a, b, mx - a * mu - b * mv], [d, e, my - d * mu - e * mv]],
    };
    if !map.is_invertible() {
        return Err(CaptureError::DegenerateCorrespondences);
    }
    Ok(map)
}

/// Maps a valid sample onto the table plane (z = 0).
pub fn apply_calibration(map: &CalibrationMap, s: &RawSample) -> Result<Vec3, CaptureError> {
    if !s.valid {
        return Err(CaptureError::InvalidSample { t: s.t });
    }
    let (x, y) = map.forward(s.u, s.v);
    Ok(Vec3::planar(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandState {
    pub pos: Vec3,
    pub vel: Vec3,
    pub speed: f64,
    pub t: f64,
}

impl HandState {
    pub fn at_rest(pos: Vec3, t: f64) -> Self {
        Self {
            pos,
            vel: Vec3::ZERO,
            speed: 0.0,
            t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    /// Exponential smoothing weight of the newest sample, in (0, 1].
    pub alpha: f64,
    /// Trailing window for smoothing and velocity regression, seconds.
    pub velocity_window: f64,
    /// Seconds without a valid sample before tracking counts as lost.
    pub dropout_timeout: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            velocity_window: 0.25,
            dropout_timeout: 0.5,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(("alpha", format!("must be in (0, 1], got {}", self.alpha)));
        }
        if !(self.velocity_window > 0.0 && self.velocity_window.is_finite()) {
            return Err(("velocity_window", "must be > 0".into()));
        }
        if !(self.dropout_timeout > 0.0 && self.dropout_timeout.is_finite()) {
            return Err(("dropout_timeout", "must be > 0".into()));
        }
        Ok(())
    }
}

// Slack on the window edge so a window of exactly `velocity_window`
// seconds keeps both endpoints despite rounding in the timestamps.
const WINDOW_EPS: f64 = 1e-9;

/// Incremental hand estimator. Holds only the calibrated points inside the
/// trailing velocity window, so each update is O(window).
#[derive(Debug, Clone)]
pub struct HandTracker {
    map: CalibrationMap,
    cfg: FilterConfig,
    window: VecDeque<(f64, Vec3)>,
    last_t: Option<f64>,
    last_valid_t: Option<f64>,
}

impl HandTracker {
    pub fn new(map: CalibrationMap, cfg: FilterConfig) -> Self {
        Self {
            map,
            cfg,
            window: VecDeque::new(),
            last_t: None,
            last_valid_t: None,
        }
    }

    pub fn calibration(&self) -> &CalibrationMap {
        &self.map
    }

    pub fn last_valid_t(&self) -> Option<f64> {
        self.last_valid_t
    }

    /// Feeds one sample. Returns `false` when the sample is ignored
    /// because its timestamp does not advance the stream or it is not finite.
    pub fn push(&mut self, s: &RawSample) -> bool {
        if !s.t.is_finite() || self.last_t.is_some_and(|last| s.t <= last) {
            return false;
        }
        self.last_t = Some(s.t);
        if !s.valid || !s.u.is_finite() || !s.v.is_finite() {
            return true;
        }
        let Ok(p) = apply_calibration(&self.map, s) else {
            return true;
        };
        self.window.push_back((s.t, p));
        self.last_valid_t = Some(s.t);
        let horizon = s.t - self.cfg.velocity_window - WINDOW_EPS;
        while self.window.front().is_some_and(|&(t, _)| t < horizon) {
            self.window.pop_front();
        }
        true
    }

    /// Hand estimate as seen at time `now`.
    pub fn state(&self, now: f64) -> Result<HandState, CaptureError> {
        let last_seen = self.last_valid_t;
        match last_seen {
            Some(t) if now - t <= self.cfg.dropout_timeout => {}
            _ => return Err(CaptureError::TrackingLost { last_seen }),
        }
        Ok(smooth_window(&self.window, self.cfg.alpha))
    }
}

fn smooth_window(window: &VecDeque<(f64, Vec3)>, alpha: f64) -> HandState {
    let mut smoothed = Vec::with_capacity(window.len());
    let mut acc: Option<Vec3> = None;
    for &(t, p) in window {
        let s = match acc {
            None => p,
            Some(prev) => p * alpha + prev * (1.0 - alpha),
        };
        acc = Some(s);
        smoothed.push((t, s));
    }
    let &(t_last, pos) = smoothed.last().expect("window holds the last valid sample");

    let n = smoothed.len() as f64;
    let t_mean = smoothed.iter().map(|(t, _)| t).sum::<f64>() / n;
    let p_mean = smoothed.iter().fold(Vec3::ZERO, |a, (_, p)| a + *p) / n;
    let mut stt = 0.0;
    let mut stp = Vec3::ZERO;
    for &(t, p) in &smoothed {
        let dt = t - t_mean;
        stt += dt * dt;
        stp += (p - p_mean) * dt;
    }
    let vel = if stt > 0.0 { stp / stt } else { Vec3::ZERO };
    HandState {
        pos,
        vel,
        speed: vel.norm(),
        t: t_last,
    }
}

/// Batch form of [`HandTracker`]: replays `history` and queries at `now`.
pub fn estimate_state(
    history: &[RawSample],
    map: &CalibrationMap,
    cfg: &FilterConfig,
    now: f64,
) -> Result<HandState, CaptureError> {
    let mut tracker = HandTracker::new(*map, *cfg);
    for s in history {
        tracker.push(s);
    }
    tracker.state(now)
}

/// Single-producer sample log with snapshot reads.
///
/// The writer half is not `Clone`; readers are cheap to clone and only ever
/// see immutable snapshots.
pub fn sample_log() -> (SampleWriter, SampleReader) {
    let inner = Arc::new(RwLock::new(Vec::new()));
    (SampleWriter(inner.clone()), SampleReader(inner))
}

#[derive(Debug)]
pub struct SampleWriter(Arc<RwLock<Vec<RawSample>>>);

impl SampleWriter {
    pub fn push(&self, s: RawSample) {
        self.0.write().expect("sample log poisoned").push(s);
    }
}

#[derive(Debug, Clone)]
pub struct SampleReader(Arc<RwLock<Vec<RawSample>>>);

impl SampleReader {
    pub fn snapshot(&self) -> Vec<RawSample> {
        self.0.read().expect("sample log poisoned").clone()
    }

    pub fn estimate(
        &self,
        map: &CalibrationMap,
        cfg: &FilterConfig,
        now: f64,
    ) -> Result<HandState, CaptureError> {
        estimate_state(&self.snapshot(), map, cfg, now)
    }
}

/// Reads a replay stream: one `{"t","u","v","valid"}` object per line.
/// Blank lines are skipped.
pub fn read_sample_stream<R: BufRead>(reader: R) -> Result<Vec<RawSample>, CaptureError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CaptureError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: RawSample = serde_json::from_str(&line).map_err(|e| CaptureError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(s);
    }
    Ok(out)
}

pub fn write_sample_stream<W: Write>(mut w: W, samples: &[RawSample]) -> std::io::Result<()> {
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
