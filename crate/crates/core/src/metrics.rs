//! Per-frame timing records and run summaries.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};

pub const STAGES: [&str; 5] = ["matte", "warp", "merge", "composite", "render"];

/// Wall-clock timings of one frame, in milliseconds. `start_ms`/`end_ms` are
/// offsets from the start of the run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub frame: u32,
    pub start_ms: f64,
    pub end_ms: f64,
    pub ingest_ms: f64,
    pub matte_ms: f64,
    pub warp_ms: f64,
    pub merge_ms: f64,
    pub composite_ms: f64,
    pub render_ms: f64,
    pub write_ms: f64,
    pub end_to_end_ms: f64,
}

impl FrameMetrics {
    pub fn stage(&self, name: &str) -> Option<f64> {
        Some(match name {
            "matte" => self.matte_ms,
            "warp" => self.warp_ms,
            "merge" => self.merge_ms,
            "composite" => self.composite_ms,
            "render" => self.render_ms,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub mean_ms: f64,
    pub p95_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameError {
    pub frame: u32,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub frames: Vec<FrameMetrics>,
    pub fps: f64,
    pub wall_ms: f64,
    pub stages: BTreeMap<String, StageSummary>,
    #[serde(default)]
    pub errors: Vec<FrameError>,
}

/// Nearest-rank percentile of an unsorted sample.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    v[rank.min(v.len()) - 1]
}

fn mean(values: &[f64]) -> f64 {
    // identical samples give back exactly the sample
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return first;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Summarizes a run; throughput is frames over the span from the first frame
/// start to the last frame end.
pub fn report_metrics(frames: &[FrameMetrics]) -> Result<MetricsReport> {
    if frames.is_empty() {
        return Err(validation("no frame metrics to report"));
    }
    let start = frames.iter().map(|f| f.start_ms).fold(f64::INFINITY, f64::min);
    let end = frames.iter().map(|f| f.end_ms).fold(f64::NEG_INFINITY, f64::max);
    let wall_ms = (end - start).max(f64::MIN_POSITIVE);
    let mut stages = BTreeMap::new();
    for name in STAGES.iter().copied().chain(["end_to_end"]) {
        let values: Vec<f64> = frames
            .iter()
            .map(|f| f.stage(name).unwrap_or(f.end_to_end_ms))
            .collect();
        stages.insert(
            name.to_string(),
            StageSummary { mean_ms: mean(&values), p95_ms: percentile(&values, 95.0) },
        );
    }
    Ok(MetricsReport {
        frames: frames.to_vec(),
        fps: frames.len() as f64 / (wall_ms / 1000.0),
        wall_ms,
        stages,
        errors: Vec::new(),
    })
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>10} {:>10}", "stage", "mean ms", "p95 ms")?;
        for name in STAGES.iter().copied().chain(["end_to_end"]) {
            if let Some(s) = self.stages.get(name) {
                writeln!(f, "{:<12} {:>10.3} {:>10.3}", name, s.mean_ms, s.p95_ms)?;
            }
        }
        write!(
            f,
            "{} frames in {:.1} ms, {:.2} fps",
            self.frames.len(),
            self.wall_ms,
            self.fps
        )?;
        if !self.errors.is_empty() {
            write!(f, ", {} frames failed", self.errors.len())?;
        }
        Ok(())
    }
}
