//! Per-frame pipeline: ingest, matte, warp, merge, composite, render.
//!
//! Stages within a frame fan out over texels and pixels; frames run one after
//! another. Cross-frame state (rig, clean plates, background, scene) is read-only.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::codec;
use crate::composite::composite_over_with;
use crate::envmap::{load_envmap, save_envmap, EnvironmentMap, MapShape, Parameterization};
use crate::error::{validation, Result};
use crate::metrics::{report_metrics, FrameError, FrameMetrics, MetricsReport};
use crate::par::{self, Exec};
use crate::render::{load_scene, render_reflection_with, RenderOutput, Scene};
use crate::rig::{load_frames, load_rig, matte_capture, resolve, Matter, Matting, Rig};
use crate::warp::{merge_views_with, warp_view_to_envmap_with, WarpTarget};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub rig: String,
    pub background: String,
    pub scene: String,
    /// Inclusive `[first, last]` frame range.
    pub frames: [u32; 2],
    /// `"WIDTHxHEIGHT"`
    pub size: String,
    pub param: Parameterization,
    #[serde(default)]
    pub matting: Matting,
    pub output_dir: String,
    #[serde(default = "par::available_workers")]
    pub workers: usize,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let cfg: PipelineConfig = crate::rig::read_json(path)?;
        cfg.validate()?;
        Ok((cfg, path.parent().unwrap_or(Path::new("")).to_path_buf()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames[0] > self.frames[1] {
            return Err(validation(format!("frame range {:?} is reversed", self.frames)));
        }
        if [&self.rig, &self.background, &self.scene, &self.output_dir].iter().any(|p| p.is_empty()) {
            return Err(validation("pipeline paths must be nonempty"));
        }
        if self.workers == 0 {
            return Err(validation("worker count must be >= 1"));
        }
        self.shape().map(|_| ())
    }

    pub fn shape(&self) -> Result<MapShape> {
        let (w, h) = parse_size(&self.size)?;
        MapShape::new(w, h, self.param)
    }
}

/// Parses `"512x256"`.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| validation(format!("size {s:?} is not WIDTHxHEIGHT")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| validation(format!("size {s:?} is not WIDTHxHEIGHT")))
    };
    Ok((parse(w)?, parse(h)?))
}

pub fn composite_path(dir: &Path, frame: u32) -> PathBuf {
    dir.join(format!("composite_{frame:05}.pfm"))
}

pub fn render_path(dir: &Path, frame: u32) -> PathBuf {
    dir.join(format!("render_{frame:05}.png"))
}

pub struct FrameOutput {
    pub user: EnvironmentMap,
    pub composite: EnvironmentMap,
    pub render: RenderOutput,
    pub metrics: FrameMetrics,
}

/// Loaded read-only state for a run.
pub struct Pipeline {
    rig: Rig,
    matter: Matter,
    background: EnvironmentMap,
    scene: Scene,
    target: WarpTarget,
    exec: Exec,
}

impl Pipeline {
    pub fn new(rig: Rig, matter: Matter, background: EnvironmentMap, scene: Scene, shape: MapShape) -> Result<Self> {
        if background.shape() != shape {
            return Err(validation(format!(
                "background map {:?} does not match the configured map {:?}",
                background.shape(),
                shape
            )));
        }
        Ok(Self { rig, matter, background, scene, target: WarpTarget::new(shape), exec: Exec::default() })
    }

    pub fn from_config(cfg: &PipelineConfig, base: &Path) -> Result<Self> {
        cfg.validate()?;
        let rig = load_rig(Path::new(&resolve(base, &cfg.rig)))?;
        let matting = match &cfg.matting {
            Matting::CleanPlate { plate, t0, t1 } => Matting::CleanPlate { plate: resolve(base, plate), t0: *t0, t1: *t1 },
            m => m.clone(),
        };
        let matter = Matter::new(&matting, &rig)?;
        let background = load_envmap(Path::new(&resolve(base, &cfg.background)))?;
        let scene = load_scene(Path::new(&resolve(base, &cfg.scene)))?;
        Self::new(rig, matter, background, scene, cfg.shape()?)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Runs every stage for one frame; `origin` anchors the metric timestamps.
    pub fn process(&self, index: u32, origin: Instant) -> Result<FrameOutput> {
        let ms = |t: Instant| t.elapsed().as_secs_f64() * 1e3;
        let start = Instant::now();
        let mut m = FrameMetrics { frame: index, start_ms: (start - origin).as_secs_f64() * 1e3, ..Default::default() };

        let t = Instant::now();
        let frames = load_frames(&self.rig, index)?;
        m.ingest_ms = ms(t);

        let t = Instant::now();
        let capture = matte_capture(self.exec, &self.rig, &self.matter, index, &frames)?;
        m.matte_ms = ms(t);

        let t = Instant::now();
        let layers = capture
            .views()
            .iter()
            .map(|v| warp_view_to_envmap_with(self.exec, v, &self.target))
            .collect::<Result<Vec<_>>>()?;
        m.warp_ms = ms(t);

        let t = Instant::now();
        let user = merge_views_with(self.exec, &layers)?;
        m.merge_ms = ms(t);

        let t = Instant::now();
        let composite = composite_over_with(self.exec, &user, &self.background)?;
        m.composite_ms = ms(t);

        let t = Instant::now();
        let render = render_reflection_with(self.exec, &self.scene, &composite)?;
        m.render_ms = ms(t);

        m.end_to_end_ms = ms(start);
        m.end_ms = m.start_ms + m.end_to_end_ms;
        Ok(FrameOutput { user, composite, render, metrics: m })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub write_outputs: bool,
    pub repeat: u32,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { write_outputs: true, repeat: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub requested: usize,
    pub frames: Vec<FrameMetrics>,
    pub errors: Vec<FrameError>,
    pub output_dir: PathBuf,
}

impl PipelineRun {
    pub fn report(&self) -> Result<MetricsReport> {
        let mut report = report_metrics(&self.frames)?;
        report.errors = self.errors.clone();
        Ok(report)
    }

    pub fn exit_code(&self) -> i32 {
        if self.errors.is_empty() { 0 } else { 2 }
    }
}

/// Runs the configured frame range. Loading failures are returned as errors;
/// per-frame failures are recorded and the frame is skipped.
pub fn run_pipeline(cfg: &PipelineConfig, base: &Path, opts: RunOptions) -> Result<PipelineRun> {
    let pipeline = Pipeline::from_config(cfg, base)?;
    let output_dir = PathBuf::from(resolve(base, &cfg.output_dir));
    let run = par::with_workers(cfg.workers, || run_frames(&pipeline, cfg.frames, &output_dir, opts));
    if let Ok(report) = run.report() {
        let name = if opts.write_outputs { "metrics.json" } else { "bench_metrics.json" };
        crate::synthetic::write_json(&output_dir.join(name), &report)?;
    } else if !run.errors.is_empty() {
        let bytes = serde_json::to_vec_pretty(&serde_json::json!({"frames": [], "fps": 0.0, "errors": run.errors}))
            .expect("json value serializes");
        codec::write_file(&output_dir.join("metrics.json"), &bytes)?;
    }
    Ok(run)
}

fn run_frames(pipeline: &Pipeline, range: [u32; 2], out: &Path, opts: RunOptions) -> PipelineRun {
    let origin = Instant::now();
    let mut run = PipelineRun { requested: 0, frames: Vec::new(), errors: Vec::new(), output_dir: out.to_path_buf() };
    for _ in 0..opts.repeat.max(1) {
        for index in range[0]..=range[1] {
            run.requested += 1;
            let result = pipeline.process(index, origin).and_then(|mut f| {
                if opts.write_outputs {
                    let t = Instant::now();
                    save_envmap(&composite_path(out, index), &f.composite)?;
                    codec::write_rgb(&render_path(out, index), &f.render.image)?;
                    f.metrics.write_ms = t.elapsed().as_secs_f64() * 1e3;
                    f.metrics.end_ms += f.metrics.write_ms;
                    f.metrics.end_to_end_ms += f.metrics.write_ms;
                }
                Ok(f.metrics)
            });
            match result {
                Ok(m) => run.frames.push(m),
                Err(e) => {
                    log::warn!("frame {index}: {e}");
                    run.errors.push(FrameError { frame: index, message: e.to_string() });
                }
            }
        }
    }
    run
}
