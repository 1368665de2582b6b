//! Synthetic capture rigs rendered from analytic environments, used as ground truth.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::camera::{Camera, CameraIntrinsics, CameraPose};
use crate::codec;
use crate::envmap::{save_envmap, EnvironmentMap, MapShape, Parameterization, UnitDirection};
use crate::error::{validation, Result};
use crate::math::Vec3;
use crate::par::{self, Exec};
use crate::raster::{Grid, Rgba, RgbaImage};
use crate::render::SphereFile;
use crate::rig::{CameraFile, Matting, RigFile};

/// Closed-form radiance over the sphere of directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnalyticEnv {
    Constant { color: [f32; 3] },
    /// Each channel is `0.5 + 0.5 * component` of the direction.
    Gradient,
    /// Hue follows azimuth, brightness follows elevation.
    ColorWheel,
    /// Smooth bright disc on a dim background.
    DiscLight,
}

impl AnalyticEnv {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gradient" => Ok(AnalyticEnv::Gradient),
            "color-wheel" => Ok(AnalyticEnv::ColorWheel),
            "disc-light" => Ok(AnalyticEnv::DiscLight),
            other => {
                let rgb = parse_triplet(other.strip_prefix("constant:").unwrap_or(other))
                    .ok_or_else(|| validation(format!("unknown environment {other:?}")))?;
                Ok(AnalyticEnv::Constant { color: rgb.map(|c| c as f32) })
            }
        }
    }

    pub fn eval(&self, d: UnitDirection) -> Rgba {
        match *self {
            AnalyticEnv::Constant { color: [r, g, b] } => Rgba::opaque(r, g, b),
            AnalyticEnv::Gradient => Rgba::opaque(
                (0.5 + 0.5 * d.x()) as f32,
                (0.5 + 0.5 * d.y()) as f32,
                (0.5 + 0.5 * d.z()) as f32,
            ),
            AnalyticEnv::ColorWheel => {
                let hue = (d.x().atan2(-d.z()) / (2.0 * PI)).rem_euclid(1.0);
                let value = 0.6 + 0.3 * d.y();
                let sat = 1.0 - d.y() * d.y();
                let [r, g, b] = hsv_to_rgb(hue, sat, value);
                Rgba::opaque(r as f32, g as f32, b as f32)
            }
            AnalyticEnv::DiscLight => {
                let center = Vec3::new(0.3, 0.8, -0.5).try_normalize().expect("nonzero");
                let c = d.vec().dot(center).max(0.0);
                let glow = c.powi(32);
                let v = 0.05 + 0.9 * glow;
                Rgba::opaque(v as f32, v as f32, (0.08 + 0.85 * glow) as f32)
            }
        }
    }
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    let f = |n: f64| {
        let k = (n + h * 6.0) % 6.0;
        v - v * s * k.min(4.0 - k).clamp(0.0, 1.0)
    };
    [f(5.0), f(3.0), f(1.0)]
}

pub(crate) fn parse_triplet(s: &str) -> Option<[f64; 3]> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
    <[f64; 3]>::try_from(v).ok()
}

/// Azimuth/elevation in degrees; azimuth 0 is `-z`, 90 is `+x`, elevation 90 is `+y`.
pub fn direction_from_angles(azimuth_deg: f64, elevation_deg: f64) -> UnitDirection {
    let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    UnitDirection::new(el.cos() * az.sin(), el.sin(), -el.cos() * az.cos()).expect("angles give a unit vector")
}

/// Disc-shaped stand-in for the user, moving linearly in azimuth/elevation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Billboard {
    /// `[azimuth, elevation]` in degrees at the first frame.
    pub from: [f64; 2],
    /// `[azimuth, elevation]` at the last frame.
    pub to: [f64; 2],
    pub radius_deg: f64,
    pub color: [f32; 3],
}

impl Billboard {
    pub fn direction(&self, frame: u32, frames: u32) -> UnitDirection {
        let t = if frames > 1 { f64::from(frame) / f64::from(frames - 1) } else { 0.0 };
        let lerp = |a: f64, b: f64| a + (b - a) * t;
        direction_from_angles(lerp(self.from[0], self.to[0]), lerp(self.from[1], self.to[1]))
    }

    pub fn covers(&self, d: UnitDirection, frame: u32, frames: u32) -> bool {
        d.angle_to(self.direction(frame, frames)) <= self.radius_deg.to_radians()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameFormat {
    Png,
    Pfm,
}

impl FrameFormat {
    fn ext(self) -> &'static str {
        match self {
            FrameFormat::Png => "png",
            FrameFormat::Pfm => "pfm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRigSpec {
    pub cameras: usize,
    pub fov_deg: f64,
    pub width: usize,
    pub height: usize,
    pub env: AnalyticEnv,
    pub frames: u32,
    pub user: Option<Billboard>,
    pub format: FrameFormat,
    /// Size of the emitted LatLong ground-truth map.
    pub ground_truth: [usize; 2],
}

impl Default for SyntheticRigSpec {
    fn default() -> Self {
        Self {
            cameras: 6,
            fov_deg: 90.0,
            width: 256,
            height: 256,
            env: AnalyticEnv::Gradient,
            frames: 1,
            user: None,
            format: FrameFormat::Png,
            ground_truth: [256, 128],
        }
    }
}

impl SyntheticRigSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cameras == 0 {
            return Err(validation("synthetic rig needs at least one camera"));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(validation(format!("field of view must lie in (0, 180), got {}", self.fov_deg)));
        }
        if self.frames == 0 {
            return Err(validation("synthetic rig needs at least one frame"));
        }
        MapShape::new(self.ground_truth[0], self.ground_truth[1], Parameterization::LatLong)?;
        CameraIntrinsics::from_fov(self.fov_deg, self.width, self.height)?;
        Ok(())
    }
}

/// Optical axes and up hints: cube faces for six cameras, otherwise a horizontal ring.
fn layout(count: usize) -> Vec<(UnitDirection, Vec3)> {
    let y = Vec3::new(0.0, 1.0, 0.0);
    if count == 6 {
        let axes = [
            (Vec3::new(0.0, 0.0, -1.0), y),
            (Vec3::new(1.0, 0.0, 0.0), y),
            (Vec3::new(0.0, 0.0, 1.0), y),
            (Vec3::new(-1.0, 0.0, 0.0), y),
            (Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)),
            (Vec3::new(0.0, -1.0, 0.0), Vec3::new(0.0, 0.0, -1.0)),
        ];
        return axes.iter().map(|&(a, up)| (UnitDirection::from_vec(a).expect("axis"), up)).collect();
    }
    (0..count)
        .map(|k| (direction_from_angles(360.0 * k as f64 / count as f64, 0.0), y))
        .collect()
}

/// In-memory synthetic rig; every camera sits at the capture point.
#[derive(Clone, Debug)]
pub struct SyntheticRig {
    pub spec: SyntheticRigSpec,
    cameras: Vec<Camera>,
}

impl SyntheticRig {
    pub fn new(spec: SyntheticRigSpec) -> Result<Self> {
        spec.validate()?;
        let k = CameraIntrinsics::from_fov(spec.fov_deg, spec.width, spec.height)?;
        let cameras = layout(spec.cameras)
            .into_iter()
            .map(|(axis, up)| Ok(Camera::new(k, CameraPose::look_along(Vec3::ZERO, axis, up)?)))
            .collect::<Result<_>>()?;
        Ok(Self { spec, cameras })
    }

    pub fn cameras(&self) -> &[Camera] {
        &self.cameras
    }

    /// Radiance along `d` at frame `frame`, including the user billboard.
    pub fn radiance(&self, d: UnitDirection, frame: Option<u32>) -> Rgba {
        match (frame, &self.spec.user) {
            (Some(f), Some(b)) if b.covers(d, f, self.spec.frames) => {
                let [r, g, bl] = b.color;
                Rgba::opaque(r, g, bl)
            }
            _ => self.spec.env.eval(d),
        }
    }

    fn render(&self, camera: usize, frame: Option<u32>) -> Result<RgbaImage> {
        let cam = &self.cameras[camera];
        let (w, h) = (self.spec.width, self.spec.height);
        let data = par::fill(Exec::default(), w, h, |x, y| {
            self.radiance(cam.pixel_to_ray(x as f64 + 0.5, y as f64 + 0.5), frame)
        });
        Grid::from_vec(w, h, data)
    }

    /// Camera frame with the user billboard, alpha 1.
    pub fn frame(&self, camera: usize, frame: u32) -> Result<RgbaImage> {
        self.render(camera, Some(frame))
    }

    /// Camera frame of the environment alone.
    pub fn clean_plate(&self, camera: usize) -> Result<RgbaImage> {
        self.render(camera, None)
    }

    pub fn ground_truth(&self) -> Result<EnvironmentMap> {
        let [w, h] = self.spec.ground_truth;
        let env = self.spec.env;
        EnvironmentMap::from_fn(MapShape::new(w, h, Parameterization::LatLong)?, move |d| env.eval(d))
    }

    /// Writes `rig.json`, `cam{k}_%05d.*` frames, `cam{k}_plate.*` clean plates,
    /// `ground_truth.pfm`, a default `scene.json`, `pipeline.json` and `synthetic.json`.
    pub fn write(&self, out: &Path) -> Result<()> {
        std::fs::create_dir_all(out).map_err(crate::error::io_err(out))?;
        let ext = self.spec.format.ext();
        let mut rig = RigFile { cameras: Vec::new() };
        for (k, cam) in self.cameras.iter().enumerate() {
            let pattern = format!("cam{k}_%05d.{ext}");
            rig.cameras.push(CameraFile::from_camera(cam, Some(pattern.clone())));
            codec::write_rgba(&out.join(format!("cam{k}_plate.{ext}")), &self.clean_plate(k)?)?;
            for f in 0..self.spec.frames {
                let path = out.join(crate::rig::frame_path(&pattern, f));
                codec::write_rgba(&path, &self.frame(k, f)?)?;
            }
        }
        write_json(&out.join("rig.json"), &rig)?;
        save_envmap(&out.join("ground_truth.pfm"), &self.ground_truth()?)?;
        write_json(&out.join("scene.json"), &default_scene())?;
        let [gw, gh] = self.spec.ground_truth;
        let cfg = crate::pipeline::PipelineConfig {
            rig: "rig.json".into(),
            background: "ground_truth.pfm".into(),
            scene: "scene.json".into(),
            frames: [0, self.spec.frames - 1],
            size: format!("{gw}x{gh}"),
            param: Parameterization::LatLong,
            matting: Matting::CleanPlate {
                plate: format!("cam{{cam}}_plate.{ext}"),
                t0: crate::matte::DEFAULT_KEY_T0,
                t1: crate::matte::DEFAULT_KEY_T1,
            },
            output_dir: "out".into(),
            workers: par::available_workers(),
        };
        write_json(&out.join("pipeline.json"), &cfg)?;
        write_json(&out.join("synthetic.json"), &self.spec)
    }
}

/// Mirror-ish unit sphere at the origin seen from `+z`.
pub fn default_scene() -> crate::render::SceneFile {
    let pose = CameraPose::look_along(Vec3::new(0.0, 0.0, 3.0), UnitDirection::FORWARD, Vec3::new(0.0, 1.0, 0.0))
        .expect("valid pose");
    let k = CameraIntrinsics::from_fov(45.0, 128, 128).expect("valid intrinsics");
    crate::render::SceneFile {
        spheres: vec![SphereFile { center: [0.0, 0.0, 0.0], radius: 1.0 }],
        meshes: Vec::new(),
        camera: CameraFile::from_camera(&Camera::new(k, pose), None),
        f0: 0.6,
        base_color: [0.05, 0.05, 0.05],
        background: [0.0, 0.0, 0.0],
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let bytes = serde_json::to_vec_pretty(value).map_err(|source| crate::Error::Json { path: path.to_path_buf(), source })?;
    codec::write_file(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::CameraView;

    #[test]
    fn constant_environment_gives_constant_frames() {
        let spec = SyntheticRigSpec {
            cameras: 1,
            width: 16,
            height: 12,
            env: AnalyticEnv::Constant { color: [0.2, 0.4, 0.6] },
            ..Default::default()
        };
        let rig = SyntheticRig::new(spec).unwrap();
        let f = rig.frame(0, 0).unwrap();
        assert!(f.iter().all(|&p| p == Rgba::opaque(0.2, 0.4, 0.6)));
    }

    #[test]
    fn cube_rig_covers_every_texel() {
        let rig = SyntheticRig::new(SyntheticRigSpec { width: 16, height: 16, ..Default::default() }).unwrap();
        let half = rig.cameras()[0].intrinsics.half_diagonal_fov();
        let gt = rig.ground_truth().unwrap();
        for j in 0..gt.height() {
            for i in 0..gt.width() {
                let t = crate::envmap::TexelCoord::center(i, j, gt.width(), gt.height());
                let d = crate::envmap::texel_to_dir(t, Parameterization::LatLong).unwrap();
                // brute force: some camera has the direction inside its square
                // frustum (|x/z| <= 1 and |y/z| <= 1 in camera space)
                let covered = rig.cameras().iter().any(|c| {
                    let q = c.pose.rotation().mul_vec(d.vec());
                    q.z < 0.0 && (q.x / q.z).abs() <= 1.0 + 1e-12 && (q.y / q.z).abs() <= 1.0 + 1e-12
                });
                assert!(covered, "texel {i},{j}");
                assert!(rig.cameras().iter().any(|c| d.angle_to(UnitDirection::from_vec(c.pose.forward()).unwrap()) <= half));
            }
        }
    }

    #[test]
    fn narrow_fov_billboard_seen_by_one_camera() {
        let spec = SyntheticRigSpec {
            cameras: 6,
            fov_deg: 30.0,
            width: 32,
            height: 32,
            user: Some(Billboard { from: [0.0, 0.0], to: [0.0, 0.0], radius_deg: 3.0, color: [1.0, 0.0, 0.0] }),
            ..Default::default()
        };
        let rig = SyntheticRig::new(spec).unwrap();
        let seeing: Vec<usize> = (0..6)
            .filter(|&k| {
                let view = CameraView::new(rig.cameras()[k], rig.frame(k, 0).unwrap()).unwrap();
                view.frame().iter().any(|p| p.r == 1.0 && p.g == 0.0 && p.b == 0.0)
            })
            .collect();
        assert_eq!(seeing, vec![0]);
    }

    #[test]
    fn billboard_path_interpolates() {
        let b = Billboard { from: [150.0, 0.0], to: [210.0, 10.0], radius_deg: 5.0, color: [1.0, 0.0, 0.0] };
        assert!(b.direction(0, 3).angle_to(direction_from_angles(150.0, 0.0)) < 1e-12);
        assert!(b.direction(1, 3).angle_to(direction_from_angles(180.0, 5.0)) < 1e-12);
        assert!(b.direction(2, 3).angle_to(direction_from_angles(210.0, 10.0)) < 1e-12);
        assert!(direction_from_angles(90.0, 0.0).angle_to(UnitDirection::new(1.0, 0.0, 0.0).unwrap()) < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(SyntheticRigSpec { cameras: 0, ..Default::default() }.validate().is_err());
        assert!(SyntheticRigSpec { fov_deg: 180.0, ..Default::default() }.validate().is_err());
        assert!(SyntheticRigSpec { ground_truth: [100, 100], ..Default::default() }.validate().is_err());
        assert_eq!(AnalyticEnv::parse("0.1,0.2,0.3").unwrap(), AnalyticEnv::Constant { color: [0.1, 0.2, 0.3] });
        assert!(AnalyticEnv::parse("plasma").is_err());
    }

    #[test]
    fn analytic_envs_are_valid_radiance() {
        for env in [AnalyticEnv::Gradient, AnalyticEnv::ColorWheel, AnalyticEnv::DiscLight] {
            for k in 0..200 {
                let z = -1.0 + 2.0 * (k as f64 + 0.5) / 200.0;
                let r = (1.0 - z * z).sqrt();
                let d = UnitDirection::new(r * (k as f64).cos(), z, r * (k as f64).sin()).unwrap();
                let c = env.eval(d);
                assert!(c.is_finite() && c.r >= 0.0 && c.g >= 0.0 && c.b >= 0.0 && c.r <= 1.0 && c.g <= 1.0);
            }
        }
    }
}
