//! Camera rig JSON documents and frame path patterns.
//!
//! ```json
//! {"cameras":[{"fx":128,"fy":128,"cx":128,"cy":128,"width":256,"height":256,
//!   "rotation":[1,0,0,0,1,0,0,0,1],"translation":[0,0,0],"frames":"cam0_%05d.png"}]}
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camera::{Camera, CameraIntrinsics, CameraPose, CameraView};
use crate::codec;
use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3};
use crate::matte::{extract_matte_with, matte_from_alpha, KeyThresholds};
use crate::par::Exec;
use crate::raster::RgbaImage;
use crate::warp::RigCapture;

/// Camera entry as stored in rig and scene files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraFile {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    /// World-to-camera rotation, row-major.
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<String>,
}

impl CameraFile {
    pub fn from_camera(camera: &Camera, frames: Option<String>) -> Self {
        let k = camera.intrinsics;
        Self {
            fx: k.fx,
            fy: k.fy,
            cx: k.cx,
            cy: k.cy,
            width: k.width,
            height: k.height,
            rotation: camera.pose.rotation().to_row_major(),
            translation: camera.pose.translation().to_array(),
            frames,
        }
    }

    pub fn to_camera(&self) -> Result<Camera> {
        let k = CameraIntrinsics::new(self.fx, self.fy, self.cx, self.cy, self.width, self.height)?;
        let pose = CameraPose::new(Mat3::from_row_major(self.rotation), Vec3::from_array(self.translation))?;
        Ok(Camera::new(k, pose))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigFile {
    pub cameras: Vec<CameraFile>,
}

#[derive(Clone, Debug)]
pub struct RigCamera {
    pub camera: Camera,
    /// Frame path pattern, already resolved against the rig directory.
    pub frames: String,
}

#[derive(Clone, Debug)]
pub struct Rig {
    pub cameras: Vec<RigCamera>,
}

/// How camera frames become mattes before warping.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Matting {
    /// Coverage is the frame's alpha channel.
    #[default]
    Alpha,
    /// Difference key against per-camera clean plates; `{cam}` in the pattern
    /// is replaced by the camera index.
    CleanPlate { plate: String, t0: f32, t1: f32 },
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = codec::read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

pub(crate) fn resolve(base: &Path, p: &str) -> String {
    let path = Path::new(p);
    if path.is_absolute() {
        p.to_string()
    } else {
        base.join(path).to_string_lossy().into_owned()
    }
}

pub fn load_rig(path: &Path) -> Result<Rig> {
    let file: RigFile = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    if file.cameras.is_empty() {
        return Err(Error::Parse { path: path.to_path_buf(), message: "rig has no cameras".into() });
    }
    let cameras = file
        .cameras
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let frames = c.frames.as_deref().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: format!("camera {i} has no frames pattern"),
            })?;
            Ok(RigCamera { camera: c.to_camera()?, frames: resolve(base, frames) })
        })
        .collect::<Result<_>>()?;
    Ok(Rig { cameras })
}

/// Expands printf-style `%d` / `%0Nd` in `pattern` with `index`.
pub fn frame_path(pattern: &str, index: u32) -> PathBuf {
    let mut out = String::with_capacity(pattern.len() + 8);
    let mut chars = pattern.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        let mut spec = String::new();
        while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
            spec.push(d);
            chars.next();
        }
        match chars.peek() {
            Some('d') => {
                chars.next();
                let width: usize = spec.trim_start_matches('0').parse().unwrap_or(0);
                if spec.starts_with('0') {
                    out.push_str(&format!("{index:0width$}"));
                } else {
                    out.push_str(&format!("{index:width$}"));
                }
            }
            Some('%') if spec.is_empty() => {
                chars.next();
                out.push('%');
            }
            _ => {
                out.push('%');
                out.push_str(&spec);
            }
        }
    }
    PathBuf::from(out)
}

pub fn camera_path(pattern: &str, camera: usize) -> PathBuf {
    PathBuf::from(pattern.replace("{cam}", &camera.to_string()))
}

/// Per-camera matting state, with clean plates loaded once.
#[derive(Clone, Debug)]
pub enum Matter {
    Alpha,
    CleanPlate { plates: Vec<RgbaImage>, key: KeyThresholds },
}

impl Matter {
    pub fn new(matting: &Matting, rig: &Rig) -> Result<Self> {
        match matting {
            Matting::Alpha => Ok(Matter::Alpha),
            Matting::CleanPlate { plate, t0, t1 } => {
                let key = KeyThresholds::new(*t0, *t1)?;
                let plates = (0..rig.cameras.len())
                    .map(|i| codec::read_rgba(&camera_path(plate, i)))
                    .collect::<Result<_>>()?;
                Ok(Matter::CleanPlate { plates, key })
            }
        }
    }

    pub fn apply(&self, exec: Exec, camera: usize, frame: &RgbaImage) -> Result<RgbaImage> {
        let matte = match self {
            Matter::Alpha => matte_from_alpha(frame)?,
            Matter::CleanPlate { plates, key } => extract_matte_with(exec, frame, &plates[camera], key.t0, key.t1)?,
        };
        Ok(matte.into_pixels())
    }
}

/// Reads every camera's frame for `index`.
pub fn load_frames(rig: &Rig, index: u32) -> Result<Vec<RgbaImage>> {
    rig.cameras
        .iter()
        .map(|c| codec::read_rgba(&frame_path(&c.frames, index)))
        .collect()
}

/// Mattes raw frames and pairs them with their cameras.
pub fn matte_capture(exec: Exec, rig: &Rig, matter: &Matter, index: u32, frames: &[RgbaImage]) -> Result<RigCapture> {
    let views = rig
        .cameras
        .iter()
        .zip(frames)
        .enumerate()
        .map(|(i, (c, f))| CameraView::new(c.camera, matter.apply(exec, i, f)?))
        .collect::<Result<_>>()?;
    RigCapture::new(index, views)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_patterns() {
        assert_eq!(frame_path("a_%05d.png", 42), PathBuf::from("a_00042.png"));
        assert_eq!(frame_path("a_%d.png", 7), PathBuf::from("a_7.png"));
        assert_eq!(frame_path("a_%3d.png", 7), PathBuf::from("a_  7.png"));
        assert_eq!(frame_path("100%%_%02d", 3), PathBuf::from("100%_03"));
        assert_eq!(frame_path("plain.png", 3), PathBuf::from("plain.png"));
        assert_eq!(camera_path("plate_{cam}.png", 2), PathBuf::from("plate_2.png"));
    }

    #[test]
    fn rig_json_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let cam = Camera::new(CameraIntrinsics::from_fov(90.0, 8, 8).unwrap(), CameraPose::IDENTITY);
        let rig = RigFile { cameras: vec![CameraFile::from_camera(&cam, Some("f_%05d.png".into()))] };
        let path = dir.path().join("rig.json");
        std::fs::write(&path, serde_json::to_vec(&rig).unwrap()).unwrap();
        let loaded = load_rig(&path).unwrap();
        assert_eq!(loaded.cameras[0].camera, cam);
        assert!(loaded.cameras[0].frames.ends_with("f_%05d.png"));

        let mut bad = rig.clone();
        bad.cameras[0].rotation[0] = 2.0;
        std::fs::write(&path, serde_json::to_vec(&bad).unwrap()).unwrap();
        assert!(load_rig(&path).is_err());

        std::fs::write(&path, br#"{"cameras":[]}"#).unwrap();
        assert!(load_rig(&path).is_err());
    }

    #[test]
    fn matting_json_shape() {
        let m: Matting = serde_json::from_str(r#"{"mode":"clean_plate","plate":"p_{cam}.png","t0":0.02,"t1":0.1}"#).unwrap();
        assert!(matches!(m, Matting::CleanPlate { .. }));
        let m: Matting = serde_json::from_str(r#"{"mode":"alpha"}"#).unwrap();
        assert_eq!(m, Matting::Alpha);
    }
}
