//! Foreground mattes from clean-plate difference keying or a supplied alpha channel.

use crate::error::{validation, Result};
use crate::par::{self, Exec};
use crate::raster::{Grid, Rgba, RgbaImage};

pub const DEFAULT_KEY_T0: f32 = 0.02;
pub const DEFAULT_KEY_T1: f32 = 0.10;

/// RGBA frame whose alpha is foreground coverage.
#[derive(Clone, Debug, PartialEq)]
pub struct MatteFrame {
    pixels: RgbaImage,
    premultiplied: bool,
}

impl MatteFrame {
    pub fn new(pixels: RgbaImage, premultiplied: bool) -> Result<Self> {
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(&p.a) || !p.is_finite()) {
            return Err(validation(format!("matte pixel {p:?} has alpha outside [0, 1]")));
        }
        Ok(Self { pixels, premultiplied })
    }

    pub fn pixels(&self) -> &RgbaImage {
        &self.pixels
    }

    pub fn into_pixels(self) -> RgbaImage {
        self.pixels
    }

    pub fn is_premultiplied(&self) -> bool {
        self.premultiplied
    }

    /// Same matte with premultiplied color.
    pub fn premultiply(self) -> Self {
        if self.premultiplied {
            return self;
        }
        Self {
            pixels: self.pixels.map(|p| p.premultiplied()),
            premultiplied: true,
        }
    }
}

/// Alpha ramps linearly from 0 at `t0` to 1 at `t1` of max-channel distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyThresholds {
    pub t0: f32,
    pub t1: f32,
}

impl KeyThresholds {
    pub fn new(t0: f32, t1: f32) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && 0.0 <= t0 && t0 < t1) {
            return Err(validation(format!("key thresholds need 0 <= t0 < t1, got {t0}, {t1}")));
        }
        Ok(KeyThresholds { t0, t1 })
    }

    fn alpha(&self, dist: f32) -> f32 {
        let KeyThresholds { t0, t1 } = *self;
        if dist <= t0 {
            0.0
        } else if dist >= t1 {
            1.0
        } else {
            (dist - t0) / (t1 - t0)
        }
    }
}

/// Difference key against a clean plate; output is premultiplied.
pub fn extract_matte(frame: &RgbaImage, clean_plate: &RgbaImage, t0: f32, t1: f32) -> Result<MatteFrame> {
    extract_matte_with(Exec::default(), frame, clean_plate, t0, t1)
}

pub fn extract_matte_with(
    exec: Exec,
    frame: &RgbaImage,
    clean_plate: &RgbaImage,
    t0: f32,
    t1: f32,
) -> Result<MatteFrame> {
    let key = KeyThresholds::new(t0, t1)?;
    if frame.dims() != clean_plate.dims() {
        return Err(validation(format!(
            "frame is {:?} but the clean plate is {:?}",
            frame.dims(),
            clean_plate.dims()
        )));
    }
    let (w, h) = frame.dims();
    let data = par::fill(exec, w, h, |x, y| {
        let p = frame.get(x, y);
        let q = clean_plate.get(x, y);
        let dist = (p.r - q.r).abs().max((p.g - q.g).abs()).max((p.b - q.b).abs());
        let a = key.alpha(dist);
        Rgba::new(p.r * a, p.g * a, p.b * a, a)
    });
    MatteFrame::new(Grid::from_vec(w, h, data)?, true)
}

/// Bypass mode: coverage is the frame's own alpha channel.
pub fn matte_from_alpha(frame: &RgbaImage) -> Result<MatteFrame> {
    MatteFrame::new(frame.clone(), false).map(MatteFrame::premultiply)
}
