//! Pixel types and row-major grids shared by camera frames and environment maps.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};

/// Linear RGBA with alpha as coverage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rgba {
    pub r: f32,
    pub g: f32,
    pub b: f32,
    pub a: f32,
}

impl Rgba {
    pub const TRANSPARENT: Rgba = Rgba::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(r: f32, g: f32, b: f32, a: f32) -> Self {
        Self { r, g, b, a }
    }

    pub const fn opaque(r: f32, g: f32, b: f32) -> Self {
        Self { r, g, b, a: 1.0 }
    }

    pub fn channels(self) -> [f32; 4] {
        [self.r, self.g, self.b, self.a]
    }

    pub fn from_channels(c: [f32; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn rgb(self) -> Rgb {
        Rgb::new(self.r, self.g, self.b)
    }

    pub fn is_finite(self) -> bool {
        self.channels().iter().all(|c| c.is_finite())
    }

    /// Color channels multiplied by alpha; alpha unchanged.
    pub fn premultiplied(self) -> Self {
        Self::new(self.r * self.a, self.g * self.a, self.b * self.a, self.a)
    }
}

/// Linear RGB.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rgb {
    pub r: f32,
    pub g: f32,
    pub b: f32,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);

    pub const fn new(r: f32, g: f32, b: f32) -> Self {
        Self { r, g, b }
    }

    pub fn from_array(c: [f32; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }

    pub fn to_array(self) -> [f32; 3] {
        [self.r, self.g, self.b]
    }
}

impl Add for Rgb {
    type Output = Rgb;
    fn add(self, o: Rgb) -> Rgb {
        Rgb::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }
}

impl Mul<f32> for Rgb {
    type Output = Rgb;
    fn mul(self, s: f32) -> Rgb {
        Rgb::new(self.r * s, self.g * s, self.b * s)
    }
}

/// Row-major 2D grid; index `(x, y)` with `y = 0` the top row.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![value; width * height],
        })
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(validation(format!(
                "grid of {width}x{height} needs {} cells, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(validation(format!("grid dimensions must be >= 1, got {width}x{height}")));
    }
    Ok(())
}

pub type RgbaImage = Grid<Rgba>;
pub type RgbImage = Grid<Rgb>;

/// Bilinear sample at continuous pixel coordinates (pixel `i` has its center at `i + 0.5`),
/// clamping at the image borders.
pub fn sample_clamped(img: &RgbaImage, x: f64, y: f64) -> Rgba {
    let (x0, x1, tx) = clamped_taps(x, img.width());
    let (y0, y1, ty) = clamped_taps(y, img.height());
    let taps = [
        (img.get(x0, y0), (1.0 - tx) * (1.0 - ty)),
        (img.get(x1, y0), tx * (1.0 - ty)),
        (img.get(x0, y1), (1.0 - tx) * ty),
        (img.get(x1, y1), tx * ty),
    ];
    blend(taps.iter().map(|&(c, w)| (*c, w)))
}

fn clamped_taps(coord: f64, size: usize) -> (usize, usize, f64) {
    let max = (size - 1) as f64;
    let f = (coord - 0.5).clamp(0.0, max);
    let i0 = f.floor();
    let t = f - i0;
    let i0 = i0 as usize;
    (i0, (i0 + 1).min(size - 1), t)
}

/// Weighted sum of texels accumulated in f64, rounded once to f32.
pub(crate) fn blend(taps: impl Iterator<Item = (Rgba, f64)>) -> Rgba {
    let mut acc = [0.0f64; 4];
    for (c, w) in taps {
        if w == 0.0 {
            continue;
        }
        for (a, ch) in acc.iter_mut().zip(c.channels()) {
            *a += f64::from(ch) * w;
        }
    }
    Rgba::from_channels(acc.map(|a| a as f32))
}
