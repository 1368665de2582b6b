//! Environment maps: directional radiance stored on a 2D parameterization of the
//! sphere of directions.

mod io;
mod param;
mod sample;

pub use io::{encode_sidecar, load_envmap, save_envmap, sidecar_path};
pub use param::{dir_to_texel, texel_to_dir};
pub use sample::{convert, convert_with, sample_bilinear};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::math::Vec3;
use crate::raster::{Grid, Rgba, RgbaImage};

/// Unit-length world-space direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitDirection(Vec3);

impl UnitDirection {
    pub const FORWARD: UnitDirection = UnitDirection(Vec3::new(0.0, 0.0, -1.0));
    pub const UP: UnitDirection = UnitDirection(Vec3::new(0.0, 1.0, 0.0));

    /// Normalizes `(x, y, z)`; rejects the zero vector and non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vec(Vec3::new(x, y, z))
    }

    pub fn from_vec(v: Vec3) -> Result<Self> {
        v.try_normalize()
            .map(UnitDirection)
            .ok_or_else(|| validation(format!("cannot normalize direction {v:?}")))
    }

    /// Accepts an already-unit vector without renormalizing it.
    pub fn from_unit(v: Vec3) -> Result<Self> {
        if !v.is_finite() || (v.length() - 1.0).abs() > 1e-6 {
            return Err(validation(format!("direction {v:?} is not unit length")));
        }
        Ok(UnitDirection(v))
    }

    pub fn x(self) -> f64 {
        self.0.x
    }

    pub fn y(self) -> f64 {
        self.0.y
    }

    pub fn z(self) -> f64 {
        self.0.z
    }

    pub fn vec(self) -> Vec3 {
        self.0
    }

    /// Angle to `other` in radians, accurate for small angles.
    pub fn angle_to(self, other: UnitDirection) -> f64 {
        let cross = self.0.cross(other.0).length();
        cross.atan2(self.0.dot(other.0))
    }
}

impl std::ops::Neg for UnitDirection {
    type Output = UnitDirection;
    fn neg(self) -> UnitDirection {
        UnitDirection(-self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameterization {
    /// Equirectangular latitude/longitude grid, width = 2 x height.
    LatLong,
    /// Orthographic image of a mirrored sphere, viewed from +z.
    SphereMap,
}

impl Parameterization {
    pub fn name(self) -> &'static str {
        match self {
            Parameterization::LatLong => "latlong",
            Parameterization::SphereMap => "spheremap",
        }
    }

    pub fn check_dims(self, width: usize, height: usize) -> Result<()> {
        if width == 0 || height == 0 {
            return Err(validation(format!("map dimensions must be >= 1, got {width}x{height}")));
        }
        if self == Parameterization::LatLong && width != 2 * height {
            return Err(validation(format!(
                "latlong maps need width = 2 x height, got {width}x{height}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Parameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameterization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "latlong" => Ok(Parameterization::LatLong),
            "spheremap" => Ok(Parameterization::SphereMap),
            other => Err(validation(format!("unknown parameterization {other:?}"))),
        }
    }
}

/// Continuous texture coordinate, `u` horizontal and `v` vertical (0 at the top row).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TexelCoord {
    pub u: f64,
    pub v: f64,
}

impl TexelCoord {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// Center of texel `(i, j)` in a `width x height` map.
    pub fn center(i: usize, j: usize, width: usize, height: usize) -> Self {
        Self::new(
            (i as f64 + 0.5) / width as f64,
            (j as f64 + 0.5) / height as f64,
        )
    }
}

/// Target shape of an environment map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapShape {
    pub width: usize,
    pub height: usize,
    pub param: Parameterization,
}

impl MapShape {
    pub fn new(width: usize, height: usize, param: Parameterization) -> Result<Self> {
        param.check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            param,
        })
    }

    /// True if the center of texel `(i, j)` corresponds to a direction.
    pub fn texel_in_domain(&self, i: usize, j: usize) -> bool {
        match self.param {
            Parameterization::LatLong => true,
            Parameterization::SphereMap => {
                let t = TexelCoord::center(i, j, self.width, self.height);
                param::in_disc(t.u, t.v)
            }
        }
    }
}

/// RGBA radiance texels over a parameterization of the sphere.
///
/// Channels are finite, colors nonnegative and alpha in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentMap {
    param: Parameterization,
    texels: RgbaImage,
}

impl EnvironmentMap {
    pub fn new(param: Parameterization, texels: RgbaImage) -> Result<Self> {
        param.check_dims(texels.width(), texels.height())?;
        if let Some((idx, t)) = texels.iter().enumerate().find(|(_, t)| !texel_valid(t)) {
            return Err(validation(format!(
                "texel {idx} = {t:?} is not finite, negative, or has alpha outside [0, 1]"
            )));
        }
        Ok(Self { param, texels })
    }

    pub fn filled(shape: MapShape, value: Rgba) -> Result<Self> {
        Self::new(shape.param, Grid::filled(shape.width, shape.height, value)?)
    }

    /// Map whose texel centers hold `f(direction)`; SphereMap texels outside the
    /// disc are transparent black.
    pub fn from_fn(shape: MapShape, f: impl Fn(UnitDirection) -> Rgba + Sync + Send) -> Result<Self> {
        let data = crate::par::try_fill(
            crate::par::Exec::default(),
            shape.width,
            shape.height,
            |i, j| {
                if !shape.texel_in_domain(i, j) {
                    return Ok(Rgba::TRANSPARENT);
                }
                let d = texel_to_dir(TexelCoord::center(i, j, shape.width, shape.height), shape.param)?;
                Ok(f(d))
            },
        )?;
        Self::new(shape.param, Grid::from_vec(shape.width, shape.height, data)?)
    }

    pub fn param(&self) -> Parameterization {
        self.param
    }

    pub fn width(&self) -> usize {
        self.texels.width()
    }

    pub fn height(&self) -> usize {
        self.texels.height()
    }

    pub fn shape(&self) -> MapShape {
        MapShape {
            width: self.width(),
            height: self.height(),
            param: self.param,
        }
    }

    pub fn texel(&self, i: usize, j: usize) -> Rgba {
        *self.texels.get(i, j)
    }

    pub fn texels(&self) -> &RgbaImage {
        &self.texels
    }

    pub fn into_texels(self) -> RgbaImage {
        self.texels
    }
}

fn texel_valid(t: &Rgba) -> bool {
    t.is_finite() && t.r >= 0.0 && t.g >= 0.0 && t.b >= 0.0 && (0.0..=1.0).contains(&t.a)
}
