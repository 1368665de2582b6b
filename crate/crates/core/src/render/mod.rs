//! Ray-cast rendering of mirror-like objects reflecting an environment map.
//!
//! Per hit pixel with view vector `v = -dir` and normal `n`:
//! `color = (1 - F) * base_color * max(0, n.v) + F * env(reflect(dir, n))`
//! where `F` is Schlick's Fresnel term at `cos = max(0, n.v)`.

mod geometry;
mod obj;
mod scene_file;
mod shading;

pub use geometry::{intersect, Hit, Mesh, SceneObject, Sphere};
pub use obj::{load_obj, parse_obj};
pub use scene_file::{load_scene, SceneFile, SphereFile};
pub use shading::{fresnel, reflect_vector};

use crate::camera::Camera;
use crate::envmap::{sample_bilinear, EnvironmentMap, Parameterization, UnitDirection};
use crate::error::{validation, Error, Result};
use crate::par::{self, Exec};
use crate::raster::{Grid, Rgb, RgbImage, Rgba};

/// Angle by which SphereMap lookups at the singular direction are moved toward +z.
pub const SINGULAR_NUDGE_RAD: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    pub camera: Camera,
    pub background: Rgb,
    pub base_color: Rgb,
    f0: f64,
}

impl Scene {
    pub fn new(objects: Vec<SceneObject>, camera: Camera, background: Rgb, base_color: Rgb, f0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f0) {
            return Err(validation(format!("f0 must lie in [0, 1], got {f0}")));
        }
        let finite = |c: Rgb| c.to_array().iter().all(|v| v.is_finite());
        if !finite(background) || !finite(base_color) {
            return Err(validation("scene colors must be finite"));
        }
        Ok(Self { objects, camera, background, base_color, f0 })
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderOutput {
    pub image: RgbImage,
    pub hit_mask: Grid<bool>,
}

impl RenderOutput {
    pub fn hit_count(&self) -> usize {
        self.hit_mask.iter().filter(|&&h| h).count()
    }
}

/// Environment lookup that never fails on the SphereMap singular direction.
pub fn lookup_env(env: &EnvironmentMap, d: UnitDirection) -> Rgba {
    match sample_bilinear(env, d) {
        Ok(c) => c,
        Err(Error::Singularity(_)) if env.param() == Parameterization::SphereMap => {
            let (s, c) = SINGULAR_NUDGE_RAD.sin_cos();
            let nudged = UnitDirection::new(s, 0.0, -c).expect("nudged direction is nonzero");
            sample_bilinear(env, nudged).unwrap_or(Rgba::TRANSPARENT)
        }
        Err(_) => Rgba::TRANSPARENT,
    }
}

/// Shades one primary-ray hit.
pub fn shade(scene: &Scene, env: &EnvironmentMap, dir: UnitDirection, hit: &Hit) -> Rgb {
    let n = hit.normal;
    let n_dot_v = (-dir.vec()).dot(n.vec()).clamp(0.0, 1.0);
    let f = shading::fresnel_unchecked(n_dot_v, scene.f0);
    let mirror = lookup_env(env, reflect_vector(dir, n)).rgb();
    let local = (1.0 - f) * n_dot_v;
    let mix = |base: f32, m: f32| (local * f64::from(base) + f * f64::from(m)) as f32;
    Rgb::new(
        mix(scene.base_color.r, mirror.r),
        mix(scene.base_color.g, mirror.g),
        mix(scene.base_color.b, mirror.b),
    )
}

pub fn render_reflection(scene: &Scene, env: &EnvironmentMap) -> Result<RenderOutput> {
    render_reflection_with(Exec::default(), scene, env)
}

pub fn render_reflection_with(exec: Exec, scene: &Scene, env: &EnvironmentMap) -> Result<RenderOutput> {
    let k = scene.camera.intrinsics;
    let origin = scene.camera.pose.center();
    let cells = par::fill(exec, k.width, k.height, |x, y| {
        let dir = scene.camera.pixel_to_ray(x as f64 + 0.5, y as f64 + 0.5);
        match intersect(&scene.objects, origin, dir) {
            Some(hit) => (shade(scene, env, dir, &hit), true),
            None => (scene.background, false),
        }
    });
    let (pixels, mask): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
    Ok(RenderOutput {
        image: Grid::from_vec(k.width, k.height, pixels)?,
        hit_mask: Grid::from_vec(k.width, k.height, mask)?,
    })
}
