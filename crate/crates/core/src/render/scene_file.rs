use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{load_obj, Scene, SceneObject, Sphere};
use crate::error::Result;
use crate::math::Vec3;
use crate::raster::Rgb;
use crate::rig::{read_json, resolve, CameraFile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereFile {
    pub center: [f64; 3],
    pub radius: f64,
}

/// Scene JSON; mesh paths are relative to the scene file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(default)]
    pub spheres: Vec<SphereFile>,
    #[serde(default)]
    pub meshes: Vec<String>,
    pub camera: CameraFile,
    pub f0: f64,
    pub base_color: [f32; 3],
    pub background: [f32; 3],
}

impl SceneFile {
    pub fn into_scene(&self, base: &Path) -> Result<Scene> {
        let mut objects = self
            .spheres
            .iter()
            .map(|s| Sphere::new(Vec3::from_array(s.center), s.radius).map(SceneObject::Sphere))
            .collect::<Result<Vec<_>>>()?;
        for m in &self.meshes {
            objects.push(SceneObject::Mesh(load_obj(Path::new(&resolve(base, m)))?));
        }
        Scene::new(
            objects,
            self.camera.to_camera()?,
            Rgb::from_array(self.background),
            Rgb::from_array(self.base_color),
            self.f0,
        )
    }
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    let file: SceneFile = read_json(path)?;
    file.into_scene(path.parent().unwrap_or(Path::new("")))
}
