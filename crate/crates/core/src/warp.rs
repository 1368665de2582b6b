//! Warping camera frames onto the sphere of directions and merging the result.
//!
//! Warping is gather-style: every target texel looks up its center direction
//! in the camera. Camera translations are ignored; all directions are taken
//! from the shared capture point.

use crate::camera::CameraView;
use crate::envmap::{texel_to_dir, EnvironmentMap, MapShape, TexelCoord};
use crate::error::{validation, Result};
use crate::par::{self, Exec};
use crate::raster::{Grid, Rgba};

/// Output map layout and the scalar weight given to a camera's samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpTarget {
    pub shape: MapShape,
    pub layer_weight: f32,
}

impl WarpTarget {
    pub fn new(shape: MapShape) -> Self {
        Self { shape, layer_weight: 1.0 }
    }

    pub fn with_layer_weight(mut self, weight: f32) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(validation(format!("layer weight must be positive, got {weight}")));
        }
        self.layer_weight = weight;
        Ok(self)
    }
}

/// One camera warped onto the map: premultiplied color plus accumulation weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedLayer {
    map: EnvironmentMap,
    weight: Grid<f32>,
}

impl WarpedLayer {
    pub fn new(map: EnvironmentMap, weight: Grid<f32>) -> Result<Self> {
        if weight.dims() != (map.width(), map.height()) {
            return Err(validation("weight buffer does not match the map"));
        }
        for (t, &w) in map.texels().iter().zip(weight.iter()) {
            if !(w.is_finite() && w >= 0.0) || ((w == 0.0) != (t.a == 0.0)) {
                return Err(validation(format!("weight {w} inconsistent with texel {t:?}")));
            }
        }
        Ok(Self { map, weight })
    }

    pub fn map(&self) -> &EnvironmentMap {
        &self.map
    }

    pub fn weight(&self) -> &Grid<f32> {
        &self.weight
    }

    pub fn covered_texels(&self) -> usize {
        self.weight.iter().filter(|&&w| w > 0.0).count()
    }
}

/// The views of every rig camera at one capture instant.
#[derive(Clone, Debug)]
pub struct RigCapture {
    pub frame_index: u32,
    views: Vec<CameraView>,
}

impl RigCapture {
    pub fn new(frame_index: u32, views: Vec<CameraView>) -> Result<Self> {
        if views.is_empty() {
            return Err(validation("a rig capture needs at least one view"));
        }
        Ok(Self { frame_index, views })
    }

    pub fn views(&self) -> &[CameraView] {
        &self.views
    }
}

/// Classifies every target texel by its direction and samples the view along it.
/// The view frame is expected to hold premultiplied color.
pub fn warp_view_to_envmap(view: &CameraView, target: &WarpTarget) -> Result<WarpedLayer> {
    warp_view_to_envmap_with(Exec::default(), view, target)
}

pub fn warp_view_to_envmap_with(exec: Exec, view: &CameraView, target: &WarpTarget) -> Result<WarpedLayer> {
    let shape = target.shape;
    let cells = par::try_fill(exec, shape.width, shape.height, |i, j| {
        if !shape.texel_in_domain(i, j) {
            return Ok((Rgba::TRANSPARENT, 0.0));
        }
        let d = texel_to_dir(TexelCoord::center(i, j, shape.width, shape.height), shape.param)?;
        Ok(match view.sample_view(d) {
            Some(s) if s.a > 0.0 => (s, target.layer_weight * s.a),
            _ => (Rgba::TRANSPARENT, 0.0),
        })
    })?;
    let (texels, weights): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
    let map = EnvironmentMap::new(shape.param, Grid::from_vec(shape.width, shape.height, texels)?)?;
    WarpedLayer::new(map, Grid::from_vec(shape.width, shape.height, weights)?)
}

/// Weighted average of overlapping layers; uncovered texels are transparent black.
pub fn merge_views(layers: &[WarpedLayer]) -> Result<EnvironmentMap> {
    merge_views_with(Exec::default(), layers)
}

pub fn merge_views_with(exec: Exec, layers: &[WarpedLayer]) -> Result<EnvironmentMap> {
    let first = layers.first().ok_or_else(|| validation("merge needs at least one layer"))?;
    let shape = first.map.shape();
    if let Some(bad) = layers.iter().find(|l| l.map.shape() != shape) {
        return Err(validation(format!(
            "layer shape {:?} does not match {:?}",
            bad.map.shape(),
            shape
        )));
    }
    let data = par::fill(exec, shape.width, shape.height, |i, j| {
        let mut acc = [0.0f64; 4];
        let mut total = 0.0f64;
        for layer in layers {
            let w = f64::from(*layer.weight.get(i, j));
            if w == 0.0 {
                continue;
            }
            total += w;
            for (a, c) in acc.iter_mut().zip(layer.map.texel(i, j).channels()) {
                *a += f64::from(c) * w;
            }
        }
        if total == 0.0 {
            return Rgba::TRANSPARENT;
        }
        let [r, g, b, a] = acc.map(|v| (v / total) as f32);
        Rgba::new(r, g, b, a.min(1.0))
    });
    EnvironmentMap::new(shape.param, Grid::from_vec(shape.width, shape.height, data)?)
}

/// Warps and merges every view of a capture.
pub fn build_envmap_with(exec: Exec, capture: &RigCapture, target: &WarpTarget) -> Result<EnvironmentMap> {
    let layers = capture
        .views()
        .iter()
        .map(|v| warp_view_to_envmap_with(exec, v, target))
        .collect::<Result<Vec<_>>>()?;
    merge_views_with(exec, &layers)
}
