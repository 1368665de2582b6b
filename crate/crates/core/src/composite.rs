//! Premultiplied "over" compositing of the user layer onto the background map.

use crate::envmap::EnvironmentMap;
use crate::error::{validation, Result};
use crate::par::{self, Exec};
use crate::raster::{Grid, Rgba};

/// `out = fg + (1 - fg.a) * bg`, per channel including alpha.
pub fn over(fg: Rgba, bg: Rgba) -> Rgba {
    let k = 1.0 - f64::from(fg.a);
    let blend = |f: f32, b: f32| (f64::from(f) + k * f64::from(b)) as f32;
    Rgba::new(blend(fg.r, bg.r), blend(fg.g, bg.g), blend(fg.b, bg.b), blend(fg.a, bg.a).min(1.0))
}

/// Composites a premultiplied `user` map over `background`.
pub fn composite_over(user: &EnvironmentMap, background: &EnvironmentMap) -> Result<EnvironmentMap> {
    composite_over_with(Exec::default(), user, background)
}

pub fn composite_over_with(exec: Exec, user: &EnvironmentMap, background: &EnvironmentMap) -> Result<EnvironmentMap> {
    if user.shape() != background.shape() {
        return Err(validation(format!(
            "user map {:?} and background {:?} differ",
            user.shape(),
            background.shape()
        )));
    }
    let (w, h) = (user.width(), user.height());
    let data = par::fill(exec, w, h, |i, j| over(user.texel(i, j), background.texel(i, j)));
    EnvironmentMap::new(user.param(), Grid::from_vec(w, h, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmap::{MapShape, Parameterization};

    #[test]
    fn over_spot_value() {
        let out = over(Rgba::new(0.5, 0.0, 0.0, 0.5), Rgba::new(0.0, 0.4, 0.0, 1.0));
        assert_eq!(out, Rgba::new(0.5, 0.2, 0.0, 1.0));
    }

    #[test]
    fn identity_and_absorption() {
        let shape = MapShape::new(8, 4, Parameterization::LatLong).unwrap();
        let bg = EnvironmentMap::from_fn(shape, |d| Rgba::opaque(d.x().abs() as f32, 0.3, 0.1)).unwrap();
        let clear = EnvironmentMap::filled(shape, Rgba::TRANSPARENT).unwrap();
        let solid = EnvironmentMap::filled(shape, Rgba::new(0.9, 0.1, 0.2, 1.0)).unwrap();
        assert_eq!(composite_over(&clear, &bg).unwrap(), bg);
        assert_eq!(composite_over(&solid, &bg).unwrap(), solid);
    }

    #[test]
    fn mismatch_rejected() {
        let a = EnvironmentMap::filled(MapShape::new(8, 4, Parameterization::LatLong).unwrap(), Rgba::TRANSPARENT).unwrap();
        let b = EnvironmentMap::filled(MapShape::new(4, 4, Parameterization::SphereMap).unwrap(), Rgba::TRANSPARENT).unwrap();
        assert!(composite_over(&a, &b).is_err());
    }
}
