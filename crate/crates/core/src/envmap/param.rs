use std::f64::consts::PI;

use super::{Parameterization, TexelCoord, UnitDirection};
use crate::error::{Error, Result};
use crate::math::Vec3;

// Slack on the disc boundary so texel_to_dir accepts its own rim outputs after rounding.
const DISC_EPS: f64 = 1e-12;

pub(crate) fn in_disc(u: f64, v: f64) -> bool {
    let (a, b) = (u - 0.5, v - 0.5);
    a * a + b * b <= 0.25 + DISC_EPS
}

/// Texture coordinate of direction `d`.
///
/// LatLong: `u = 0.5 + atan2(x, -z) / 2pi`, `v = acos(y) / pi`; the forward
/// direction `-z` is the map center and at the poles `u` is reported as 0.5.
///
/// SphereMap: `m = 2 sqrt(x^2 + y^2 + (z + 1)^2)`, `u = x/m + 0.5`, `v = y/m + 0.5`;
/// `(0, 0, -1)` has no image and is rejected.
pub fn dir_to_texel(d: UnitDirection, p: Parameterization) -> Result<TexelCoord> {
    let Vec3 { x, y, z } = d.vec();
    match p {
        Parameterization::LatLong => {
            let v = y.clamp(-1.0, 1.0).acos() / PI;
            if (x == 0.0 && z == 0.0) || v == 0.0 || v == 1.0 {
                return Ok(TexelCoord::new(0.5, v));
            }
            let mut u = 0.5 + x.atan2(-z) / (2.0 * PI);
            if u >= 1.0 {
                u -= 1.0;
            }
            Ok(TexelCoord::new(u, v))
        }
        Parameterization::SphereMap => {
            let m = 2.0 * (x * x + y * y + (z + 1.0) * (z + 1.0)).sqrt();
            if m == 0.0 {
                return Err(Error::Singularity([x, y, z]));
            }
            Ok(TexelCoord::new(x / m + 0.5, y / m + 0.5))
        }
    }
}

/// Inverse of [`dir_to_texel`]. LatLong wraps `u` and clamps `v`; SphereMap
/// rejects coordinates outside the inscribed disc.
pub fn texel_to_dir(t: TexelCoord, p: Parameterization) -> Result<UnitDirection> {
    if !t.u.is_finite() || !t.v.is_finite() {
        return Err(Error::OutOfDomain { u: t.u, v: t.v });
    }
    match p {
        Parameterization::LatLong => {
            let u = t.u.rem_euclid(1.0);
            let theta = t.v.clamp(0.0, 1.0) * PI;
            let phi = (u - 0.5) * 2.0 * PI;
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            UnitDirection::new(st * sp, ct, -st * cp)
        }
        Parameterization::SphereMap => {
            if !in_disc(t.u, t.v) {
                return Err(Error::OutOfDomain { u: t.u, v: t.v });
            }
            // Surface normal of the mirrored sphere, then reflect the +z view ray.
            let nx = 2.0 * (t.u - 0.5);
            let ny = 2.0 * (t.v - 0.5);
            let nz = (1.0 - nx * nx - ny * ny).max(0.0).sqrt();
            UnitDirection::new(2.0 * nz * nx, 2.0 * nz * ny, 2.0 * nz * nz - 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dir(x: f64, y: f64, z: f64) -> UnitDirection {
        UnitDirection::new(x, y, z).unwrap()
    }

    #[test]
    fn latlong_examples() {
        let t = dir_to_texel(dir(0.0, 0.0, -1.0), Parameterization::LatLong).unwrap();
        assert_eq!((t.u, t.v), (0.5, 0.5));
        let t = dir_to_texel(dir(0.0, 1.0, 0.0), Parameterization::LatLong).unwrap();
        assert_eq!((t.u, t.v), (0.5, 0.0));
        let t = dir_to_texel(dir(0.0, -1.0, 0.0), Parameterization::LatLong).unwrap();
        assert_eq!((t.u, t.v), (0.5, 1.0));
        // atan2(1, 0) = pi/2, acos(0) = pi/2
        let t = dir_to_texel(dir(1.0, 0.0, 0.0), Parameterization::LatLong).unwrap();
        assert!((t.u - 0.75).abs() < 1e-15 && (t.v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn latlong_backward_direction_wraps_into_range() {
        let t = dir_to_texel(dir(0.0, 0.0, 1.0), Parameterization::LatLong).unwrap();
        assert!((0.0..1.0).contains(&t.u));
        let t = dir_to_texel(dir(-0.0, 0.0, 1.0), Parameterization::LatLong).unwrap();
        assert!((0.0..1.0).contains(&t.u));
    }

    #[test]
    fn spheremap_examples() {
        let t = dir_to_texel(dir(0.0, 0.0, 1.0), Parameterization::SphereMap).unwrap();
        assert_eq!((t.u, t.v), (0.5, 0.5));
        let t = dir_to_texel(dir(1.0, 0.0, 0.0), Parameterization::SphereMap).unwrap();
        let want = 0.5 + 2f64.sqrt() / 4.0;
        assert!((t.u - want).abs() < 1e-15);
        assert!((t.u - 0.85355).abs() < 1e-5);
        assert_eq!(t.v, 0.5);
    }

    #[test]
    fn spheremap_singularity() {
        let err = dir_to_texel(dir(0.0, 0.0, -1.0), Parameterization::SphereMap);
        assert!(matches!(err, Err(Error::Singularity(_))));
    }

    #[test]
    fn inverse_examples() {
        let d = texel_to_dir(TexelCoord::new(0.5, 0.5), Parameterization::LatLong).unwrap();
        assert!(d.angle_to(dir(0.0, 0.0, -1.0)) < 1e-12);
        let d = texel_to_dir(TexelCoord::new(0.75, 0.5), Parameterization::LatLong).unwrap();
        assert!(d.angle_to(dir(1.0, 0.0, 0.0)) < 1e-12);
        let d = texel_to_dir(TexelCoord::new(0.5, 0.5), Parameterization::SphereMap).unwrap();
        assert!(d.angle_to(dir(0.0, 0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn spheremap_outside_disc_rejected() {
        let err = texel_to_dir(TexelCoord::new(0.0, 0.0), Parameterization::SphereMap);
        assert!(matches!(err, Err(Error::OutOfDomain { .. })));
        assert!(texel_to_dir(TexelCoord::new(f64::NAN, 0.5), Parameterization::LatLong).is_err());
    }

    fn direction() -> impl Strategy<Value = UnitDirection> {
        (-1.0f64..1.0, 0.0f64..(2.0 * PI)).prop_map(|(z, phi)| {
            let r = (1.0 - z * z).sqrt();
            dir(r * phi.cos(), r * phi.sin(), z)
        })
    }

    proptest! {
        #[test]
        fn outputs_lie_in_domain(d in direction()) {
            let t = dir_to_texel(d, Parameterization::LatLong).unwrap();
            prop_assert!((0.0..1.0).contains(&t.u) && (0.0..=1.0).contains(&t.v));
            if let Ok(t) = dir_to_texel(d, Parameterization::SphereMap) {
                prop_assert!(in_disc(t.u, t.v));
            }
        }

        #[test]
        fn texel_round_trip(u in 0.0f64..1.0, v in 0.001f64..0.999) {
            for p in [Parameterization::LatLong, Parameterization::SphereMap] {
                if p == Parameterization::SphereMap && !in_disc(u, v) {
                    continue;
                }
                // stay off the rim where the map is singular
                if p == Parameterization::SphereMap && (u - 0.5).powi(2) + (v - 0.5).powi(2) > 0.24 {
                    continue;
                }
                let t = dir_to_texel(texel_to_dir(TexelCoord::new(u, v), p).unwrap(), p).unwrap();
                prop_assert!((t.u - u).abs() < 1e-5 && (t.v - v).abs() < 1e-5);
            }
        }
    }
}
