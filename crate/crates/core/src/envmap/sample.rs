use super::{dir_to_texel, texel_to_dir, EnvironmentMap, MapShape, Parameterization, TexelCoord, UnitDirection};
use crate::error::Result;
use crate::par::{self, Exec};
use crate::raster::{blend, Grid, Rgba};

/// Bilinear lookup of the four texel centers around `d`.
///
/// LatLong wraps horizontally across the seam and clamps vertically. SphereMap
/// clamps on both axes and only blends texels whose centers lie inside the disc.
pub fn sample_bilinear(m: &EnvironmentMap, d: UnitDirection) -> Result<Rgba> {
    let t = dir_to_texel(d, m.param())?;
    Ok(sample_at(m, t))
}

pub(crate) fn sample_at(m: &EnvironmentMap, t: TexelCoord) -> Rgba {
    let (w, h) = (m.width(), m.height());
    let fy = (t.v * h as f64 - 0.5).clamp(0.0, (h - 1) as f64);
    let y0 = fy.floor();
    let ty = fy - y0;
    let y0 = y0 as usize;
    let y1 = (y0 + 1).min(h - 1);

    match m.param() {
        Parameterization::LatLong => {
            let fx = t.u * w as f64 - 0.5;
            let x0f = fx.floor();
            let tx = fx - x0f;
            let x0 = (x0f as i64).rem_euclid(w as i64) as usize;
            let x1 = (x0 + 1) % w;
            blend(
                [
                    (m.texel(x0, y0), (1.0 - tx) * (1.0 - ty)),
                    (m.texel(x1, y0), tx * (1.0 - ty)),
                    (m.texel(x0, y1), (1.0 - tx) * ty),
                    (m.texel(x1, y1), tx * ty),
                ]
                .into_iter(),
            )
        }
        Parameterization::SphereMap => {
            let fx = (t.u * w as f64 - 0.5).clamp(0.0, (w - 1) as f64);
            let x0f = fx.floor();
            let tx = fx - x0f;
            let x0 = x0f as usize;
            let x1 = (x0 + 1).min(w - 1);
            let shape = m.shape();
            let taps = [
                (x0, y0, (1.0 - tx) * (1.0 - ty)),
                (x1, y0, tx * (1.0 - ty)),
                (x0, y1, (1.0 - tx) * ty),
                (x1, y1, tx * ty),
            ];
            let total: f64 = taps
                .iter()
                .filter(|&&(x, y, _)| shape.texel_in_domain(x, y))
                .map(|&(_, _, wt)| wt)
                .sum();
            if total <= 0.0 {
                return nearest_in_domain(m, &taps);
            }
            blend(
                taps.into_iter()
                    .filter(|&(x, y, _)| shape.texel_in_domain(x, y))
                    .map(|(x, y, wt)| (m.texel(x, y), wt / total)),
            )
        }
    }
}

// All in-disc taps carry zero weight: fall back to any in-disc tap.
fn nearest_in_domain(m: &EnvironmentMap, taps: &[(usize, usize, f64)]) -> Rgba {
    let shape = m.shape();
    taps.iter()
        .find(|&&(x, y, _)| shape.texel_in_domain(x, y))
        .map_or(Rgba::TRANSPARENT, |&(x, y, _)| m.texel(x, y))
}

/// Resamples `m` into `target` at `width x height`. Output texels that map to
/// no direction (SphereMap corners) are transparent black.
pub fn convert(
    m: &EnvironmentMap,
    target: Parameterization,
    width: usize,
    height: usize,
) -> Result<EnvironmentMap> {
    convert_with(Exec::default(), m, target, width, height)
}

pub fn convert_with(
    exec: Exec,
    m: &EnvironmentMap,
    target: Parameterization,
    width: usize,
    height: usize,
) -> Result<EnvironmentMap> {
    let shape = MapShape::new(width, height, target)?;
    let data = par::try_fill(exec, width, height, |i, j| {
        if !shape.texel_in_domain(i, j) {
            return Ok(Rgba::TRANSPARENT);
        }
        let d = texel_to_dir(TexelCoord::center(i, j, width, height), target)?;
        sample_bilinear(m, d)
    })?;
    EnvironmentMap::new(target, Grid::from_vec(width, height, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn latlong(w: usize, h: usize, f: impl Fn(usize, usize) -> Rgba) -> EnvironmentMap {
        let data = (0..h).flat_map(|j| (0..w).map(move |i| (i, j))).map(|(i, j)| f(i, j)).collect();
        EnvironmentMap::new(Parameterization::LatLong, Grid::from_vec(w, h, data).unwrap()).unwrap()
    }

    fn gradient(d: UnitDirection) -> Rgba {
        Rgba::opaque(
            (0.5 + 0.25 * d.x()) as f32,
            (0.5 + 0.25 * d.y()) as f32,
            (0.5 + 0.25 * d.z()) as f32,
        )
    }

    #[test]
    fn constant_map_samples_constant() {
        let c = Rgba::new(0.3, 0.6, 0.9, 0.7);
        let m = latlong(16, 8, |_, _| c);
        for d in [(1.0, 2.0, 3.0), (0.0, 1.0, 0.0), (-1.0, -0.2, 0.01)] {
            let d = UnitDirection::new(d.0, d.1, d.2).unwrap();
            assert_eq!(sample_bilinear(&m, d).unwrap(), c);
        }
    }

    #[test]
    fn texel_center_and_midpoint() {
        let m = latlong(8, 4, |i, j| Rgba::opaque(i as f32, j as f32, 0.0));
        let center = texel_to_dir(TexelCoord::center(2, 1, 8, 4), Parameterization::LatLong).unwrap();
        let s = sample_bilinear(&m, center).unwrap();
        assert!((s.r - 2.0).abs() < 1e-6 && (s.g - 1.0).abs() < 1e-6);

        let mid = texel_to_dir(TexelCoord::new(3.0 / 8.0, 1.5 / 4.0), Parameterization::LatLong).unwrap();
        let s = sample_bilinear(&m, mid).unwrap();
        assert!((s.r - 2.5).abs() < 1e-6 && (s.g - 1.0).abs() < 1e-6);
    }

    #[test]
    fn seam_wraps() {
        let m = latlong(8, 4, |i, _| Rgba::opaque(if i == 0 { 1.0 } else if i == 7 { 3.0 } else { 0.0 }, 0.0, 0.0));
        // u = 0 is halfway between texel 7 and texel 0
        let s = sample_at(&m, TexelCoord::new(0.0, 0.5));
        assert!((s.r - 2.0).abs() < 1e-6);
    }

    #[test]
    fn seam_is_continuous() {
        let m = EnvironmentMap::from_fn(MapShape::new(64, 32, Parameterization::LatLong).unwrap(), gradient).unwrap();
        let eps = 1e-6;
        let a = sample_at(&m, TexelCoord::new(1.0 - eps, 0.4));
        let b = sample_at(&m, TexelCoord::new(eps, 0.4));
        for (x, y) in a.channels().iter().zip(b.channels()) {
            assert!((x - y).abs() < 1e-4);
        }
    }

    #[test]
    fn constant_conversion_is_exact() {
        let c = Rgba::new(0.1, 0.2, 0.3, 1.0);
        let m = latlong(32, 16, |_, _| c);
        let s = convert(&m, Parameterization::SphereMap, 24, 24).unwrap();
        let shape = s.shape();
        for j in 0..24 {
            for i in 0..24 {
                let want = if shape.texel_in_domain(i, j) { c } else { Rgba::TRANSPARENT };
                assert_eq!(s.texel(i, j), want);
            }
        }
        let back = convert(&s, Parameterization::LatLong, 20, 10).unwrap();
        assert!(back.texels().iter().all(|&t| t == c));
    }

    #[test]
    fn identity_conversion_reproduces_texels() {
        for (p, w, h) in [(Parameterization::LatLong, 64, 32), (Parameterization::SphereMap, 48, 48)] {
            let shape = MapShape::new(w, h, p).unwrap();
            let m = EnvironmentMap::from_fn(shape, gradient).unwrap();
            let out = convert(&m, p, w, h).unwrap();
            for (a, b) in m.texels().iter().zip(out.texels().iter()) {
                for (x, y) in a.channels().iter().zip(b.channels()) {
                    assert!((x - y).abs() <= 1e-6, "{a:?} vs {b:?}");
                }
            }
        }
    }

    fn max_channel_error(a: &EnvironmentMap, b: &EnvironmentMap, keep: impl Fn(UnitDirection) -> bool) -> f32 {
        let mut worst = 0.0f32;
        for j in 0..a.height() {
            for i in 0..a.width() {
                let d = texel_to_dir(TexelCoord::center(i, j, a.width(), a.height()), a.param()).unwrap();
                if !keep(d) {
                    continue;
                }
                for (x, y) in a.texel(i, j).channels().iter().zip(b.texel(i, j).channels()) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        worst
    }

    #[test]
    fn spheremap_round_trip_of_front_back_gradient() {
        let ramp = |d: UnitDirection| {
            let t = (0.5 + 0.5 * d.z()) as f32;
            Rgba::opaque(t, 1.0 - t, 0.5 * t)
        };
        let truth = EnvironmentMap::from_fn(MapShape::new(256, 128, Parameterization::LatLong).unwrap(), ramp).unwrap();
        let sphere = convert(&truth, Parameterization::SphereMap, 256, 256).unwrap();
        let back = convert(&sphere, Parameterization::LatLong, 256, 128).unwrap();
        let err = max_channel_error(&truth, &back, |_| true);
        assert!(err < 0.02, "max error {err}");
    }

    #[test]
    fn spheremap_round_trip_of_rgb_gradient_away_from_singularity() {
        // Everything within ~10 degrees of (0,0,-1) folds into the outermost half texel of the disc.
        let truth = EnvironmentMap::from_fn(MapShape::new(256, 128, Parameterization::LatLong).unwrap(), gradient).unwrap();
        let sphere = EnvironmentMap::from_fn(MapShape::new(256, 256, Parameterization::SphereMap).unwrap(), gradient).unwrap();
        let back = convert(&sphere, Parameterization::LatLong, 256, 128).unwrap();
        let err = max_channel_error(&truth, &back, |d| d.angle_to(UnitDirection::FORWARD) > 15f64.to_radians());
        assert!(err < 0.02, "max error {err}");
    }

    #[test]
    fn bilinear_output_within_tap_range() {
        let m = latlong(16, 8, |i, j| Rgba::opaque(((i * 7 + j * 3) % 5) as f32, 0.0, 0.0));
        for k in 0..500 {
            let u = (k as f64 * 0.618_033_988_7).fract();
            let v = (k as f64 * 0.414_213_562_3).fract();
            let s = sample_at(&m, TexelCoord::new(u, v));
            assert!((0.0..=4.0 + 1e-6).contains(&s.r));
        }
    }
}
