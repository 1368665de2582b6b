#![allow(dead_code)]

use std::path::Path;

use embedmap::envmap::{EnvironmentMap, UnitDirection};
use embedmap::math::Vec3;
use embedmap::synthetic::{SyntheticRig, SyntheticRigSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction on the sphere (Archimedes' projection).
pub fn random_direction(rng: &mut impl Rng) -> UnitDirection {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    UnitDirection::new(r * phi.cos(), r * phi.sin(), z).unwrap()
}

/// PSNR in dB over RGB with peak 1, skipping `skip_rows` rows at the top and bottom.
pub fn psnr(a: &EnvironmentMap, b: &EnvironmentMap, skip_rows: usize) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut sum = 0.0f64;
    let mut n = 0usize;
    for j in skip_rows..a.height() - skip_rows {
        for i in 0..a.width() {
            let (p, q) = (a.texel(i, j), b.texel(i, j));
            for (x, y) in [(p.r, q.r), (p.g, q.g), (p.b, q.b)] {
                let d = f64::from(x) - f64::from(y);
                sum += d * d;
                n += 1;
            }
        }
    }
    let mse = sum / n as f64;
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (1.0 / mse).log10()
}

pub fn write_rig(dir: &Path, spec: SyntheticRigSpec) -> SyntheticRig {
    let rig = SyntheticRig::new(spec).unwrap();
    rig.write(dir).unwrap();
    rig
}

/// Mirror-sphere reflection oracle, written from scratch: returns the reflected
/// direction for the ray through pixel `(px, py)` of a pinhole camera at `eye`
/// looking down `-z` with focal length `f` and principal point `(c, c)`.
pub fn mirror_sphere_reflection(eye: [f64; 3], f: f64, c: f64, px: f64, py: f64, center: [f64; 3], radius: f64) -> Option<[f64; 3]> {
    let mut d = [(px - c) / f, -(py - c) / f, -1.0];
    let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    d.iter_mut().for_each(|v| *v /= len);
    // closest approach of the ray to the center
    let oc = [center[0] - eye[0], center[1] - eye[1], center[2] - eye[2]];
    let t_mid = oc[0] * d[0] + oc[1] * d[1] + oc[2] * d[2];
    let miss2 = oc.iter().map(|v| v * v).sum::<f64>() - t_mid * t_mid;
    if miss2 > radius * radius || t_mid <= 0.0 {
        return None;
    }
    let t = t_mid - (radius * radius - miss2).sqrt();
    let hit = [eye[0] + t * d[0], eye[1] + t * d[1], eye[2] + t * d[2]];
    let n = [(hit[0] - center[0]) / radius, (hit[1] - center[1]) / radius, (hit[2] - center[2]) / radius];
    let dn = d[0] * n[0] + d[1] * n[1] + d[2] * n[2];
    Some([d[0] - 2.0 * dn * n[0], d[1] - 2.0 * dn * n[1], d[2] - 2.0 * dn * n[2]])
}

pub fn angle_between(a: [f64; 3], b: Vec3) -> f64 {
    let a = Vec3::from_array(a);
    a.cross(b).length().atan2(a.dot(b))
}

/// Fraction of a pixel's 8x8 subsamples whose reflection lands inside the disc.
#[allow(clippy::too_many_arguments)]
pub fn predicted_disc_coverage(
    eye: [f64; 3],
    f: f64,
    c: f64,
    size: usize,
    center: [f64; 3],
    radius: f64,
    disc_dir: Vec3,
    disc_radius: f64,
) -> Vec<f64> {
    let sub = 8;
    let mut out = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let mut inside = 0;
            for sy in 0..sub {
                for sx in 0..sub {
                    let px = x as f64 + (sx as f64 + 0.5) / sub as f64;
                    let py = y as f64 + (sy as f64 + 0.5) / sub as f64;
                    if let Some(r) = mirror_sphere_reflection(eye, f, c, px, py, center, radius) {
                        if angle_between(r, disc_dir) <= disc_radius {
                            inside += 1;
                        }
                    }
                }
            }
            out.push(f64::from(inside) / f64::from(sub * sub));
        }
    }
    out
}

pub fn iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Every regular file under `dir`, relative path -> bytes.
pub fn snapshot(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            out.insert(entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path()).unwrap());
        }
    }
    out
}
