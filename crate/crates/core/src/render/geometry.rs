use crate::envmap::UnitDirection;
use crate::error::{validation, Result};
use crate::math::Vec3;

const T_MIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || !center.is_finite() {
            return Err(validation(format!("sphere needs a finite center and radius > 0, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<(f64, Vec3)> {
        let oc = origin - self.center;
        let b = oc.dot(dir);
        let c = oc.length_squared() - self.radius * self.radius;
        let disc = b * b - c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let t = [-b - sq, -b + sq].into_iter().find(|&t| t > T_MIN)?;
        let p = origin + dir * t;
        Some((t, (p - self.center) / self.radius))
    }
}

/// Indexed triangle mesh with unit per-vertex normals.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    normals: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, normals: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if normals.len() != vertices.len() {
            return Err(validation("mesh needs exactly one normal per vertex"));
        }
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= vertices.len())) {
            return Err(validation(format!("triangle {t:?} indexes past {} vertices", vertices.len())));
        }
        if let Some(n) = normals.iter().find(|n| !((n.length() - 1.0).abs() <= 1e-4)) {
            return Err(validation(format!("vertex normal {n:?} is not unit length")));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(validation("mesh vertices must be finite"));
        }
        Ok(Self { vertices, normals, triangles })
    }

    /// Mesh whose vertex normals are the area-weighted sum of adjacent face normals.
    pub fn with_computed_normals(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= vertices.len())) {
            return Err(validation(format!("triangle {t:?} indexes past {} vertices", vertices.len())));
        }
        let mut acc = vec![Vec3::ZERO; vertices.len()];
        for &[a, b, c] in &triangles {
            // cross product length is twice the area
            let n = (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]);
            for i in [a, b, c] {
                acc[i] += n;
            }
        }
        let normals = acc
            .into_iter()
            .map(|n| n.try_normalize().unwrap_or(Vec3::new(0.0, 0.0, 1.0)))
            .collect();
        Self::new(vertices, normals, triangles)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<(f64, Vec3)> {
        let mut best: Option<(f64, Vec3)> = None;
        for &[a, b, c] in &self.triangles {
            let Some((t, u, v)) = intersect_triangle(origin, dir, self.vertices[a], self.vertices[b], self.vertices[c]) else {
                continue;
            };
            if best.is_some_and(|(bt, _)| bt <= t) {
                continue;
            }
            let n = self.normals[a] * (1.0 - u - v) + self.normals[b] * u + self.normals[c] * v;
            best = Some((t, n));
        }
        best
    }
}

/// Moller-Trumbore; returns `(t, u, v)` with barycentrics of vertices 1 and 2.
fn intersect_triangle(origin: Vec3, dir: Vec3, p0: Vec3, p1: Vec3, p2: Vec3) -> Option<(f64, f64, f64)> {
    let e1 = p1 - p0;
    let e2 = p2 - p0;
    let pv = dir.cross(e2);
    let det = e1.dot(pv);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let tv = origin - p0;
    let u = tv.dot(pv) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qv = tv.cross(e1);
    let v = dir.dot(qv) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(qv) * inv;
    (t > T_MIN).then_some((t, u, v))
}

#[derive(Clone, Debug, PartialEq)]
pub enum SceneObject {
    Sphere(Sphere),
    Mesh(Mesh),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub point: Vec3,
    /// Unit normal facing the ray origin.
    pub normal: UnitDirection,
    pub object: usize,
    pub distance: f64,
}

/// Nearest intersection with positive distance along a unit-direction ray.
pub fn intersect(objects: &[SceneObject], origin: Vec3, dir: UnitDirection) -> Option<Hit> {
    let d = dir.vec();
    let mut best: Option<(f64, Vec3, usize)> = None;
    for (id, obj) in objects.iter().enumerate() {
        let hit = match obj {
            SceneObject::Sphere(s) => s.intersect(origin, d),
            SceneObject::Mesh(m) => m.intersect(origin, d),
        };
        if let Some((t, n)) = hit {
            if best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, n, id));
            }
        }
    }
    let (t, n, object) = best?;
    let n = if n.dot(d) > 0.0 { -n } else { n };
    let normal = UnitDirection::from_vec(n).ok()?;
    Some(Hit {
        point: origin + d * t,
        normal,
        object,
        distance: t,
    })
}
