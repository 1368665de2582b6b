//! Wavefront OBJ subset: `v`, `vn` and `f` with `v` or `v//vn` (also `v/vt/vn`)
//! references. Polygons are fan-triangulated.

use std::collections::HashMap;
use std::path::Path;

use super::geometry::Mesh;
use crate::error::{Error, Result};
use crate::math::Vec3;

pub fn load_obj(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(crate::error::io_err(path))?;
    parse_obj(&text, path)
}

pub fn parse_obj(text: &str, path: &Path) -> Result<Mesh> {
    let err = |line: usize, msg: &str| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {msg}"),
    };
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut faces: Vec<Vec<(usize, Option<usize>)>> = Vec::new();

    for (n, line) in text.lines().enumerate() {
        let n = n + 1;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => positions.push(parse_vec(&mut it).ok_or_else(|| err(n, "bad vertex"))?),
            Some("vn") => normals.push(parse_vec(&mut it).ok_or_else(|| err(n, "bad normal"))?),
            Some("f") => {
                let refs = it
                    .map(|tok| parse_ref(tok, positions.len(), normals.len()))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| err(n, "bad face reference"))?;
                if refs.len() < 3 {
                    return Err(err(n, "face needs at least 3 vertices"));
                }
                faces.push(refs);
            }
            _ => {}
        }
    }

    // Corners with an explicit normal become (position, normal) vertices; the
    // rest share one vertex per position with an area-weighted normal.
    let mut index: HashMap<(usize, Option<usize>), usize> = HashMap::new();
    let mut verts = Vec::new();
    let mut vert_pos = Vec::new();
    let mut vert_normals: Vec<Option<Vec3>> = Vec::new();
    let mut triangles = Vec::new();
    let mut computed = vec![Vec3::ZERO; positions.len()];

    for face in &faces {
        let ids: Vec<usize> = face
            .iter()
            .map(|&key| {
                *index.entry(key).or_insert_with(|| {
                    verts.push(positions[key.0]);
                    vert_pos.push(key.0);
                    vert_normals.push(key.1.map(|ni| normals[ni]));
                    verts.len() - 1
                })
            })
            .collect();
        for k in 1..ids.len() - 1 {
            let tri = [ids[0], ids[k], ids[k + 1]];
            let (a, b, c) = (face[0], face[k], face[k + 1]);
            let area_n = (positions[b.0] - positions[a.0]).cross(positions[c.0] - positions[a.0]);
            for corner in [a, b, c] {
                if corner.1.is_none() {
                    computed[corner.0] += area_n;
                }
            }
            triangles.push(tri);
        }
    }

    let up = Vec3::new(0.0, 0.0, 1.0);
    let out_normals = vert_normals
        .iter()
        .zip(&vert_pos)
        .map(|(n, &pi)| n.unwrap_or(computed[pi]).try_normalize().unwrap_or(up))
        .collect();
    Mesh::new(verts, out_normals, triangles)
}

fn parse_vec<'a>(it: &mut impl Iterator<Item = &'a str>) -> Option<Vec3> {
    let x = it.next()?.parse().ok()?;
    let y = it.next()?.parse().ok()?;
    let z = it.next()?.parse().ok()?;
    Some(Vec3::new(x, y, z))
}

fn resolve(idx: &str, count: usize) -> Option<usize> {
    let i: i64 = idx.parse().ok()?;
    let i = if i < 0 { count as i64 + i } else { i - 1 };
    (0..count as i64).contains(&i).then_some(i as usize)
}

fn parse_ref(tok: &str, nv: usize, nn: usize) -> Option<(usize, Option<usize>)> {
    let mut parts = tok.split('/');
    let v = resolve(parts.next()?, nv)?;
    let _texcoord = parts.next();
    let n = match parts.next() {
        Some(s) if !s.is_empty() => Some(resolve(s, nn)?),
        _ => None,
    };
    Some((v, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_normals() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 2\nf 1//1 2//1 3//1\n";
        let m = parse_obj(src, Path::new("t.obj")).unwrap();
        assert_eq!(m.triangles().len(), 1);
        assert!(m.normals().iter().all(|n| (*n - Vec3::new(0.0, 0.0, 1.0)).length() < 1e-12));
    }

    #[test]
    fn computed_normals_and_fan() {
        let src = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let m = parse_obj(src, Path::new("q.obj")).unwrap();
        assert_eq!(m.triangles().len(), 2);
        assert_eq!(m.vertices().len(), 4);
        assert!(m.normals().iter().all(|n| (n.z - 1.0).abs() < 1e-12));
    }

    #[test]
    fn negative_indices_and_errors() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n";
        assert_eq!(parse_obj(src, Path::new("n.obj")).unwrap().triangles(), &[[0, 1, 2]]);
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n", Path::new("bad.obj")).is_err());
        assert!(parse_obj("v 0 0\n", Path::new("bad.obj")).is_err());
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nf 1 2\n", Path::new("bad.obj")).is_err());
    }
}
