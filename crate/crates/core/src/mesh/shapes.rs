//! Procedural test shapes.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::TriMesh;
use crate::geometry::{Pt3, Vec3};

/// Axis-aligned `[0,1]^3` cube, 8 vertices and 12 triangles.
pub fn unit_cube() -> TriMesh {
    cuboid(Pt3::new(0.5, 0.5, 0.5), Vec3::new(1.0, 1.0, 1.0))
}

/// Axis-aligned box with the given center and full side lengths.
pub fn cuboid(center: Pt3, size: Vec3) -> TriMesh {
    let h = size / 2.0;
    let v: Vec<Pt3> = (0..8)
        .map(|i| {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            center + Vec3::new(sx * h.x, sy * h.y, sz * h.z)
        })
        .collect();
    let t = vec![
        [0, 2, 3],
        [0, 3, 1], // -z
        [4, 5, 7],
        [4, 7, 6], // +z
        [0, 1, 5],
        [0, 5, 4], // -y
        [2, 6, 7],
        [2, 7, 3], // +y
        [0, 4, 6],
        [0, 6, 2], // -x
        [1, 3, 7],
        [1, 7, 5], // +x
    ];
    TriMesh::new(v, t).expect("valid cuboid")
}

/// Box whose faces are split into an `n x n` grid per face (closed, manifold).
pub fn subdivided_cuboid(center: Pt3, size: Vec3, n: usize) -> TriMesh {
    let n = n.max(1);
    let mut verts: Vec<Pt3> = Vec::new();
    let mut index: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut tris = Vec::new();
    let h = size / 2.0;
    let mut vid = |c: [i64; 3], verts: &mut Vec<Pt3>| -> usize {
        *index.entry((c[0], c[1], c[2])).or_insert_with(|| {
            let p = center
                + Vec3::new(
                    (c[0] as f64 / n as f64 * 2.0 - 1.0) * h.x,
                    (c[1] as f64 / n as f64 * 2.0 - 1.0) * h.y,
                    (c[2] as f64 / n as f64 * 2.0 - 1.0) * h.z,
                );
            verts.push(p);
            verts.len() - 1
        })
    };
    let n_i = n as i64;
    for axis in 0..3 {
        for side in [0, n_i] {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            for i in 0..n_i {
                for j in 0..n_i {
                    let corner = |di: i64, dj: i64| {
                        let mut c = [0i64; 3];
                        c[axis] = side;
                        c[u] = i + di;
                        c[v] = j + dj;
                        c
                    };
                    let a = vid(corner(0, 0), &mut verts);
                    let b = vid(corner(1, 0), &mut verts);
                    let c = vid(corner(1, 1), &mut verts);
                    let d = vid(corner(0, 1), &mut verts);
                    tris.push([a, b, c]);
                    tris.push([a, c, d]);
                }
            }
        }
    }
    let fixed: Vec<[usize; 3]> = tris
        .iter()
        .map(|&[a, b, c]| {
            let normal = (verts[b] - verts[a]).cross(&(verts[c] - verts[a]));
            let outward = verts[a] - center;
            if normal.dot(&outward) < 0.0 {
                [a, c, b]
            } else {
                [a, b, c]
            }
        })
        .collect();
    TriMesh::new(verts, fixed).expect("valid box")
}

/// Icosphere obtained by `subdivisions` rounds of 4-way triangle splitting.
pub fn icosphere(radius: f64, subdivisions: usize) -> TriMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) / 2.0).normalize());
                verts.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts.into_iter().map(|v| Pt3::from(v * radius)).collect();
    TriMesh::new(verts, faces).expect("valid icosphere")
}

/// Closed cylinder along z, centered at the origin, with flat end caps.
pub fn cylinder(radius: f64, height: f64, segments: usize) -> TriMesh {
    let mut verts = Vec::with_capacity(2 * segments + 2);
    for k in 0..segments {
        let a = 2.0 * PI * k as f64 / segments as f64;
        verts.push(Pt3::new(radius * a.cos(), radius * a.sin(), -height / 2.0));
        verts.push(Pt3::new(radius * a.cos(), radius * a.sin(), height / 2.0));
    }
    let bottom = verts.len();
    verts.push(Pt3::new(0.0, 0.0, -height / 2.0));
    let top = verts.len();
    verts.push(Pt3::new(0.0, 0.0, height / 2.0));
    let mut tris = Vec::with_capacity(4 * segments);
    for k in 0..segments {
        let b0 = 2 * k;
        let t0 = 2 * k + 1;
        let b1 = 2 * ((k + 1) % segments);
        let t1 = b1 + 1;
        tris.push([b0, b1, t1]);
        tris.push([b0, t1, t0]);
        tris.push([bottom, b1, b0]);
        tris.push([top, t0, t1]);
    }
    TriMesh::new(verts, tris).expect("valid cylinder")
}
