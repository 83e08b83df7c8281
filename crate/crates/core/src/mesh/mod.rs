//! Triangle surface meshes and the geometric queries built on them.

mod bvh;
mod io;
pub mod shapes;

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Pt3, Vec3};
use crate::rng::seeded;
use bvh::Bvh;

pub use io::{load_mesh, write_obj};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("failed to parse mesh: {0}")]
    Parse(String),
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("triangle {triangle} references vertex {index} but the mesh has {count} vertices")]
    BadIndex {
        triangle: usize,
        index: usize,
        count: usize,
    },
    #[error("mesh has zero surface area")]
    ZeroArea,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A ray with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Pt3,
    pub direction: Vec3,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Pt3, direction: Vec3) -> Self {
        Ray {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn at(&self, t: f64) -> Pt3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub triangle: usize,
    /// Geometric (outward) normal of the hit triangle.
    pub normal: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSample {
    pub point: Pt3,
    pub normal: Vec3,
    pub triangle_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoint {
    pub point: Pt3,
    pub triangle: usize,
    pub distance: f64,
    /// Barycentric weights of `point` with respect to the triangle's vertices.
    pub barycentric: [f64; 3],
}

/// Watertight triangle surface of an object, in meters.
///
/// Immutable after construction. Winding is made outward-facing (positive
/// enclosed volume) when the mesh is built.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Pt3>,
    triangles: Vec<[usize; 3]>,
    vertex_normals: Vec<Vec3>,
    face_normals: Vec<Vec3>,
    face_areas: Vec<f64>,
    area: f64,
    center_of_mass: Pt3,
    mass: f64,
    stiffness: Option<Vec<f64>>,
    non_manifold: bool,
    bvh: Bvh,
}

impl TriMesh {
    pub fn new(vertices: Vec<Pt3>, mut triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &index in tri {
                if index >= vertices.len() {
                    return Err(MeshError::BadIndex {
                        triangle: t,
                        index,
                        count: vertices.len(),
                    });
                }
            }
        }

        // Orient outward: signed volume must be positive.
        let volume: f64 = triangles
            .iter()
            .map(|&[a, b, c]| {
                vertices[a]
                    .coords
                    .dot(&vertices[b].coords.cross(&vertices[c].coords))
            })
            .sum();
        if volume < 0.0 {
            for tri in &mut triangles {
                tri.swap(1, 2);
            }
        }

        let mut face_normals = Vec::with_capacity(triangles.len());
        let mut face_areas = Vec::with_capacity(triangles.len());
        for &[a, b, c] in &triangles {
            let n = (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a]));
            let len = n.norm();
            face_areas.push(0.5 * len);
            face_normals.push(if len > 0.0 { n / len } else { Vec3::zeros() });
        }
        let area: f64 = face_areas.iter().sum();
        if !(area > 0.0) {
            return Err(MeshError::ZeroArea);
        }

        let mut vertex_normals = vec![Vec3::zeros(); vertices.len()];
        for (t, &[a, b, c]) in triangles.iter().enumerate() {
            let w = face_normals[t] * face_areas[t];
            vertex_normals[a] += w;
            vertex_normals[b] += w;
            vertex_normals[c] += w;
        }
        for n in &mut vertex_normals {
            *n = n.try_normalize(1e-300).unwrap_or_else(Vec3::z);
        }

        let mut com = Vec3::zeros();
        for (t, &[a, b, c]) in triangles.iter().enumerate() {
            let centroid = (vertices[a].coords + vertices[b].coords + vertices[c].coords) / 3.0;
            com += centroid * face_areas[t];
        }
        let center_of_mass = Pt3::from(com / area);

        let mut edge_use: HashMap<(usize, usize), u32> = HashMap::new();
        for &[a, b, c] in &triangles {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                *edge_use.entry((u.min(v), u.max(v))).or_default() += 1;
            }
        }
        let non_manifold = edge_use.values().any(|&n| n != 2);
        if non_manifold {
            log::warn!("mesh is not a closed 2-manifold");
        }

        let bvh = Bvh::build(&vertices, &triangles);
        Ok(TriMesh {
            vertices,
            triangles,
            vertex_normals,
            face_normals,
            face_areas,
            area,
            center_of_mass,
            mass: 1.0,
            stiffness: None,
            non_manifold,
            bvh,
        })
    }

    /// Returns the mesh with every vertex multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> Result<Self, MeshError> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| Pt3::from(v.coords * scale))
            .collect();
        let mut m = TriMesh::new(vertices, self.triangles.clone())?;
        m.mass = self.mass;
        m.stiffness = self.stiffness.clone();
        Ok(m)
    }

    /// Applies a rigid transform to every vertex.
    pub fn transformed(&self, pose: &crate::geometry::Pose) -> Result<Self, MeshError> {
        let vertices = self.vertices.iter().map(|v| pose * v).collect();
        let mut m = TriMesh::new(vertices, self.triangles.clone())?;
        m.mass = self.mass;
        m.stiffness = self.stiffness.clone();
        Ok(m)
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    /// Overrides the thin-shell center of mass.
    pub fn with_center_of_mass(mut self, com: Pt3) -> Self {
        self.center_of_mass = com;
        self
    }

    /// Attaches a per-vertex stiffness channel (N/m). Length must match the vertex count.
    pub fn with_stiffness(mut self, stiffness: Vec<f64>) -> Self {
        assert_eq!(stiffness.len(), self.vertices.len());
        self.stiffness = Some(stiffness);
        self
    }

    pub fn vertices(&self) -> &[Pt3] {
        &self.vertices
    }
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
    pub fn vertex_normals(&self) -> &[Vec3] {
        &self.vertex_normals
    }
    pub fn face_normal(&self, t: usize) -> Vec3 {
        self.face_normals[t]
    }
    pub fn face_area(&self, t: usize) -> f64 {
        self.face_areas[t]
    }
    pub fn area(&self) -> f64 {
        self.area
    }
    pub fn center_of_mass(&self) -> Pt3 {
        self.center_of_mass
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn stiffness(&self) -> Option<&[f64]> {
        self.stiffness.as_deref()
    }
    /// True when some edge is not shared by exactly two triangles.
    pub fn is_non_manifold(&self) -> bool {
        self.non_manifold
    }

    pub fn triangle_points(&self, t: usize) -> [Pt3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> (Pt3, Pt3) {
        let mut lo = Pt3::from(Vec3::repeat(f64::INFINITY));
        let mut hi = Pt3::from(Vec3::repeat(f64::NEG_INFINITY));
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Radius of the sphere centered at the center of mass enclosing every vertex.
    pub fn bounding_radius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v - self.center_of_mass).norm())
            .fold(0.0, f64::max)
    }

    /// Nearest intersection at positive distance. Back faces count.
    pub fn raycast(&self, ray: &Ray) -> Option<RayHit> {
        self.bvh
            .raycast(ray, |t| self.intersect(t, ray))
            .map(|(d, t)| self.hit(t, d))
    }

    /// Every intersection along the ray, sorted by distance.
    pub fn raycast_all(&self, ray: &Ray) -> Vec<RayHit> {
        let mut hits: Vec<RayHit> = (0..self.triangles.len())
            .filter_map(|t| self.intersect(t, ray).map(|d| self.hit(t, d)))
            .collect();
        hits.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        hits
    }

    fn hit(&self, triangle: usize, distance: f64) -> RayHit {
        RayHit {
            distance,
            triangle,
            normal: self.face_normals[triangle],
        }
    }

    /// Möller–Trumbore test against one triangle.
    fn intersect(&self, t: usize, ray: &Ray) -> Option<f64> {
        let [p0, p1, p2] = self.triangle_points(t);
        let e1 = p1 - p0;
        let e2 = p2 - p0;
        let pvec = ray.direction.cross(&e2);
        let det = e1.dot(&pvec);
        let scale = e1.norm() * e2.norm();
        if det.abs() <= 1e-14 * scale {
            return None;
        }
        let inv = 1.0 / det;
        let tvec = ray.origin - p0;
        let u = tvec.dot(&pvec) * inv;
        if !(-1e-12..=1.0 + 1e-12).contains(&u) {
            return None;
        }
        let qvec = tvec.cross(&e1);
        let v = ray.direction.dot(&qvec) * inv;
        if v < -1e-12 || u + v > 1.0 + 1e-12 {
            return None;
        }
        let d = e2.dot(&qvec) * inv;
        (d > 1e-12).then_some(d)
    }

    /// Closest surface point to `p`.
    pub fn closest_point(&self, p: &Pt3) -> ClosestPoint {
        let (triangle, point, dist_sq) = self.bvh.closest(p, |t| {
            let [a, b, c] = self.triangle_points(t);
            closest_on_triangle(p, &a, &b, &c)
        });
        let [a, b, c] = self.triangle_points(triangle);
        ClosestPoint {
            point,
            triangle,
            distance: dist_sq.sqrt(),
            barycentric: barycentric(&point, &a, &b, &c),
        }
    }

    /// Area-weighted uniform samples; deterministic for a fixed seed.
    pub fn sample_surface(
        &self,
        count: usize,
        rng_seed: u64,
    ) -> Result<Vec<SurfaceSample>, MeshError> {
        let dist = WeightedIndex::new(&self.face_areas).map_err(|_| MeshError::EmptyMesh)?;
        let mut rng = seeded(rng_seed);
        Ok((0..count)
            .map(|_| {
                let t = dist.sample(&mut rng);
                let [a, b, c] = self.triangle_points(t);
                let r1: f64 = rng.gen::<f64>().sqrt();
                let r2: f64 = rng.gen();
                let point = Pt3::from(
                    a.coords * (1.0 - r1) + b.coords * (r1 * (1.0 - r2)) + c.coords * (r1 * r2),
                );
                SurfaceSample {
                    point,
                    normal: self.face_normals[t],
                    triangle_id: t,
                }
            })
            .collect())
    }

    /// Undirected edge list `(u, v, length)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut seen = std::collections::BTreeSet::new();
        for &[a, b, c] in &self.triangles {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                seen.insert((u.min(v), u.max(v)));
            }
        }
        seen.into_iter()
            .map(|(u, v)| (u, v, (self.vertices[u] - self.vertices[v]).norm()))
            .collect()
    }
}

/// Barycentric coordinates of `p` (assumed in the triangle plane).
pub fn barycentric(p: &Pt3, a: &Pt3, b: &Pt3, c: &Pt3) -> [f64; 3] {
    let v0 = b - a;
    let v1 = c - a;
    let v2 = p - a;
    let d00 = v0.dot(&v0);
    let d01 = v0.dot(&v1);
    let d11 = v1.dot(&v1);
    let d20 = v2.dot(&v0);
    let d21 = v2.dot(&v1);
    let denom = d00 * d11 - d01 * d01;
    if denom.abs() < 1e-300 {
        return [1.0, 0.0, 0.0];
    }
    let v = (d11 * d20 - d01 * d21) / denom;
    let w = (d00 * d21 - d01 * d20) / denom;
    [1.0 - v - w, v, w]
}

/// Closest point on triangle `abc` to `p` and its squared distance.
fn closest_on_triangle(p: &Pt3, a: &Pt3, b: &Pt3, c: &Pt3) -> (Pt3, f64) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    let q = if d1 <= 0.0 && d2 <= 0.0 {
        *a
    } else {
        let bp = p - b;
        let d3 = ab.dot(&bp);
        let d4 = ac.dot(&bp);
        if d3 >= 0.0 && d4 <= d3 {
            *b
        } else {
            let vc = d1 * d4 - d3 * d2;
            if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
                a + ab * (d1 / (d1 - d3))
            } else {
                let cp = p - c;
                let d5 = ab.dot(&cp);
                let d6 = ac.dot(&cp);
                if d6 >= 0.0 && d5 <= d6 {
                    *c
                } else {
                    let vb = d5 * d2 - d1 * d6;
                    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
                        a + ac * (d2 / (d2 - d6))
                    } else {
                        let va = d3 * d6 - d5 * d4;
                        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
                            b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)))
                        } else {
                            let denom = 1.0 / (va + vb + vc);
                            a + ab * (vb * denom) + ac * (vc * denom)
                        }
                    }
                }
            }
        }
    };
    (q, (p - q).norm_squared())
}

#[cfg(test)]
mod tests {
    use super::shapes::{icosphere, unit_cube};
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cube_properties() {
        let m = unit_cube();
        assert_eq!(m.vertices().len(), 8);
        assert_eq!(m.triangles().len(), 12);
        assert_relative_eq!(m.area(), 6.0, epsilon = 1e-12);
        assert_relative_eq!(m.center_of_mass(), Pt3::new(0.5, 0.5, 0.5), epsilon = 1e-12);
        assert!(!m.is_non_manifold());
        for n in m.vertex_normals() {
            assert!((n.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_law() {
        let m = unit_cube().scaled(0.001).unwrap();
        assert_relative_eq!(m.area(), 6.0e-6, max_relative = 1e-12);
    }

    #[test]
    fn inverted_winding_is_fixed() {
        let m = unit_cube();
        let flipped: Vec<[usize; 3]> = m.triangles().iter().map(|&[a, b, c]| [a, c, b]).collect();
        let m2 = TriMesh::new(m.vertices().to_vec(), flipped).unwrap();
        for t in 0..12 {
            assert_relative_eq!(m.face_normal(t), m2.face_normal(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_and_bad_index() {
        assert!(matches!(
            TriMesh::new(vec![Pt3::origin()], vec![]),
            Err(MeshError::EmptyMesh)
        ));
        assert!(matches!(
            TriMesh::new(vec![Pt3::origin()], vec![[0, 1, 2]]),
            Err(MeshError::BadIndex { .. })
        ));
    }

    #[test]
    fn non_manifold_is_flagged_not_rejected() {
        let v = vec![
            Pt3::new(0.0, 0.0, 0.0),
            Pt3::new(1.0, 0.0, 0.0),
            Pt3::new(0.0, 1.0, 0.0),
        ];
        let m = TriMesh::new(v, vec![[0, 1, 2]]).unwrap();
        assert!(m.is_non_manifold());
    }

    #[test]
    fn raycast_examples() {
        let m = unit_cube();
        let hit = m
            .raycast(&Ray::new(Pt3::new(-1.0, 0.5, 0.5), Vec3::x()))
            .unwrap();
        assert_relative_eq!(hit.distance, 1.0, epsilon = 1e-12);
        assert_relative_eq!(hit.normal, -Vec3::x(), epsilon = 1e-12);

        let hit = m
            .raycast(&Ray::new(Pt3::new(0.5, 0.5, 0.5), Vec3::x()))
            .unwrap();
        assert_relative_eq!(hit.distance, 0.5, epsilon = 1e-12);
        assert_relative_eq!(hit.normal, Vec3::x(), epsilon = 1e-12);

        assert!(m
            .raycast(&Ray::new(Pt3::new(-1.0, 2.0, 0.5), Vec3::x()))
            .is_none());
    }

    #[test]
    fn icosphere_area() {
        let r = 0.07;
        let m = icosphere(r, 3);
        let exact = 4.0 * std::f64::consts::PI * r * r;
        assert!(
            (m.area() - exact).abs() / exact < 0.01,
            "{} vs {}",
            m.area(),
            exact
        );
    }

    #[test]
    fn closest_point_on_cube() {
        let m = unit_cube();
        let c = m.closest_point(&Pt3::new(0.5, 0.5, 1.3));
        assert_relative_eq!(c.point, Pt3::new(0.5, 0.5, 1.0), epsilon = 1e-12);
        assert_relative_eq!(c.distance, 0.3, epsilon = 1e-12);
        let c = m.closest_point(&Pt3::new(2.0, 2.0, 2.0));
        assert_relative_eq!(c.point, Pt3::new(1.0, 1.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_and_on_surface() {
        let m = icosphere(0.05, 2);
        let a = m.sample_surface(50, 9).unwrap();
        let b = m.sample_surface(50, 9).unwrap();
        assert_eq!(a, b);
        let one = m.sample_surface(1, 1).unwrap();
        assert_eq!(one.len(), 1);
        for s in a.iter().chain(one.iter()) {
            let [p0, p1, p2] = m.triangle_points(s.triangle_id);
            let n = m.face_normal(s.triangle_id);
            assert!((s.point - p0).dot(&n).abs() < 1e-9);
            let bc = barycentric(&s.point, &p0, &p1, &p2);
            assert!(bc.iter().all(|&w| w > -1e-9));
        }
    }
}
