//! Median-split AABB hierarchy over triangles.

use crate::geometry::{Pt3, Vec3};
use crate::mesh::Ray;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Pt3,
    max: Pt3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: Pt3::from(Vec3::repeat(f64::INFINITY)),
            max: Pt3::from(Vec3::repeat(f64::NEG_INFINITY)),
        }
    }

    fn grow(&mut self, p: &Pt3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn merge(&mut self, o: &Aabb) {
        self.min = self.min.inf(&o.min);
        self.max = self.max.sup(&o.max);
    }

    /// Entry distance of the ray into the (slightly padded) box, if it enters before `t_max`.
    fn ray_entry(&self, ray: &Ray, inv_dir: &Vec3, t_max: f64) -> Option<f64> {
        let pad = 1e-9 * (self.max - self.min).norm().max(1e-12);
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for a in 0..3 {
            let lo = self.min[a] - pad;
            let hi = self.max[a] + pad;
            if ray.direction[a] == 0.0 {
                if ray.origin[a] < lo || ray.origin[a] > hi {
                    return None;
                }
                continue;
            }
            let mut ta = (lo - ray.origin[a]) * inv_dir[a];
            let mut tb = (hi - ray.origin[a]) * inv_dir[a];
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    fn dist_sq(&self, p: &Pt3) -> f64 {
        let mut d = 0.0;
        for a in 0..3 {
            let v = if p[a] < self.min[a] {
                self.min[a] - p[a]
            } else if p[a] > self.max[a] {
                p[a] - self.max[a]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        bounds: Aabb,
        start: usize,
        end: usize,
    },
    Inner {
        bounds: Aabb,
        left: usize,
        right: usize,
    },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub(crate) fn build(vertices: &[Pt3], triangles: &[[usize; 3]]) -> Self {
        let boxes: Vec<Aabb> = triangles
            .iter()
            .map(|tri| {
                let mut b = Aabb::empty();
                for &i in tri {
                    b.grow(&vertices[i]);
                }
                b
            })
            .collect();
        let centroids: Vec<Pt3> = boxes
            .iter()
            .map(|b| nalgebra::center(&b.min, &b.max))
            .collect();
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: (0..triangles.len()).collect(),
        };
        bvh.build_node(&boxes, &centroids, 0, triangles.len());
        bvh
    }

    fn build_node(&mut self, boxes: &[Aabb], centroids: &[Pt3], start: usize, end: usize) -> usize {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &t in &self.order[start..end] {
            bounds.merge(&boxes[t]);
            cbounds.grow(&centroids[t]);
        }
        let idx = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, start, end });
            return idx;
        }
        let extent = cbounds.max - cbounds.min;
        let axis = extent.imax();
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis].total_cmp(&centroids[b][axis])
        });
        self.nodes.push(Node::Leaf { bounds, start, end });
        let left = self.build_node(boxes, centroids, start, mid);
        let right = self.build_node(boxes, centroids, mid, end);
        self.nodes[idx] = Node::Inner {
            bounds,
            left,
            right,
        };
        idx
    }

    /// Nearest hit; `test` returns the hit distance for one triangle.
    pub(crate) fn raycast<F>(&self, ray: &Ray, test: F) -> Option<(f64, usize)>
    where
        F: Fn(usize) -> Option<f64>,
    {
        let inv = Vec3::new(
            1.0 / ray.direction.x,
            1.0 / ray.direction.y,
            1.0 / ray.direction.z,
        );
        let mut best: Option<(f64, usize)> = None;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let t_max = best.map_or(f64::INFINITY, |b| b.0);
            if self.nodes[n].bounds().ray_entry(ray, &inv, t_max).is_none() {
                continue;
            }
            match &self.nodes[n] {
                Node::Leaf { start, end, .. } => {
                    for &t in &self.order[*start..*end] {
                        if let Some(d) = test(t) {
                            // ties resolve to the lower triangle index
                            if best.map_or(true, |(bd, bt)| d < bd || (d == bd && t < bt)) {
                                best = Some((d, t));
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        best
    }

    /// Closest triangle; `query` returns `(point, squared distance)` for one triangle.
    pub(crate) fn closest<F>(&self, p: &Pt3, query: F) -> (usize, Pt3, f64)
    where
        F: Fn(usize) -> (Pt3, f64),
    {
        let mut best = (usize::MAX, *p, f64::INFINITY);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if self.nodes[n].bounds().dist_sq(p) > best.2 {
                continue;
            }
            match &self.nodes[n] {
                Node::Leaf { start, end, .. } => {
                    for &t in &self.order[*start..*end] {
                        let (q, d) = query(t);
                        if d < best.2 || (d == best.2 && t < best.0) {
                            best = (t, q, d);
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[*left].bounds().dist_sq(p);
                    let dr = self.nodes[*right].bounds().dist_sq(p);
                    if dl < dr {
                        stack.push(*right);
                        stack.push(*left);
                    } else {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        best
    }
}
