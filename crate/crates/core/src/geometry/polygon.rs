use serde::{Deserialize, Serialize};

use super::{segments_cross, GeometryError, Vec2};

/// A simple counter-clockwise polygon with nonzero area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) <= super::EPS_GEOM {
                return Err(GeometryError::RepeatedVertex(i));
            }
        }
        let area = signed_area(&vertices);
        if area.abs() <= super::EPS_GEOM * super::EPS_GEOM {
            return Err(GeometryError::ZeroArea);
        }
        if area < 0.0 {
            return Err(GeometryError::Clockwise);
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                // adjacent edges share a vertex and are allowed to touch there
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_touch(a, b, c, d) {
                    return Err(GeometryError::SelfIntersecting(i, j));
                }
            }
        }
        Ok(Polygon { vertices })
    }

    /// Axis-aligned rectangle as a polygon.
    pub fn rectangle(min: Vec2, max: Vec2) -> Result<Self, GeometryError> {
        Polygon::new(vec![
            min,
            Vec2::new(max.x, min.y),
            max,
            Vec2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i % self.vertices.len()]
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        (self.vertex(i), self.vertex(i + 1))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        (0..self.len()).map(move |i| self.edge(i))
    }

    pub fn prev_index(&self, i: usize) -> usize {
        (i + self.len() - 1) % self.len()
    }

    pub fn next_index(&self, i: usize) -> usize {
        (i + 1) % self.len()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.len();
        let mut acc = Vec2::ZERO;
        let mut a2 = 0.0;
        for i in 0..n {
            let (p, q) = self.edge(i);
            let w = p.cross(q);
            a2 += w;
            acc += (p + q) * w;
        }
        acc / (3.0 * a2)
    }

    /// Even-odd point-in-polygon test. Boundary points may land on either side.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        let n = self.len();
        let mut j = n - 1;
        for i in 0..n {
            let (vi, vj) = (self.vertices[i], self.vertices[j]);
            if (vi.y > p.y) != (vj.y > p.y) {
                let x = vj.x + (p.y - vj.y) * (vi.x - vj.x) / (vi.y - vj.y);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Distance from `p` to the nearest boundary point.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Negative inside, positive outside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        let d = self.boundary_distance(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }

    pub fn is_convex_vertex(&self, i: usize) -> bool {
        let a = self.vertex(self.prev_index(i));
        let v = self.vertex(i);
        let b = self.vertex(self.next_index(i));
        (v - a).cross(b - v) > 0.0
    }

    /// Whether a ray leaving vertex `i` along `dir` immediately enters the interior.
    /// Directions exactly along an adjacent edge graze and do not enter.
    pub fn enters_at_vertex(&self, i: usize, dir: Vec2) -> bool {
        let a = self.vertex(self.prev_index(i));
        let v = self.vertex(i);
        let b = self.vertex(self.next_index(i));
        let d1 = (v - a).normalized().unwrap_or(Vec2::X);
        let d2 = (b - v).normalized().unwrap_or(Vec2::X);
        let tol = 1e-12;
        let left1 = d1.cross(dir) > tol;
        let left2 = d2.cross(dir) > tol;
        if self.is_convex_vertex(i) {
            left1 && left2
        } else {
            left1 || left2
        }
    }

    /// Unit direction pointing out of the polygon along the vertex angle bisector.
    pub fn outward_bisector(&self, i: usize) -> Vec2 {
        let a = self.vertex(self.prev_index(i));
        let v = self.vertex(i);
        let b = self.vertex(self.next_index(i));
        let to_a = (a - v).normalized().unwrap_or(Vec2::X);
        let to_b = (b - v).normalized().unwrap_or(Vec2::X);
        let inner = match (to_a + to_b).normalized() {
            Some(d) => d,
            // straight angle: the interior side is the left of the edge direction
            None => (b - a).perp().normalized().unwrap_or(Vec2::Y),
        };
        if self.is_convex_vertex(i) || (to_a + to_b).normalized().is_none() {
            -inner
        } else {
            inner
        }
    }

    /// True when a segment passes through the polygon interior (not just touching).
    pub fn segment_penetrates(&self, a: Vec2, b: Vec2, tol: f64) -> bool {
        let (lo, hi) = self.bbox();
        if a.x.max(b.x) < lo.x - tol
            || a.x.min(b.x) > hi.x + tol
            || a.y.max(b.y) < lo.y - tol
            || a.y.min(b.y) > hi.y + tol
        {
            return false;
        }
        if self.edges().any(|(c, d)| segments_cross(a, b, c, d, tol)) {
            return true;
        }
        // Without a proper crossing the segment can only enter through vertices, so
        // it is inside or outside on each piece between the vertices it touches.
        let ab = b - a;
        let len2 = ab.norm_sq();
        let mut cuts = vec![0.0, 1.0];
        if len2 > 0.0 {
            for &v in &self.vertices {
                if (v - closest_point_on_segment(v, a, b)).norm_sq() <= tol * tol {
                    cuts.push(((v - a).dot(ab) / len2).clamp(0.0, 1.0));
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2).any(|w| {
            let mid = a.lerp(b, 0.5 * (w[0] + w[1]));
            w[1] - w[0] > 0.0 && self.contains(mid) && self.boundary_distance(mid) > tol
        })
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bbox(&self) -> (Vec2, Vec2) {
        let mut lo = self.vertices[0];
        let mut hi = lo;
        for v in &self.vertices[1..] {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    pub fn translated(&self, offset: Vec2) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&v| v + offset).collect(),
        }
    }
}

impl TryFrom<Vec<Vec2>> for Polygon {
    type Error = GeometryError;
    fn try_from(v: Vec<Vec2>) -> Result<Self, Self::Error> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Vec2> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

pub fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    p.distance(closest_point_on_segment(p, a, b))
}

pub fn closest_point_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Closed-segment intersection test, counting shared endpoints and collinear overlap.
fn segments_touch(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}
