//! Exact planar primitives: polygons, maps, ray casting and boundary queries.

mod map;
mod polygon;
mod vec2;

pub use map::{Bounds, MapModel};
pub use polygon::{closest_point_on_segment, point_segment_distance, signed_area, Polygon};
pub use vec2::Vec2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for on-edge and coincidence tests, in meters.
pub const EPS_GEOM: f64 = 1e-9;

/// Deviation from perpendicular, in radians, below which a tip contact is head-on.
pub const DEFAULT_EPS_PERP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("vertex {0} repeats its successor")]
    RepeatedVertex(usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("polygon vertices must be counter-clockwise")]
    Clockwise,
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("obstacles {0} and {1} overlap")]
    ObstaclesOverlap(usize, usize),
    #[error("obstacle {0} is not inside the map bounds")]
    ObstacleOutOfBounds(usize),
    #[error("bounds must have positive extent")]
    EmptyBounds,
    #[error("{0} point lies inside obstacle {1}")]
    PointInObstacle(&'static str, usize),
    #[error("success radius must be positive")]
    NonPositiveRadius,
    #[error("zero direction")]
    ZeroDirection,
    #[error("degenerate head-on contact")]
    DegenerateHeadOn,
    #[error("hit is not on an obstacle edge")]
    NotOnObstacle,
}

/// What a ray ran into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Surface {
    Obstacle(usize),
    Bounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayHit {
    pub point: Vec2,
    pub surface: Surface,
    /// Edge index within the obstacle (edge `i` joins vertices `i` and `i+1`).
    pub edge: usize,
    /// Unit direction of the contacted edge, from vertex `edge` to `edge + 1`.
    pub tangent: Vec2,
    pub distance: f64,
}

impl RayHit {
    pub fn obstacle(&self) -> Option<usize> {
        match self.surface {
            Surface::Obstacle(i) => Some(i),
            Surface::Bounds => None,
        }
    }
}

/// Proper crossing of segments `ab` and `cd`: every endpoint is more than `tol`
/// away from the other segment's supporting line, on opposite sides.
pub fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2, tol: f64) -> bool {
    let strictly_apart = |x: f64, y: f64| (x > 0.0 && y < 0.0) || (x < 0.0 && y > 0.0);
    if !strictly_apart((b - a).cross(c - a), (b - a).cross(d - a)) || !strictly_apart((d - c).cross(a - c), (d - c).cross(b - c)) {
        return false;
    }
    let side = |p: Vec2, q: Vec2, r: Vec2| {
        let len = (q - p).norm();
        if len == 0.0 {
            0.0
        } else {
            (q - p).cross(r - p) / len
        }
    };
    let (d1, d2) = (side(a, b, c), side(a, b, d));
    let (d3, d4) = (side(c, d, a), side(c, d, b));
    ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
}

/// Nearest intersection of a ray with the obstacles (entering hits only) or the map bounds.
///
/// Hits closer than [`EPS_GEOM`] are ignored so that rays may start on a boundary.
/// A ray that exactly grazes a convex vertex passes by it.
pub fn ray_cast(origin: Vec2, direction: Vec2, map: &MapModel) -> Result<Option<RayHit>, GeometryError> {
    let dir = direction.normalized().ok_or(GeometryError::ZeroDirection)?;
    let mut best: Option<RayHit> = None;
    for (oi, poly) in map.obstacles.iter().enumerate() {
        if let Some(hit) = ray_polygon(origin, dir, poly, oi) {
            if best.is_none_or(|b| hit.distance < b.distance) {
                best = Some(hit);
            }
        }
    }
    if let Some(bounds) = &map.bounds {
        if let Some(hit) = bounds.exit(origin, dir) {
            if best.is_none_or(|b| hit.distance < b.distance) {
                best = Some(hit);
            }
        }
    }
    Ok(best)
}

fn ray_polygon(origin: Vec2, dir: Vec2, poly: &Polygon, index: usize) -> Option<RayHit> {
    let mut best: Option<RayHit> = None;
    for i in 0..poly.len() {
        let (a, b) = poly.edge(i);
        let e = b - a;
        let len = e.norm();
        let denom = dir.cross(e);
        if denom.abs() <= 1e-14 * len {
            continue;
        }
        let ao = a - origin;
        let t = ao.cross(e) / denom;
        let u = ao.cross(dir) / denom;
        if t <= EPS_GEOM {
            continue;
        }
        let along = u * len;
        if along < -EPS_GEOM || along > len + EPS_GEOM {
            continue;
        }
        let hit = if along.abs() <= EPS_GEOM || (len - along).abs() <= EPS_GEOM {
            let vi = if along.abs() <= EPS_GEOM { i } else { poly.next_index(i) };
            if !poly.enters_at_vertex(vi, dir) {
                continue;
            }
            vertex_hit(poly, vi, dir, t, index)
        } else {
            // back-facing edges are exits
            if denom >= 0.0 {
                continue;
            }
            RayHit {
                point: origin + dir * t,
                surface: Surface::Obstacle(index),
                edge: i,
                tangent: e / len,
                distance: t,
            }
        };
        if best.is_none_or(|b| hit.distance < b.distance) {
            best = Some(hit);
        }
    }
    best
}

/// Resolves a hit exactly on vertex `vi` to the adjacent edge whose direction away
/// from the vertex is best aligned with the ray.
pub(crate) fn vertex_hit(poly: &Polygon, vi: usize, dir: Vec2, t: f64, index: usize) -> RayHit {
    let v = poly.vertex(vi);
    let prev = poly.prev_index(vi);
    let next = poly.next_index(vi);
    let away_prev = (poly.vertex(prev) - v).normalized().unwrap_or(Vec2::X);
    let away_next = (poly.vertex(next) - v).normalized().unwrap_or(Vec2::X);
    let edge = if dir.dot(away_next) >= dir.dot(away_prev) { vi } else { prev };
    let (a, b) = poly.edge(edge);
    RayHit {
        point: v,
        surface: Surface::Obstacle(index),
        edge,
        tangent: (b - a).normalized().unwrap_or(Vec2::X),
        distance: t,
    }
}

/// The endpoint of the contacted edge toward which a tip moving along `heading` slides.
pub fn next_boundary_vertex(hit: &RayHit, heading: Vec2, map: &MapModel) -> Result<Vec2, GeometryError> {
    let (vi, _) = sliding_vertex(hit, heading, map, DEFAULT_EPS_PERP)?;
    let Surface::Obstacle(oi) = hit.surface else {
        return Err(GeometryError::NotOnObstacle);
    };
    Ok(map.obstacles[oi].vertex(vi))
}

/// Index of the vertex the tip slides toward, and the tangent oriented along the slide.
pub fn sliding_vertex(
    hit: &RayHit,
    heading: Vec2,
    map: &MapModel,
    eps_perp: f64,
) -> Result<(usize, Vec2), GeometryError> {
    let Surface::Obstacle(oi) = hit.surface else {
        return Err(GeometryError::NotOnObstacle);
    };
    let poly = map.obstacles.get(oi).ok_or(GeometryError::NotOnObstacle)?;
    let heading = heading.normalized().ok_or(GeometryError::ZeroDirection)?;
    let along = heading.dot(hit.tangent);
    if along.abs() < eps_perp.sin() {
        return Err(GeometryError::DegenerateHeadOn);
    }
    let (a, b) = poly.edge(hit.edge);
    if (b - hit.point).dot(heading) >= (a - hit.point).dot(heading) {
        Ok((poly.next_index(hit.edge), hit.tangent))
    } else {
        Ok((hit.edge, -hit.tangent))
    }
}

pub fn point_in_obstacle(p: Vec2, map: &MapModel) -> bool {
    map.obstacles.iter().any(|o| o.contains(p))
}

pub fn signed_distance(p: Vec2, obstacle: &Polygon) -> f64 {
    obstacle.signed_distance(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_map() -> MapModel {
        let sq = Polygon::new(vec![
            Vec2::new(1.0, -1.0),
            Vec2::new(2.0, -1.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
        ])
        .unwrap();
        MapModel::open(vec![sq])
    }

    #[test]
    fn axis_aligned_hit() {
        let map = square_map();
        let hit = ray_cast(Vec2::ZERO, Vec2::X, &map).unwrap().unwrap();
        assert!((hit.point - Vec2::new(1.0, 0.0)).norm() < 1e-12);
        assert!((hit.distance - 1.0).abs() < 1e-12);
        assert!((hit.tangent.dot(Vec2::Y)).abs() > 1.0 - 1e-12);
        assert_eq!(hit.surface, Surface::Obstacle(0));
    }

    #[test]
    fn ray_misses() {
        let map = square_map();
        assert!(ray_cast(Vec2::ZERO, Vec2::Y, &map).unwrap().is_none());
    }

    #[test]
    fn zero_direction_rejected() {
        let map = square_map();
        assert_eq!(ray_cast(Vec2::ZERO, Vec2::ZERO, &map), Err(GeometryError::ZeroDirection));
    }

    #[test]
    fn bounds_stop_the_ray() {
        let mut map = square_map();
        map.bounds = Some(Bounds::new(Vec2::new(-3.0, -3.0), Vec2::new(3.0, 3.0)).unwrap());
        let hit = ray_cast(Vec2::ZERO, Vec2::Y, &map).unwrap().unwrap();
        assert_eq!(hit.surface, Surface::Bounds);
        assert!((hit.point - Vec2::new(0.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn grazing_a_corner_passes() {
        let map = square_map();
        // passes exactly through (1,1) heading along +x+y: outside the wedge
        let dir = Vec2::new(1.0, 1.0).normalized().unwrap();
        assert!(ray_cast(Vec2::ZERO, dir, &map).unwrap().is_none());
    }

    #[test]
    fn hitting_a_corner_head_on_picks_aligned_edge() {
        let map = square_map();
        // aims at (1,-1) from the lower left, entering the wedge
        let origin = Vec2::new(0.0, -1.5);
        let dir = (Vec2::new(1.0, -1.0) - origin).normalized().unwrap();
        let hit = ray_cast(origin, dir, &map).unwrap().unwrap();
        assert!((hit.point - Vec2::new(1.0, -1.0)).norm() < 1e-12);
        // direction (2,1)/√5 is better aligned with the bottom edge (+x) than the left edge (+y)
        assert_eq!(hit.edge, 0);
    }

    #[test]
    fn slide_vertex_follows_heading() {
        let map = square_map();
        let hit = ray_cast(Vec2::ZERO, Vec2::X, &map).unwrap().unwrap();
        let down = Vec2::from_angle((-10.0f64).to_radians());
        let up = Vec2::from_angle(10.0f64.to_radians());
        assert_eq!(next_boundary_vertex(&hit, down, &map).unwrap(), Vec2::new(1.0, -1.0));
        assert_eq!(next_boundary_vertex(&hit, up, &map).unwrap(), Vec2::new(1.0, 1.0));
        assert_eq!(
            next_boundary_vertex(&hit, Vec2::X, &map),
            Err(GeometryError::DegenerateHeadOn)
        );
    }

    #[test]
    fn proper_crossing() {
        let tol = 1e-9;
        assert!(segments_cross(Vec2::ZERO, Vec2::new(2.0, 2.0), Vec2::new(0.0, 2.0), Vec2::new(2.0, 0.0), tol));
        assert!(!segments_cross(Vec2::ZERO, Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(2.0, 0.0), tol));
    }
}
