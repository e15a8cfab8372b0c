use serde::{Deserialize, Serialize};

use super::{GeometryError, Polygon, RayHit, Surface, Vec2, EPS_GEOM};

/// Axis-aligned rectangle bounding the world. Growth terminates when the tip reaches it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn new(min: Vec2, max: Vec2) -> Result<Self, GeometryError> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if max.x <= min.x || max.y <= min.y {
            return Err(GeometryError::EmptyBounds);
        }
        Ok(Bounds { min, max })
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Where a ray from `origin` leaves the rectangle. Origins outside exit immediately.
    pub(crate) fn exit(&self, origin: Vec2, dir: Vec2) -> Option<RayHit> {
        if !self.contains(origin) {
            return Some(RayHit {
                point: origin,
                surface: Surface::Bounds,
                edge: 0,
                tangent: dir.perp(),
                distance: 0.0,
            });
        }
        // edges numbered bottom, right, top, left
        let mut best = (f64::INFINITY, 0usize);
        if dir.y < 0.0 {
            best = best.min_by_t(((self.min.y - origin.y) / dir.y, 0));
        }
        if dir.x > 0.0 {
            best = best.min_by_t(((self.max.x - origin.x) / dir.x, 1));
        }
        if dir.y > 0.0 {
            best = best.min_by_t(((self.max.y - origin.y) / dir.y, 2));
        }
        if dir.x < 0.0 {
            best = best.min_by_t(((self.min.x - origin.x) / dir.x, 3));
        }
        let (t, edge) = best;
        if !t.is_finite() {
            return None;
        }
        let tangent = match edge {
            0 => Vec2::X,
            1 => Vec2::Y,
            2 => -Vec2::X,
            _ => -Vec2::Y,
        };
        Some(RayHit {
            point: origin + dir * t.max(0.0),
            surface: Surface::Bounds,
            edge,
            tangent,
            distance: t.max(0.0),
        })
    }
}

trait MinByT {
    fn min_by_t(self, other: Self) -> Self;
}

impl MinByT for (f64, usize) {
    fn min_by_t(self, other: Self) -> Self {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }
}

/// A planar world: obstacles, optional bounds, and the navigation task.
///
/// `start_angle` is the fixed initial heading in radians, or `None` when the
/// heading is free to be chosen by a planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapModel {
    pub bounds: Option<Bounds>,
    pub obstacles: Vec<Polygon>,
    pub start: Vec2,
    pub start_angle: Option<f64>,
    pub goal: Vec2,
    pub success_radius: f64,
}

impl MapModel {
    pub fn new(
        bounds: Option<Bounds>,
        obstacles: Vec<Polygon>,
        start: Vec2,
        start_angle: Option<f64>,
        goal: Vec2,
        success_radius: f64,
    ) -> Result<Self, GeometryError> {
        let map = MapModel {
            bounds,
            obstacles,
            start,
            start_angle,
            goal,
            success_radius,
        };
        map.validate()?;
        Ok(map)
    }

    /// Unbounded map with the task at the origin; handy for geometric experiments.
    pub fn open(obstacles: Vec<Polygon>) -> Self {
        MapModel {
            bounds: None,
            obstacles,
            start: Vec2::ZERO,
            start_angle: Some(0.0),
            goal: Vec2::ZERO,
            success_radius: 0.05,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.success_radius > 0.0 && self.success_radius.is_finite()) {
            return Err(GeometryError::NonPositiveRadius);
        }
        if !self.start.is_finite() || !self.goal.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if let Some(b) = &self.bounds {
            for (i, o) in self.obstacles.iter().enumerate() {
                if !o.vertices().iter().all(|&v| b.contains(v)) {
                    return Err(GeometryError::ObstacleOutOfBounds(i));
                }
            }
        }
        for i in 0..self.obstacles.len() {
            for j in (i + 1)..self.obstacles.len() {
                if polygons_overlap(&self.obstacles[i], &self.obstacles[j]) {
                    return Err(GeometryError::ObstaclesOverlap(i, j));
                }
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.signed_distance(self.start) < -EPS_GEOM {
                return Err(GeometryError::PointInObstacle("start", i));
            }
            if o.signed_distance(self.goal) < -EPS_GEOM {
                return Err(GeometryError::PointInObstacle("goal", i));
            }
        }
        Ok(())
    }

    /// Bounds diagonal, or the extent of the obstacles plus task points when unbounded.
    pub fn diagonal(&self) -> f64 {
        if let Some(b) = &self.bounds {
            return b.diagonal();
        }
        let mut lo = self.start;
        let mut hi = self.start;
        for p in self
            .obstacles
            .iter()
            .flat_map(|o| o.vertices().iter().copied())
            .chain(std::iter::once(self.goal))
        {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (hi - lo).norm().max(1.0)
    }

    pub fn obstacle_containing(&self, p: Vec2) -> Option<usize> {
        self.obstacles.iter().position(|o| o.contains(p))
    }
}

fn polygons_overlap(a: &Polygon, b: &Polygon) -> bool {
    for (p, q) in a.edges() {
        for (r, s) in b.edges() {
            if super::segments_cross(p, q, r, s, 0.0) {
                return true;
            }
        }
    }
    a.vertices().iter().any(|&v| b.signed_distance(v) <= 0.0)
        || b.vertices().iter().any(|&v| a.signed_distance(v) <= 0.0)
}
