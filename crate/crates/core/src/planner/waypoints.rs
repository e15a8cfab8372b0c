use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{MapModel, Vec2, EPS_GEOM};
use crate::uncertainty::trial_rng;

/// Where a waypoint came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaypointSource {
    Start,
    Goal,
    Vertex { obstacle: usize, vertex: usize },
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub position: Vec2,
    pub source: WaypointSource,
}

/// Candidate decision points. Index 0 is the start and index 1 the goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointSet {
    pub points: Vec<Waypoint>,
}

pub const START: usize = 0;
pub const GOAL: usize = 1;

impl WaypointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, i: usize) -> Vec2 {
        self.points[i].position
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.points.iter().map(|w| w.position).collect()
    }
}

/// Strictly inside the bounds and clear of every obstacle; only such waypoints launch probes.
pub fn is_free(map: &MapModel, p: Vec2) -> bool {
    if let Some(b) = map.bounds {
        if !(p.x > b.min.x && p.x < b.max.x && p.y > b.min.y && p.y < b.max.y) {
            return false;
        }
    }
    map.obstacles.iter().all(|o| o.signed_distance(p) > EPS_GEOM)
}

/// Start, goal, every obstacle vertex pushed `offset` out along its bisector, and
/// `n_interior` free points drawn uniformly over the bounds (or the obstacle extent).
///
/// An offset point that would land inside another obstacle is pulled back toward its
/// vertex until it is free.
pub fn build_waypoints(map: &MapModel, offset: f64, n_interior: usize, seed: u64) -> WaypointSet {
    let mut points = vec![
        Waypoint {
            position: map.start,
            source: WaypointSource::Start,
        },
        Waypoint {
            position: map.goal,
            source: WaypointSource::Goal,
        },
    ];
    for (oi, poly) in map.obstacles.iter().enumerate() {
        for vi in 0..poly.len() {
            let v = poly.vertex(vi);
            let dir = poly.outward_bisector(vi);
            let mut h = offset;
            let mut position = v;
            while h > 1e-6 {
                let q = v + dir * h;
                if is_free(map, q) {
                    position = q;
                    break;
                }
                h *= 0.5;
            }
            points.push(Waypoint {
                position,
                source: WaypointSource::Vertex { obstacle: oi, vertex: vi },
            });
        }
    }
    if n_interior > 0 {
        let (lo, hi) = match map.bounds {
            Some(b) => (b.min, b.max),
            None => extent(map),
        };
        let mut rng = trial_rng(seed, u64::MAX);
        let mut added = 0;
        // rejection sampling; give up on maps that are almost entirely solid
        for _ in 0..n_interior * 10_000 {
            if added == n_interior {
                break;
            }
            let q = Vec2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
            if is_free(map, q) {
                points.push(Waypoint {
                    position: q,
                    source: WaypointSource::Interior,
                });
                added += 1;
            }
        }
    }
    WaypointSet { points }
}

fn extent(map: &MapModel) -> (Vec2, Vec2) {
    let mut lo = map.start;
    let mut hi = map.start;
    for p in map
        .obstacles
        .iter()
        .flat_map(|o| o.vertices().iter().copied())
        .chain([map.goal])
    {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if hi.x - lo.x < 1e-9 || hi.y - lo.y < 1e-9 {
        (lo - Vec2::new(1.0, 1.0), hi + Vec2::new(1.0, 1.0))
    } else {
        (lo, hi)
    }
}
