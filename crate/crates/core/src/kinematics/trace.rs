use std::fmt;

use serde::{Deserialize, Serialize};

use super::{PivotPoint, RobotState};
use crate::geometry::{RayHit, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    LengthReached,
    OutOfBounds,
    Wedged,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::LengthReached => "length reached",
            Termination::OutOfBounds => "out of bounds",
            Termination::Wedged => "wedged",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceEvent {
    FreeGrowth {
        from: Vec2,
        to: Vec2,
    },
    TurnEverted {
        index: usize,
        at: Vec2,
        angle: f64,
        length: f64,
    },
    ContactStart {
        hit: RayHit,
        length: f64,
    },
    Slide {
        pivot: usize,
        obstacle: usize,
        edge: usize,
        path: Vec<Vec2>,
    },
    /// The tip left an obstacle at a vertex; `pivot` is the contact pivot added there.
    ContactEnd {
        obstacle: usize,
        pivot: PivotPoint,
        length: f64,
    },
    /// The body (not the tip) came to rest against an obstacle vertex.
    GlancingContact {
        obstacle: usize,
        pivot: PivotPoint,
        length: f64,
    },
    PivotRemoved {
        index: usize,
        pivot: PivotPoint,
    },
    Terminated {
        reason: Termination,
        length: f64,
    },
}

impl TraceEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            TraceEvent::FreeGrowth { .. } => "free_growth",
            TraceEvent::TurnEverted { .. } => "turn_everted",
            TraceEvent::ContactStart { .. } => "contact_start",
            TraceEvent::Slide { .. } => "slide",
            TraceEvent::ContactEnd { .. } => "contact_end",
            TraceEvent::GlancingContact { .. } => "glancing_contact",
            TraceEvent::PivotRemoved { .. } => "pivot_removed",
            TraceEvent::Terminated { .. } => "terminated",
        }
    }
}

/// A point of the tip path together with the distal heading and total length there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipSample {
    pub point: Vec2,
    pub heading: Vec2,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentTrace {
    pub events: Vec<TraceEvent>,
    pub tip_path: Vec<TipSample>,
    pub final_state: RobotState,
    pub termination: Option<Termination>,
}

impl DeploymentTrace {
    pub fn final_tip(&self) -> Vec2 {
        self.final_state.tip
    }

    /// Total length reached.
    pub fn length(&self) -> f64 {
        self.tip_path.last().map_or(0.0, |s| s.length)
    }

    pub fn tip_points(&self) -> Vec<Vec2> {
        self.tip_path.iter().map(|s| s.point).collect()
    }

    pub fn contact_events(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::ContactStart { .. } | TraceEvent::GlancingContact { .. }))
            .count()
    }

    /// Closest approach of the tip path to `p`: (distance, path length there, heading there).
    pub fn closest_approach(&self, p: Vec2) -> Option<(f64, f64, Vec2)> {
        closest_on_path(&self.tip_path, p)
    }

    pub fn first_pass(&self, p: Vec2, radius: f64) -> Option<Pass> {
        first_pass(&self.tip_path, p, radius)
    }

    /// First point along the tip path that comes within `radius` of `p`, as
    /// (path length, heading there).
    pub fn first_within(&self, p: Vec2, radius: f64) -> Option<(f64, Vec2)> {
        first_within(&self.tip_path, p, radius)
    }
}

/// The tip's first visit to a disk: where it entered and where it came closest to the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pass {
    pub entry_length: f64,
    pub length: f64,
    pub distance: f64,
    /// Distal heading at the closest point.
    pub heading: Vec2,
}

/// First pass of the tip path through the open disk of `radius` around `p`.
pub fn first_pass(path: &[TipSample], p: Vec2, radius: f64) -> Option<Pass> {
    let first = path.first()?;
    let mut pass = (first.point.distance(p) < radius).then_some(Pass {
        entry_length: first.length,
        length: first.length,
        distance: first.point.distance(p),
        heading: first.heading,
    });
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ab = b.point - a.point;
        let len2 = ab.norm_sq();
        let s = if len2 > 0.0 {
            ((p - a.point).dot(ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let d = (a.point + ab * s).distance(p);
        let at = |s: f64| a.length + (b.length - a.length) * s;
        match pass.as_mut() {
            None => {
                if d < radius {
                    let entry = first_within(&[a, b], p, radius).map_or(at(s), |(l, _)| l);
                    pass = Some(Pass {
                        entry_length: entry,
                        length: at(s),
                        distance: d,
                        heading: a.heading.rotated(a.heading.angle_to(b.heading) * s),
                    });
                } else {
                    continue;
                }
            }
            Some(best) => {
                if d < best.distance {
                    best.length = at(s);
                    best.distance = d;
                    best.heading = a.heading.rotated(a.heading.angle_to(b.heading) * s);
                }
            }
        }
        if b.point.distance(p) >= radius {
            break;
        }
    }
    pass
}

pub(crate) fn closest_on_path(path: &[TipSample], p: Vec2) -> Option<(f64, f64, Vec2)> {
    let mut best: Option<(f64, f64, Vec2)> = None;
    if let [only] = path {
        return Some((only.point.distance(p), only.length, only.heading));
    }
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ab = b.point - a.point;
        let len2 = ab.norm_sq();
        let s = if len2 > 0.0 {
            ((p - a.point).dot(ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = a.point + ab * s;
        let d = q.distance(p);
        if best.is_none_or(|(bd, _, _)| d < bd) {
            let heading = if len2 > 0.0 { ab / len2.sqrt() } else { b.heading };
            best = Some((d, a.length + (b.length - a.length) * s, heading));
        }
    }
    best
}

pub(crate) fn first_within(path: &[TipSample], p: Vec2, radius: f64) -> Option<(f64, Vec2)> {
    if let Some(first) = path.first() {
        if first.point.distance(p) < radius {
            return Some((first.length, first.heading));
        }
    }
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ab = b.point - a.point;
        let len = ab.norm();
        if len == 0.0 {
            continue;
        }
        let dir = ab / len;
        // smallest s in [0, len] with |a + s dir - p| < radius
        let ap = a.point - p;
        let half_b = ap.dot(dir);
        let c = ap.norm_sq() - radius * radius;
        let disc = half_b * half_b - c;
        if disc <= 0.0 {
            continue;
        }
        let s = (-half_b - disc.sqrt()).max(0.0);
        if s < len {
            return Some((a.length + (b.length - a.length) * s / len, dir));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(x: f64, y: f64, length: f64) -> TipSample {
        TipSample {
            point: Vec2::new(x, y),
            heading: Vec2::X,
            length,
        }
    }

    #[test]
    fn first_pass_within_radius() {
        let path = [sample(0.0, 0.0, 0.0), sample(2.0, 0.0, 2.0)];
        let (len, h) = first_within(&path, Vec2::new(1.0, 0.3), 0.5).unwrap();
        assert!((len - 0.6).abs() < 1e-12);
        assert_eq!(h, Vec2::X);
        assert!(first_within(&path, Vec2::new(1.0, 0.6), 0.5).is_none());
    }

    #[test]
    fn closest_point_on_polyline() {
        let path = [sample(0.0, 0.0, 0.0), sample(2.0, 0.0, 2.0), sample(2.0, 2.0, 4.0)];
        let (d, len, _) = closest_on_path(&path, Vec2::new(3.0, 1.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        assert!((len - 3.0).abs() < 1e-12);
    }

    #[test]
    fn first_pass_ends_when_the_tip_leaves() {
        // in, out, then back in closer: only the first visit counts
        let path = [
            sample(0.0, 0.0, 0.0),
            sample(2.0, 0.0, 2.0),
            sample(2.0, 2.0, 4.0),
            sample(1.0, 0.1, 6.15),
        ];
        let target = Vec2::new(1.0, 0.2);
        let pass = first_pass(&path, target, 0.5).unwrap();
        assert!((pass.distance - 0.2).abs() < 1e-12);
        assert!((pass.length - 1.0).abs() < 1e-12);
        let entry = 1.0 - (0.25f64 - 0.04).sqrt();
        assert!((pass.entry_length - entry).abs() < 1e-12);
        assert!(first_pass(&path, Vec2::new(5.0, 5.0), 0.5).is_none());
    }
}
