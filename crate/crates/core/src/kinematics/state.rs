use serde::{Deserialize, Serialize};

use super::KinematicsError;
use crate::geometry::{Vec2, EPS_GEOM};

/// Rotation sense imposed on the robot by an obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TurnDirection {
    Left,
    Right,
}

impl TurnDirection {
    /// +1 for counter-clockwise.
    pub fn sign(self) -> f64 {
        match self {
            TurnDirection::Left => 1.0,
            TurnDirection::Right => -1.0,
        }
    }
}

/// The rotation sense in which a pivot is compliant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Handedness {
    Left,
    Right,
    /// Only the base is compliant both ways.
    Both,
}

impl Handedness {
    pub fn matches(self, turn: TurnDirection) -> bool {
        matches!(
            (self, turn),
            (Handedness::Both, _)
                | (Handedness::Left, TurnDirection::Left)
                | (Handedness::Right, TurnDirection::Right)
        )
    }

    /// Handedness of a bend by `angle` radians.
    pub fn of_angle(angle: f64) -> Handedness {
        if angle > 0.0 {
            Handedness::Left
        } else {
            Handedness::Right
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactFeature {
    Vertex(usize),
    Edge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PivotKind {
    Base,
    Contact { obstacle: usize, feature: ContactFeature },
    DesignedTurn { index: usize },
    /// A former contact that lifted off (or was superseded) while bent. It keeps
    /// its angle and behaves like a designed turn of the same sign.
    Kink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PivotPoint {
    pub position: Vec2,
    pub kind: PivotKind,
    pub handedness: Handedness,
}

impl PivotPoint {
    pub fn base(position: Vec2) -> Self {
        PivotPoint {
            position,
            kind: PivotKind::Base,
            handedness: Handedness::Both,
        }
    }

    pub fn contact_obstacle(&self) -> Option<usize> {
        match self.kind {
            PivotKind::Contact { obstacle, .. } => Some(obstacle),
            _ => None,
        }
    }
}

/// The tip's current sliding contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TipContact {
    pub obstacle: usize,
    pub edge: usize,
}

/// Cartesian model state: pivots ordered proximal (base) to distal, then the tip.
///
/// `heading` is the unit direction of the distal segment. It is stored because the
/// distal segment has zero length at the instant a turn everts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub pivots: Vec<PivotPoint>,
    pub tip: Vec2,
    pub heading: Vec2,
    pub tip_contact: Option<TipContact>,
}

impl RobotState {
    pub fn at_base(base: Vec2, heading_angle: f64) -> Self {
        RobotState {
            pivots: vec![PivotPoint::base(base)],
            tip: base,
            heading: Vec2::from_angle(heading_angle),
            tip_contact: None,
        }
    }

    /// Pivot positions followed by the tip.
    pub fn positions(&self) -> Vec<Vec2> {
        self.pivots
            .iter()
            .map(|p| p.position)
            .chain(std::iter::once(self.tip))
            .collect()
    }

    /// Sum of segment lengths.
    pub fn length(&self) -> f64 {
        let pts = self.positions();
        pts.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    pub fn last_pivot(&self) -> Vec2 {
        self.pivots.last().expect("base pivot always present").position
    }

    /// Unit direction of segment `i` (from position `i` to `i + 1`).
    pub fn segment_direction(&self, i: usize) -> Vec2 {
        if i + 1 >= self.pivots.len() {
            return self.heading;
        }
        (self.pivots[i + 1].position - self.pivots[i].position)
            .normalized()
            .unwrap_or(self.heading)
    }

    /// Relative bend at pivot `i` (`i >= 1`), or the absolute heading of the
    /// first segment for `i == 0`.
    pub fn joint_angle(&self, i: usize) -> f64 {
        if i == 0 {
            return self.segment_direction(0).angle();
        }
        self.segment_direction(i - 1).angle_to(self.segment_direction(i))
    }
}

/// One joint of the joint-space representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub angle: f64,
    pub length: f64,
}

/// Joint-space representation. The first angle is the absolute heading of the first
/// segment; later angles are relative turns between consecutive segments.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JointState {
    pub joints: Vec<Joint>,
}

impl JointState {
    pub fn new(joints: Vec<Joint>) -> Self {
        JointState { joints }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        JointState {
            joints: pairs.iter().map(|&(angle, length)| Joint { angle, length }).collect(),
        }
    }
}

/// Converts a chain of points (base first, tip last) to joint space.
pub fn to_joint(points: &[Vec2]) -> Result<JointState, KinematicsError> {
    let mut joints = Vec::with_capacity(points.len().saturating_sub(1));
    let mut prev_dir: Option<Vec2> = None;
    for (i, w) in points.windows(2).enumerate() {
        let delta = w[1] - w[0];
        let length = delta.norm();
        if length < EPS_GEOM {
            return Err(KinematicsError::CoincidentPivots(i));
        }
        let angle = match prev_dir {
            None => delta.angle(),
            Some(p) => p.angle_to(delta),
        };
        joints.push(Joint { angle, length });
        prev_dir = Some(delta);
    }
    Ok(JointState { joints })
}

/// Reconstructs the chain from the origin with the first segment heading measured from +x.
pub fn to_cartesian(joints: &JointState) -> Result<Vec<Vec2>, KinematicsError> {
    to_cartesian_from(joints, Vec2::ZERO)
}

pub fn to_cartesian_from(joints: &JointState, origin: Vec2) -> Result<Vec<Vec2>, KinematicsError> {
    let mut points = Vec::with_capacity(joints.joints.len() + 1);
    points.push(origin);
    let mut heading = 0.0;
    let mut at = origin;
    for (i, j) in joints.joints.iter().enumerate() {
        if !(j.length > 0.0 && j.length.is_finite()) {
            return Err(KinematicsError::NonPositiveLength(i));
        }
        heading += j.angle;
        at += Vec2::from_angle(heading) * j.length;
        points.push(at);
    }
    Ok(points)
}
