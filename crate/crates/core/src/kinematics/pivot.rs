use serde::{Deserialize, Serialize};

use super::{KinematicsError, RobotState, TurnDirection};
use crate::geometry::{MapModel, Polygon, Vec2, EPS_GEOM};

/// Rotation used by the unsupported-pivot test, in radians.
pub const UNSUPPORTED_ROTATION: f64 = 1e-6;

/// Which matching pivot absorbs the rotation imposed by a tip contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PivotPolicy {
    /// Most proximal unsupported pivot of matching handedness; the base only as a fallback.
    #[default]
    MostProximalUnsupported,
    /// Most distal pivot of matching handedness.
    MostDistalMatching,
}

/// Direction an obstacle with tangent `t` turns a distal segment heading along `e`.
pub fn turn_direction(e: Vec2, t: Vec2) -> TurnDirection {
    let t = if e.dot(t) < 0.0 { -t } else { t };
    if e.cross(t) > 0.0 {
        TurnDirection::Left
    } else {
        TurnDirection::Right
    }
}

/// Whether rotating everything distal to pivot `k` by a tiny angle in `turn` direction
/// keeps every distal contact pivot out of its obstacle and sweeps no body segment
/// into an obstacle.
pub fn is_unsupported(state: &RobotState, k: usize, turn: TurnDirection, map: &MapModel) -> bool {
    let center = state.pivots[k].position;
    let angle = turn.sign() * UNSUPPORTED_ROTATION;
    let contacts_clear = state.pivots[k + 1..].iter().all(|p| match p.contact_obstacle() {
        Some(o) => {
            let moved = p.position.rotated_about(center, angle);
            map.obstacles[o].signed_distance(moved) >= -EPS_GEOM
        }
        None => true,
    });
    if !contacts_clear {
        return false;
    }
    let body: Vec<Vec2> = std::iter::once(center)
        .chain(state.pivots[k + 1..].iter().map(|p| p.position.rotated_about(center, angle)))
        .chain(std::iter::once(state.tip.rotated_about(center, angle)))
        .collect();
    !body
        .windows(2)
        .any(|w| map.obstacles.iter().any(|o| o.segment_penetrates(w[0], w[1], EPS_GEOM)))
}

/// Tip velocity along `t` is reachable by rotating about pivot `k` (tip not behind it).
fn slide_feasible(state: &RobotState, k: usize, t: Vec2) -> bool {
    (state.tip - state.pivots[k].position).dot(t) >= -EPS_GEOM
}

/// Picks the pivot about which the distal body rotates while the tip slides along an
/// edge with tangent `t` (oriented along the slide).
///
/// Pivots behind which the tip cannot advance along `t` are skipped.
pub fn select_pivot(
    state: &RobotState,
    turn: TurnDirection,
    t: Vec2,
    map: &MapModel,
    policy: PivotPolicy,
) -> Result<usize, KinematicsError> {
    let matching = |k: &usize| state.pivots[*k].handedness.matches(turn) && slide_feasible(state, *k, t);
    let n = state.pivots.len();
    let chosen = match policy {
        PivotPolicy::MostProximalUnsupported => (1..n)
            .filter(matching)
            .find(|&k| is_unsupported(state, k, turn, map))
            .or_else(|| Some(0).filter(matching)),
        PivotPolicy::MostDistalMatching => (0..n).rev().find(matching),
    };
    chosen.ok_or(KinematicsError::SingularContact)
}

/// Instantaneous pivot rotation rate and tip speed along `t` when growing at speed `u`
/// while the tip slides on a wall with tangent `t`, rotating about pivot `p`.
pub fn contact_slide_rate(state: &RobotState, p: usize, t: Vec2, u: f64) -> Result<(f64, f64), KinematicsError> {
    let pivot = state.pivots.get(p).ok_or(KinematicsError::NoSuchPivot(p))?.position;
    let e = state.heading;
    let w = state.tip - pivot;
    // columns: z × w and -t
    let a = w.perp();
    let b = -t;
    let det = a.cross(b);
    if det.abs() <= 1e-12 * w.norm().max(EPS_GEOM) {
        return Err(KinematicsError::SingularContact);
    }
    let rhs = -e * u;
    let theta_dot = rhs.cross(b) / det;
    let v = a.cross(rhs) / det;
    Ok((theta_dot, v))
}

/// Handedness of a contact pivot at vertex `vi` for a body heading along `e`: the sense in
/// which rotating the distal body pushes it into the obstacle.
pub fn contact_handedness(poly: &Polygon, vi: usize, e: Vec2) -> TurnDirection {
    let delta = 1e-3;
    let left = poly.enters_at_vertex(vi, e.rotated(delta));
    let right = poly.enters_at_vertex(vi, e.rotated(-delta));
    match (left, right) {
        (true, false) => TurnDirection::Left,
        (false, true) => TurnDirection::Right,
        _ => {
            if e.cross(poly.centroid() - poly.vertex(vi)) > 0.0 {
                TurnDirection::Left
            } else {
                TurnDirection::Right
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{Handedness, PivotKind, PivotPoint};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn turn_direction_signs() {
        let d = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert_eq!(turn_direction(Vec2::X, d), TurnDirection::Left);
        assert_eq!(turn_direction(Vec2::X, Vec2::new(d.x, -d.y)), TurnDirection::Right);
        // tangent flipped to agree with the heading first
        assert_eq!(turn_direction(Vec2::X, -d), TurnDirection::Left);
    }

    fn single(e: Vec2) -> RobotState {
        RobotState {
            pivots: vec![PivotPoint::base(Vec2::ZERO)],
            tip: e,
            heading: e,
            tip_contact: None,
        }
    }

    #[test]
    fn slide_rate_oblique_wall() {
        let s = single(Vec2::X);
        let t = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let (w, v) = contact_slide_rate(&s, 0, t, 1.0).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert!((v - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn slide_rate_grazing_and_perpendicular() {
        let s = single(Vec2::X);
        let (w, v) = contact_slide_rate(&s, 0, Vec2::X, 1.0).unwrap();
        assert!(w.abs() < 1e-15 && (v - 1.0).abs() < 1e-15);
        assert_eq!(contact_slide_rate(&s, 0, Vec2::Y, 1.0), Err(KinematicsError::SingularContact));
    }

    #[test]
    fn straight_robot_pivots_at_base() {
        let s = single(Vec2::X);
        let map = MapModel::open(vec![]);
        let t = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        for policy in [PivotPolicy::MostProximalUnsupported, PivotPolicy::MostDistalMatching] {
            assert_eq!(select_pivot(&s, TurnDirection::Left, t, &map, policy).unwrap(), 0);
        }
    }

    #[test]
    fn mismatched_turn_is_skipped() {
        let mut s = single(Vec2::X);
        s.pivots.push(PivotPoint {
            position: Vec2::new(1.0, 0.0),
            kind: PivotKind::DesignedTurn { index: 1 },
            handedness: Handedness::Right,
        });
        s.tip = Vec2::new(2.0, 0.5);
        s.heading = Vec2::new(1.0, 0.5).normalized().unwrap();
        let map = MapModel::open(vec![]);
        let t = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert_eq!(select_pivot(&s, TurnDirection::Left, t, &map, PivotPolicy::MostDistalMatching).unwrap(), 0);
        assert_eq!(
            select_pivot(&s, TurnDirection::Right, -t.perp(), &map, PivotPolicy::MostDistalMatching).unwrap(),
            1
        );
    }

    #[test]
    fn contact_vertex_handedness() {
        // square to the left of a body passing its lower-left corner heading +x
        let sq = Polygon::rectangle(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)).unwrap();
        assert_eq!(contact_handedness(&sq, 0, Vec2::X), TurnDirection::Left);
        assert_eq!(contact_handedness(&sq, 3, Vec2::Y), TurnDirection::Right);
    }
}
