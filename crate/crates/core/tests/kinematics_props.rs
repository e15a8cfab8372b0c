use std::collections::HashSet;

use proptest::prelude::*;

use vine_nav::geometry::{point_segment_distance, MapModel, Polygon, Vec2, EPS_GEOM};
use vine_nav::kinematics::{
    deploy_with, to_cartesian_from, to_joint, turn_direction, DesignSegment, Grower, KinematicsConfig, PivotKind,
    PivotPolicy, TraceEvent, TurnDirection,
};
use vine_nav_reference::{cases, integrate, ReferenceConfig};

fn chain() -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec((0.05..2.0f64, -3.0..3.0f64), 1..12).prop_map(|segs| {
        let mut pts = vec![Vec2::new(0.3, -0.7)];
        let mut heading = 0.4;
        for (l, turn) in segs {
            heading += turn;
            let last = *pts.last().unwrap();
            pts.push(last + Vec2::from_angle(heading) * l);
        }
        pts
    })
}

proptest! {
    #[test]
    fn joint_round_trip(pts in chain()) {
        let joints = to_joint(&pts).unwrap();
        let back = to_cartesian_from(&joints, pts[0]).unwrap();
        prop_assert_eq!(back.len(), pts.len());
        for (a, b) in back.iter().zip(&pts) {
            prop_assert!((*a - *b).norm() < 1e-9);
        }
    }

    #[test]
    fn turn_direction_matches_cross_sign(a in 0.0..std::f64::consts::TAU, b in 0.0..std::f64::consts::TAU) {
        let e = Vec2::from_angle(a);
        let t = Vec2::from_angle(b);
        let (ex, ey, mut tx, mut ty) = (a.cos(), a.sin(), b.cos(), b.sin());
        if ex * tx + ey * ty < 0.0 {
            tx = -tx;
            ty = -ty;
        }
        let z = ex * ty - ey * tx;
        prop_assume!(z.abs() > 1e-9);
        let want = if z > 0.0 { TurnDirection::Left } else { TurnDirection::Right };
        prop_assert_eq!(turn_direction(e, t), want);
    }
}

fn wall(a: Vec2, b: Vec2, thickness: f64) -> Polygon {
    let d = (b - a).normalized().unwrap();
    let off = -d.perp() * thickness;
    Polygon::new(vec![a + off, b + off, b, a]).unwrap()
}

#[test]
fn only_the_distal_length_and_pivot_angle_change_while_sliding() {
    let map = MapModel::open(vec![wall(Vec2::new(1.0, -3.0), Vec2::new(1.0, 3.0), 0.1)]);
    let segs = [DesignSegment::new(0.5, 0.0), DesignSegment::new(0.4, -0.3), DesignSegment::new(2.0, 0.5)];
    let mut g = Grower::new(&map, Vec2::ZERO, 0.2, KinematicsConfig::default()).unwrap();
    g.schedule(&segs, 0.0);
    let mut checked = 0;
    for k in 1..=290 {
        let before = g.state().clone();
        let events_before = g.events().len();
        g.grow_to(0.01 * k as f64).unwrap();
        let new_events = &g.events()[events_before.saturating_sub(1)..];
        let only_slide = new_events.iter().all(|e| matches!(e, TraceEvent::Slide { .. }));
        if !only_slide || before.pivots.len() != g.state().pivots.len() || before.tip_contact.is_none() {
            continue;
        }
        let Some(TraceEvent::Slide { pivot, .. }) = g.events().last() else { continue };
        let j0 = to_joint(&before.positions()).unwrap();
        let j1 = to_joint(&g.state().positions()).unwrap();
        let n = j0.joints.len();
        for i in 0..n {
            if i != n - 1 {
                assert!((j0.joints[i].length - j1.joints[i].length).abs() < 1e-9);
            }
            if i != *pivot && !(i == pivot + 1 && *pivot + 1 == n) {
                assert!((j0.joints[i].angle - j1.joints[i].angle).abs() < 1e-9, "joint {i} pivot {pivot}");
            }
        }
        checked += 1;
    }
    assert!(checked > 10, "only {checked} slide-only chunks");
}

#[test]
fn chunked_growth_conserves_length_and_matches_one_shot() {
    for (case, trace) in cases::corpus(500, 8) {
        let mut g = Grower::new(&case.map, case.start, case.start_angle, KinematicsConfig::default()).unwrap();
        g.schedule(&case.segments, 0.0);
        let total: f64 = case.segments.iter().map(|s| s.length).sum();
        let mut last = 0.0;
        while !g.is_terminated() && g.length() < total - 1e-9 {
            let step = (total - g.length()).min(0.137);
            g.grow(step).unwrap();
            let len = g.state().length();
            if !g.is_terminated() {
                assert!((len - last - step).abs() < 1e-6, "seed {}", case.seed);
            }
            last = len;
        }
        assert!((g.tip() - trace.final_tip()).norm() < 1e-9, "seed {}", case.seed);
    }
}

#[test]
fn corpus_invariants() {
    for (case, trace) in cases::corpus(1000, 30) {
        let state = &trace.final_state;
        // body never penetrates
        for w in state.positions().windows(2) {
            for o in &case.map.obstacles {
                assert!(!o.segment_penetrates(w[0], w[1], EPS_GEOM), "seed {}", case.seed);
            }
        }
        // at most one contact pivot per obstacle, none on the tip's obstacle
        let mut seen = HashSet::new();
        for p in &state.pivots {
            if let PivotKind::Contact { obstacle, .. } = p.kind {
                assert!(seen.insert(obstacle), "seed {}", case.seed);
                assert!(state.tip_contact.is_none_or(|c| c.obstacle != obstacle));
                assert!(case.map.obstacles[obstacle].boundary_distance(p.position) < EPS_GEOM);
            }
        }
        // slide samples stay on their edge
        for ev in &trace.events {
            if let TraceEvent::Slide { obstacle, edge, path, .. } = ev {
                let (a, b) = case.map.obstacles[*obstacle].edge(*edge);
                for q in path {
                    assert!(point_segment_distance(*q, a, b) < EPS_GEOM, "seed {}", case.seed);
                }
            }
        }
        // tip path is continuous and the length adds up
        let total: f64 = case.segments.iter().map(|s| s.length).sum();
        if trace.termination == Some(vine_nav::kinematics::Termination::LengthReached) {
            assert!((state.length() - total).abs() < 1e-6, "seed {}", case.seed);
        }
        // designed turns proximal to every rotation keep their place
        for p in &state.pivots {
            if let PivotKind::DesignedTurn { index } = p.kind {
                let at = trace
                    .events
                    .iter()
                    .find_map(|e| match e {
                        TraceEvent::TurnEverted { index: i, at, .. } if *i == index => Some(*at),
                        _ => None,
                    })
                    .unwrap();
                let rotated = trace.events.iter().any(|e| match e {
                    TraceEvent::Slide { pivot, .. } => state.pivots.iter().position(|q| q.position == p.position).is_none_or(|k| *pivot < k),
                    _ => false,
                });
                if !rotated {
                    assert_eq!(at, p.position);
                }
            }
        }
    }
}

#[test]
fn matches_reference_integrator() {
    for (case, trace) in cases::corpus(7, 10) {
        let run = integrate(&case.segments, &case.map, case.start, case.start_angle, &ReferenceConfig::default())
            .unwrap();
        let dev = (run.state.tip - trace.final_tip()).norm();
        assert!(dev < 1e-3, "seed {}: {dev}", case.seed);
    }
}

#[test]
fn both_policies_run_on_corpus() {
    let cfg = KinematicsConfig {
        policy: PivotPolicy::MostDistalMatching,
        ..KinematicsConfig::default()
    };
    for (case, _) in cases::corpus(3, 10) {
        let trace = deploy_with(&case.segments, &case.map, case.start, case.start_angle, &cfg);
        let run = integrate(
            &case.segments,
            &case.map,
            case.start,
            case.start_angle,
            &ReferenceConfig {
                policy: PivotPolicy::MostDistalMatching,
                ..ReferenceConfig::default()
            },
        );
        if let (Ok(t), Ok(r)) = (trace, run) {
            assert!((t.final_tip() - r.state.tip).norm() < 1e-3, "seed {}", case.seed);
        }
    }
}
