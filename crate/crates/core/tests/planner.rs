use std::f64::consts::TAU;

use proptest::prelude::*;

use vine_nav::geometry::{Bounds, MapModel, Polygon, Vec2};
use vine_nav::kinematics::{deploy_with, KinematicsConfig};
use vine_nav::planner::{
    build_graph, build_waypoints, min_turn_sequence, optimal_design, recertify, shortest_path, DesignConfig,
    GraphConfig, PlanError, WaypointGraph, WaypointSource, E, GOAL, S, START,
};
use vine_nav::uncertainty::UncertaintyModel;

fn task(obstacles: Vec<Polygon>, start: Vec2, goal: Vec2, radius: f64) -> MapModel {
    MapModel::new(
        Some(Bounds::new(Vec2::new(-1.0, -2.0), Vec2::new(4.0, 2.0)).unwrap()),
        obstacles,
        start,
        None,
        goal,
        radius,
    )
    .unwrap()
}

fn tri(c: Vec2, r: f64, phase: f64) -> Polygon {
    Polygon::new((0..3).map(|k| c + Vec2::from_angle(phase + k as f64 * TAU / 3.0) * r).collect()).unwrap()
}

/// Minimum s-e weight by Bellman-Ford over the explicit edge list.
fn bellman_ford(g: &WaypointGraph) -> Option<u32> {
    let edges = g.edges();
    let mut dist = vec![u32::MAX; g.node_count()];
    dist[S] = 0;
    for _ in 0..g.node_count() {
        let mut changed = false;
        for &(a, b, w) in &edges {
            if dist[a] != u32::MAX && dist[a] + w < dist[b] {
                dist[b] = dist[a] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (dist[E] != u32::MAX).then_some(dist[E])
}

/// Smallest budget for which a depth-first search finds an s-e path. A node reached
/// again with no less weight spent is dominated and pruned.
fn dfs_min_weight(g: &WaypointGraph, max_budget: u32) -> Option<u32> {
    let adj: Vec<Vec<(usize, u32)>> = (0..g.node_count()).map(|n| g.neighbors(n)).collect();
    for budget in 0..=max_budget {
        let mut best_spent = vec![u32::MAX; g.node_count()];
        let mut stack = vec![(S, 0u32)];
        while let Some((n, spent)) = stack.pop() {
            if spent >= best_spent[n] {
                continue;
            }
            best_spent[n] = spent;
            if n == E {
                return Some(budget);
            }
            for &(m, w) in &adj[n] {
                if spent + w <= budget {
                    stack.push((m, spent + w));
                }
            }
        }
    }
    None
}

#[test]
fn one_triangle_gives_five_waypoints() {
    let map = task(vec![tri(Vec2::new(1.5, 0.0), 0.4, 0.3)], Vec2::ZERO, Vec2::new(3.0, 0.0), 0.05);
    let ws = build_waypoints(&map, 0.01, 0, 0);
    assert_eq!(ws.len(), 5);
    assert_eq!(ws.points[START].source, WaypointSource::Start);
    assert_eq!(ws.points[GOAL].source, WaypointSource::Goal);
    for (k, w) in ws.points[2..].iter().enumerate() {
        assert_eq!(w.source, WaypointSource::Vertex { obstacle: 0, vertex: k });
        let d = map.obstacles[0].signed_distance(w.position);
        assert!((d - 0.01).abs() < 1e-9, "{d}");
    }
}

#[test]
fn interior_waypoints_are_free() {
    let map = task(
        vec![tri(Vec2::new(1.5, 0.0), 0.8, 0.3), tri(Vec2::new(0.5, 1.2), 0.5, 1.0)],
        Vec2::ZERO,
        Vec2::new(3.0, 0.0),
        0.05,
    );
    let ws = build_waypoints(&map, 0.01, 10, 3);
    assert_eq!(ws.len(), 2 + 6 + 10);
    for w in &ws.points[8..] {
        assert_eq!(w.source, WaypointSource::Interior);
        assert!(map.obstacles.iter().all(|o| !o.contains(w.position)));
        assert!(map.bounds.unwrap().contains(w.position));
    }
    assert_eq!(ws, build_waypoints(&map, 0.01, 10, 3));
}

#[test]
fn line_of_sight_needs_no_turn() {
    let map = task(vec![], Vec2::ZERO, Vec2::new(2.0, 0.0), 0.05);
    let ws = build_waypoints(&map, 0.01, 0, 0);
    let g = build_graph(&ws, &map, &GraphConfig::new(36, 90f64.to_radians(), 0.05)).unwrap();
    let from = g.node(START, 0);
    assert!(g.zero_edges_from(from).iter().any(|e| e.to == g.node(GOAL, 0)));
    let seq = min_turn_sequence(&g, &ws).unwrap();
    assert_eq!(seq.path.weight, 0);
    assert_eq!(seq.waypoints, vec![START, GOAL]);
    assert_eq!(seq.start_heading, 0.0);
}

/// Thick wall hiding the goal from the start; one turn past its top corner reaches it.
fn shadow_map() -> MapModel {
    let wall = Polygon::rectangle(Vec2::new(1.0, -1.0), Vec2::new(1.2, 1.0)).unwrap();
    task(vec![wall], Vec2::ZERO, Vec2::new(2.2, 1.4), 0.1)
}

#[test]
fn goal_behind_a_wall_needs_one_turn() {
    let map = shadow_map();
    let ws = build_waypoints(&map, 0.01, 0, 0);
    let g = build_graph(&ws, &map, &GraphConfig::new(36, 90f64.to_radians(), map.success_radius)).unwrap();
    let seq = min_turn_sequence(&g, &ws).unwrap();
    assert_eq!(seq.path.weight, 1);
    assert_eq!(bellman_ford(&g), Some(1));
    assert_eq!(dfs_min_weight(&g, 3), Some(1));
    assert_eq!(seq.waypoints.first(), Some(&START));
    assert_eq!(seq.waypoints.last(), Some(&GOAL));
}

#[test]
fn every_zero_edge_recertifies() {
    let map = shadow_map();
    let ws = build_waypoints(&map, 0.01, 0, 0);
    let g = build_graph(&ws, &map, &GraphConfig::new(16, 90f64.to_radians(), map.success_radius)).unwrap();
    assert!(!g.zero_edges.is_empty());
    let cfg = KinematicsConfig::default();
    for e in &g.zero_edges {
        assert!(recertify(&g, e, &ws, &map, &cfg), "{e:?}");
    }
    let again = build_graph(&ws, &map, &GraphConfig::new(16, 90f64.to_radians(), map.success_radius)).unwrap();
    assert_eq!(g.edge_count(), again.edge_count());
    assert_eq!(g, again);
}

#[test]
fn boxed_in_goal_is_unreachable() {
    // a U-shaped pocket closed off by the map bounds
    let pocket = Polygon::new(vec![
        Vec2::new(3.0, 2.0),
        Vec2::new(3.0, 1.0),
        Vec2::new(4.0, 1.0),
        Vec2::new(4.0, 1.1),
        Vec2::new(3.1, 1.1),
        Vec2::new(3.1, 2.0),
    ])
    .unwrap();
    let map = task(vec![pocket], Vec2::ZERO, Vec2::new(3.5, 1.5), 0.05);
    let ws = build_waypoints(&map, 0.01, 0, 0);
    let g = build_graph(&ws, &map, &GraphConfig::new(36, 90f64.to_radians(), 0.05)).unwrap();
    assert!(shortest_path(&g).is_none());
    assert_eq!(min_turn_sequence(&g, &ws).unwrap_err(), PlanError::Unreachable);
    assert_eq!(bellman_ford(&g), None);
}

#[test]
fn exact_design_visits_every_waypoint() {
    let map = shadow_map();
    let ws = build_waypoints(&map, 0.01, 0, 0);
    let g = build_graph(&ws, &map, &GraphConfig::new(72, 90f64.to_radians(), map.success_radius)).unwrap();
    let seq = min_turn_sequence(&g, &ws).unwrap();
    let cfg = DesignConfig {
        radius: map.success_radius,
        samples: 4,
        theta_max: 90f64.to_radians(),
        turn_step: 1f64.to_radians(),
        seed: 0,
        probe_length: g.probe_length,
        kinematics: KinematicsConfig::default(),
    };
    let design = optimal_design(&seq.positions, seq.start_heading, &map, &UncertaintyModel::exact(), &cfg).unwrap();
    let turns = design.segments.iter().filter(|s| s.turn != 0.0).count();
    assert!(turns as u32 <= seq.path.weight, "{turns} turns for weight {}", seq.path.weight);
    let trace = deploy_with(&design.segments, &map, map.start, design.start_heading, &KinematicsConfig::default()).unwrap();
    for p in &seq.positions {
        assert!(trace.first_pass(*p, map.success_radius).is_some(), "missed {p:?}");
    }
    assert!(trace.final_tip().distance(map.goal) < map.success_radius);
    assert!(design.reports.iter().all(|r| r.success == 1.0));
}

#[test]
fn too_few_bins_are_rejected() {
    let map = shadow_map();
    let ws = build_waypoints(&map, 0.01, 0, 0);
    assert!(matches!(
        build_graph(&ws, &map, &GraphConfig::new(4, 1.0, 0.05)),
        Err(PlanError::InvalidConfig(_))
    ));
}

fn small_map() -> impl Strategy<Value = MapModel> {
    prop::collection::vec((0.4..2.6f64, -1.4..1.4f64, 0.15..0.45f64, 0.0..TAU), 1..=3).prop_filter_map(
        "overlapping obstacles",
        |tris| {
            let obstacles = tris.iter().map(|&(x, y, r, p)| tri(Vec2::new(x, y), r, p)).collect();
            MapModel::new(
                Some(Bounds::new(Vec2::new(-1.0, -2.0), Vec2::new(4.0, 2.0)).unwrap()),
                obstacles,
                Vec2::ZERO,
                None,
                Vec2::new(3.0, 0.3),
                0.1,
            )
            .ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dijkstra_matches_exhaustive_search(map in small_map(), bins in 8usize..=12, theta_deg in 30.0..120.0f64) {
        let ws = build_waypoints(&map, 0.01, 0, 0);
        prop_assert!(ws.len() <= 12);
        let g = build_graph(&ws, &map, &GraphConfig::new(bins, theta_deg.to_radians(), map.success_radius)).unwrap();
        let got = shortest_path(&g).map(|p| p.weight);
        prop_assert_eq!(got, bellman_ford(&g));
        prop_assert_eq!(got, dfs_min_weight(&g, 2 * ws.len() as u32));
        if let Some(p) = shortest_path(&g) {
            // the path is a real path with the claimed weight
            let mut w = 0;
            for pair in p.nodes.windows(2) {
                let e = g.neighbors(pair[0]).into_iter().find(|&(t, _)| t == pair[1]);
                prop_assert!(e.is_some());
                w += e.unwrap().1;
            }
            prop_assert_eq!(w, p.weight);
        }
    }
}


proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_designs_visit_planned_waypoints(map in small_map()) {
        let ws = build_waypoints(&map, 0.01, 0, 0);
        let g = build_graph(&ws, &map, &GraphConfig::new(72, 90f64.to_radians(), map.success_radius)).unwrap();
        let Ok(seq) = min_turn_sequence(&g, &ws) else { return Ok(()) };
        let cfg = DesignConfig {
            radius: map.success_radius,
            samples: 2,
            theta_max: 90f64.to_radians(),
            turn_step: 1f64.to_radians(),
            seed: 0,
            probe_length: g.probe_length,
            kinematics: KinematicsConfig::default(),
        };
        let design = optimal_design(&seq.positions, seq.start_heading, &map, &UncertaintyModel::exact(), &cfg).unwrap();
        let trace = deploy_with(&design.segments, &map, map.start, design.start_heading, &KinematicsConfig::default()).unwrap();
        for p in &seq.positions {
            prop_assert!(trace.first_pass(*p, map.success_radius).is_some(), "missed {:?}", p);
        }
    }
}
