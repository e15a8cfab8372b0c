use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::waypoints::{is_free, WaypointSet, GOAL, START};
use super::PlanError;
use crate::geometry::{MapModel, Vec2};
use crate::kinematics::{first_pass, Grower, KinematicsConfig};

pub const S: usize = 0;
pub const E: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    pub bins: usize,
    pub theta_max: f64,
    /// Pass-through radius for weight-0 edges.
    pub radius: f64,
    /// Zero-turn probe length; defaults to four map diagonals.
    pub probe_length: Option<f64>,
    pub kinematics: KinematicsConfig,
}

impl GraphConfig {
    pub fn new(bins: usize, theta_max: f64, radius: f64) -> Self {
        GraphConfig {
            bins,
            theta_max,
            radius,
            probe_length: None,
            kinematics: KinematicsConfig::default(),
        }
    }
}

/// A weight-0 edge and the probe that certifies it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroEdge {
    pub from: usize,
    pub to: usize,
    /// Probe length at the closest approach to the target waypoint.
    pub length: f64,
    pub distance: f64,
}

/// Directed graph over (waypoint, heading bin) nodes. Weight-0 edges are stored with
/// their certificates; weight-1 turn edges are implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointGraph {
    pub bins: usize,
    pub waypoints: usize,
    pub theta_max: f64,
    pub radius: f64,
    pub probe_length: f64,
    pub start_bins: Vec<usize>,
    /// Exact heading of the start node when the start angle is fixed.
    pub start_angle: Option<f64>,
    pub zero_edges: Vec<ZeroEdge>,
    offsets: Vec<usize>,
}

impl WaypointGraph {
    pub fn node(&self, waypoint: usize, bin: usize) -> usize {
        2 + waypoint * self.bins + bin
    }

    /// (waypoint, bin) of a regular node.
    pub fn split(&self, node: usize) -> Option<(usize, usize)> {
        (node >= 2).then(|| ((node - 2) / self.bins, (node - 2) % self.bins))
    }

    pub fn node_count(&self) -> usize {
        2 + self.waypoints * self.bins
    }

    pub fn bin_angle(&self, bin: usize) -> f64 {
        TAU * bin as f64 / self.bins as f64
    }

    pub fn bin_of(&self, angle: f64) -> usize {
        bin_of(angle, self.bins)
    }

    /// Heading a probe from this node starts with.
    pub fn node_heading(&self, waypoint: usize, bin: usize) -> f64 {
        match self.start_angle {
            Some(a) if waypoint == START && bin == self.bin_of(a) => a,
            _ => self.bin_angle(bin),
        }
    }

    /// Largest bin offset a single designed turn can span.
    pub fn turn_span(&self) -> usize {
        let step = TAU / self.bins as f64;
        ((self.theta_max / step + 1e-9).floor() as usize).min(self.bins / 2)
    }

    pub fn zero_edges_from(&self, node: usize) -> &[ZeroEdge] {
        if node < 2 {
            return &[];
        }
        let i = node - 2;
        &self.zero_edges[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Outgoing edges as (target, weight).
    pub fn neighbors(&self, node: usize) -> Vec<(usize, u32)> {
        match node {
            S => self.start_bins.iter().map(|&b| (self.node(START, b), 0)).collect(),
            E => Vec::new(),
            _ => {
                let (w, b) = self.split(node).expect("regular node");
                let mut out: Vec<(usize, u32)> = self.zero_edges_from(node).iter().map(|e| (e.to, 0)).collect();
                let span = self.turn_span();
                let mut turned: Vec<usize> = (1..=span)
                    .flat_map(|k| [(b + k) % self.bins, (b + self.bins - k) % self.bins])
                    .filter(|&c| c != b)
                    .collect();
                turned.sort_unstable();
                turned.dedup();
                out.extend(turned.into_iter().map(|c| (self.node(w, c), 1)));
                if w == GOAL {
                    out.push((E, 0));
                }
                out
            }
        }
    }

    pub fn edge_count(&self) -> usize {
        (0..self.node_count()).map(|n| self.neighbors(n).len()).sum()
    }

    /// Every edge as (from, to, weight), in node order.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        (0..self.node_count())
            .flat_map(|n| self.neighbors(n).into_iter().map(move |(t, w)| (n, t, w)))
            .collect()
    }
}

pub fn bin_of(angle: f64, bins: usize) -> usize {
    let step = TAU / bins as f64;
    ((angle.rem_euclid(TAU) / step).round() as usize) % bins
}

/// Zero-turn probe from one node: weight-0 edges to every waypoint it passes within
/// `radius` of, first pass only, binned by the distal heading there.
#[allow(clippy::too_many_arguments)]
pub fn probe(
    map: &MapModel,
    ws: &WaypointSet,
    from: usize,
    heading: f64,
    bins: usize,
    radius: f64,
    length: f64,
    cfg: &KinematicsConfig,
) -> Vec<(usize, usize, f64, f64)> {
    let Ok(mut g) = Grower::new(map, ws.position(from), heading, *cfg) else {
        return Vec::new();
    };
    // a failed deployment still certifies the path grown before the failure
    let _ = g.grow_to(length);
    let path = g.tip_path();
    (0..ws.len())
        .filter(|&v| v != from)
        .filter_map(|v| {
            first_pass(path, ws.position(v), radius).map(|p| (v, bin_of(p.heading.angle(), bins), p.length, p.distance))
        })
        .collect()
}

pub fn build_graph(ws: &WaypointSet, map: &MapModel, cfg: &GraphConfig) -> Result<WaypointGraph, PlanError> {
    if cfg.bins < 8 {
        return Err(PlanError::InvalidConfig(format!("{} heading bins; need at least 8", cfg.bins)));
    }
    if !(cfg.radius > 0.0 && cfg.theta_max >= 0.0) {
        return Err(PlanError::InvalidConfig("radius must be positive and theta_max >= 0".into()));
    }
    let probe_length = cfg.probe_length.unwrap_or(4.0 * map.diagonal());
    let mut graph = WaypointGraph {
        bins: cfg.bins,
        waypoints: ws.len(),
        theta_max: cfg.theta_max,
        radius: cfg.radius,
        probe_length,
        start_bins: match map.start_angle {
            Some(a) => vec![bin_of(a, cfg.bins)],
            None => (0..cfg.bins).collect(),
        },
        start_angle: map.start_angle,
        zero_edges: Vec::new(),
        offsets: Vec::new(),
    };
    let per_node: Vec<Vec<ZeroEdge>> = (0..ws.len() * cfg.bins)
        .into_par_iter()
        .map(|i| {
            let (w, b) = (i / cfg.bins, i % cfg.bins);
            if w == GOAL || (w != START && !is_free(map, ws.position(w))) {
                return Vec::new();
            }
            let from = graph.node(w, b);
            let heading = graph.node_heading(w, b);
            let mut edges: Vec<ZeroEdge> = probe(map, ws, w, heading, cfg.bins, cfg.radius, probe_length, &cfg.kinematics)
                .into_iter()
                .map(|(v, bin, length, distance)| ZeroEdge {
                    from,
                    to: graph.node(v, bin),
                    length,
                    distance,
                })
                .collect();
            edges.sort_by_key(|e| e.to);
            edges
        })
        .collect();
    let mut offsets = Vec::with_capacity(per_node.len() + 1);
    offsets.push(0);
    for edges in per_node {
        graph.zero_edges.extend(edges);
        offsets.push(graph.zero_edges.len());
    }
    graph.offsets = offsets;
    Ok(graph)
}

/// Re-runs the probe behind a weight-0 edge and checks it still yields the same edge.
pub fn recertify(graph: &WaypointGraph, edge: &ZeroEdge, ws: &WaypointSet, map: &MapModel, cfg: &KinematicsConfig) -> bool {
    let (Some((w, b)), Some((v, bin))) = (graph.split(edge.from), graph.split(edge.to)) else {
        return false;
    };
    probe(map, ws, w, graph.node_heading(w, b), graph.bins, graph.radius, graph.probe_length, cfg)
        .into_iter()
        .any(|(t, tb, length, _)| t == v && tb == bin && (length - edge.length).abs() < 1e-9)
}

/// Node path from `s` to `e` and its total weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePath {
    pub nodes: Vec<usize>,
    pub weight: u32,
}

/// Dijkstra on (weight, hops); equal labels keep the smaller predecessor id.
pub fn shortest_path(graph: &WaypointGraph) -> Option<NodePath> {
    let n = graph.node_count();
    let mut label = vec![(u32::MAX, u32::MAX); n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    label[S] = (0, 0);
    heap.push(Reverse((0u32, 0u32, S)));
    while let Some(Reverse((w, h, u))) = heap.pop() {
        if done[u] || (w, h) != label[u] {
            continue;
        }
        done[u] = true;
        if u == E {
            break;
        }
        for (v, ew) in graph.neighbors(u) {
            if done[v] {
                continue;
            }
            let cand = (w + ew, h + 1);
            if cand < label[v] {
                label[v] = cand;
                pred[v] = u;
                heap.push(Reverse((cand.0, cand.1, v)));
            } else if cand == label[v] && u < pred[v] {
                pred[v] = u;
            }
        }
    }
    if label[E].0 == u32::MAX {
        return None;
    }
    let mut nodes = vec![E];
    while *nodes.last().expect("non-empty") != S {
        nodes.push(pred[*nodes.last().expect("non-empty")]);
    }
    nodes.reverse();
    Some(NodePath { nodes, weight: label[E].0 })
}

/// Waypoint sequence of a minimum-turn path, with the heading the robot starts with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnSequence {
    pub path: NodePath,
    /// Waypoint indices with consecutive repeats removed; starts at the start, ends at the goal.
    pub waypoints: Vec<usize>,
    pub positions: Vec<Vec2>,
    pub start_heading: f64,
    /// Certified probe length of each leg between consecutive waypoints.
    pub leg_lengths: Vec<f64>,
}

pub fn min_turn_sequence(graph: &WaypointGraph, ws: &WaypointSet) -> Result<TurnSequence, PlanError> {
    let path = shortest_path(graph).ok_or(PlanError::Unreachable)?;
    let inner: Vec<(usize, usize)> = path.nodes.iter().filter_map(|&n| graph.split(n)).collect();
    let (w0, b0) = inner[0];
    let start_heading = graph.node_heading(w0, b0);
    let mut waypoints = vec![inner[0].0];
    let mut leg_lengths = Vec::new();
    for pair in path.nodes.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (Some((wa, _)), Some((wb, _))) = (graph.split(a), graph.split(b)) else {
            continue;
        };
        if wa != wb {
            let cert = graph.zero_edges_from(a).iter().find(|e| e.to == b).expect("path edge exists");
            waypoints.push(wb);
            leg_lengths.push(cert.length);
        }
    }
    Ok(TurnSequence {
        positions: waypoints.iter().map(|&w| ws.position(w)).collect(),
        path,
        waypoints,
        start_heading,
        leg_lengths,
    })
}
