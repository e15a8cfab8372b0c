//! Waypoint graph, minimum-turn sequencing and greedy particle design.

mod design;
mod graph;
mod waypoints;

pub use design::{optimal_design, turn_candidates, DesignConfig, GreedyDesign, WaypointReport};
pub use graph::{
    bin_of, build_graph, min_turn_sequence, probe, recertify, shortest_path, GraphConfig, NodePath, TurnSequence,
    WaypointGraph, ZeroEdge, E, S,
};
pub use waypoints::{build_waypoints, is_free, Waypoint, WaypointSet, WaypointSource, GOAL, START};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{MapModel, Vec2};
use crate::kinematics::{KinematicsConfig, KinematicsError, RobotDesign};
use crate::uncertainty::{mc_success_with, McOptions, SuccessEstimate, UncertaintyError, UncertaintyModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("unreachable: no waypoint path from start to goal")]
    Unreachable,
    #[error("infeasible waypoint {0}: no candidate turn reaches it")]
    InfeasibleWaypoint(usize),
    #[error("depleted particles at waypoint {0}: no sample reached the previous waypoint")]
    DepletedParticles(usize),
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub bins: usize,
    pub theta_max: f64,
    pub turn_step: f64,
    /// Clearance of vertex waypoints from their obstacle.
    pub waypoint_offset: f64,
    pub n_interior: usize,
    pub seed: u64,
    /// Particles per waypoint in the design stage.
    pub samples: usize,
    /// Trials of the final success estimate.
    pub eval_trials: u64,
    pub kinematics: KinematicsConfig,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            bins: 360,
            theta_max: 90f64.to_radians(),
            turn_step: 1f64.to_radians(),
            waypoint_offset: 0.01,
            n_interior: 0,
            seed: 0,
            samples: 1000,
            eval_trials: 10_000,
            kinematics: KinematicsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub sequence: Vec<Vec2>,
    pub design: RobotDesign,
    pub start_heading: f64,
    pub reports: Vec<WaypointReport>,
    /// Turns on the minimum-turn graph path.
    pub path_weight: u32,
    pub estimate: SuccessEstimate,
}

/// Full pipeline: waypoints, graph, minimum-turn sequence, greedy design, final estimate.
pub fn plan(map: &MapModel, u: &UncertaintyModel, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let d = map.success_radius;
    let ws = build_waypoints(map, cfg.waypoint_offset, cfg.n_interior, cfg.seed);
    let graph = build_graph(
        &ws,
        map,
        &GraphConfig {
            kinematics: cfg.kinematics,
            ..GraphConfig::new(cfg.bins, cfg.theta_max, d)
        },
    )?;
    let seq = min_turn_sequence(&graph, &ws)?;
    let longest_leg = seq.leg_lengths.iter().copied().fold(0.0, f64::max);
    let greedy = optimal_design(
        &seq.positions,
        seq.start_heading,
        map,
        u,
        &DesignConfig {
            radius: d,
            samples: cfg.samples,
            theta_max: cfg.theta_max,
            turn_step: cfg.turn_step,
            seed: cfg.seed,
            probe_length: (2.0 * longest_leg + 10.0 * d).min(graph.probe_length),
            kinematics: cfg.kinematics,
        },
    )?;
    let design = RobotDesign::new(greedy.segments, cfg.theta_max)?;
    let mut eval_map = map.clone();
    eval_map.start_angle = Some(greedy.start_heading);
    let estimate = mc_success_with(
        design.segments(),
        &eval_map,
        u,
        &McOptions {
            kinematics: cfg.kinematics,
            ..McOptions::new(cfg.eval_trials, cfg.seed)
        },
    )?;
    Ok(PlanResult {
        sequence: seq.positions,
        design,
        start_heading: greedy.start_heading,
        reports: greedy.reports,
        path_weight: seq.path.weight,
        estimate,
    })
}
