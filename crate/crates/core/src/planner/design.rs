use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::geometry::{MapModel, Vec2};
use crate::kinematics::{first_pass, DesignSegment, Grower, KinematicsConfig, Pass, ScheduledTurn, TraceEvent};
use crate::uncertainty::{sample_segments, trial_rng, UncertaintyModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    /// Arrival radius around every waypoint.
    pub radius: f64,
    /// Particles per waypoint.
    pub samples: usize,
    pub theta_max: f64,
    /// Spacing of the candidate turn angles.
    pub turn_step: f64,
    pub seed: u64,
    /// Longest continuation grown while looking for the next waypoint.
    pub probe_length: f64,
    pub kinematics: KinematicsConfig,
}

/// What the greedy step decided at one waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaypointReport {
    pub position: Vec2,
    /// Turn chosen on leaving the previous waypoint; zero means no designed turn.
    pub turn: f64,
    /// Fraction of surviving particles that reached this waypoint.
    pub success: f64,
    pub survivors: usize,
    /// Mean robot length at the closest approach to this waypoint.
    pub arrival_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyDesign {
    pub segments: Vec<DesignSegment>,
    pub start_heading: f64,
    pub reports: Vec<WaypointReport>,
}

/// Candidate turns ordered by magnitude, so ties favor no turn and then small turns.
pub fn turn_candidates(theta_max: f64, step: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if step > 0.0 {
        let n = (theta_max / step + 1e-9).floor() as usize;
        for k in 1..=n {
            out.push(k as f64 * step);
            out.push(-(k as f64) * step);
        }
    }
    out
}

struct Particle<'m> {
    grower: Grower<'m>,
    /// Uniform draw in [-1, 1] scaling the angular error of the next turn.
    turn_noise: f64,
}

/// Alternatives tried at one waypoint after its first choice dead-ends further on.
const MAX_ALTERNATIVES: usize = 4;
/// Alternatives tried over a whole design.
const MAX_BACKTRACKS: usize = 16;

/// Greedy particle design through `positions` (start first, goal last).
///
/// At each waypoint the current nominal prefix is sampled, particles that do not end
/// within `radius` of the previous waypoint are dropped, and every candidate turn is
/// scored by the fraction of survivors whose continuation passes the waypoint. The
/// winning turn's segment length is the mean arrival length minus the nominal prefix.
///
/// If no candidate reaches a waypoint, the previous waypoint is retried with its other
/// reaching candidates within a fixed budget.
pub fn optimal_design(
    positions: &[Vec2],
    start_heading: f64,
    map: &MapModel,
    u: &UncertaintyModel,
    cfg: &DesignConfig,
) -> Result<GreedyDesign, PlanError> {
    if positions.len() < 2 {
        return Err(PlanError::InvalidConfig("waypoint sequence needs a start and a goal".into()));
    }
    if cfg.samples == 0 {
        return Err(PlanError::InvalidConfig("samples must be at least 1".into()));
    }
    let search = Search {
        positions,
        start_heading,
        map,
        u,
        cfg,
        candidates: turn_candidates(cfg.theta_max, cfg.turn_step),
    };
    let mut budget = MAX_BACKTRACKS;
    let (segments, reports) = search.descend(1, Vec::new(), Vec::new(), &mut budget)?;
    Ok(GreedyDesign {
        segments,
        start_heading,
        reports,
    })
}

#[derive(Debug, Clone, Copy)]
struct Scored {
    theta: f64,
    hits: usize,
    /// Hits that touched an obstacle on the way to the waypoint.
    touched: usize,
    arrival: f64,
    miss: f64,
}

struct Search<'a> {
    positions: &'a [Vec2],
    start_heading: f64,
    map: &'a MapModel,
    u: &'a UncertaintyModel,
    cfg: &'a DesignConfig,
    candidates: Vec<f64>,
}

impl Search<'_> {
    /// Reaching candidates for waypoint `i`: the greedy choice first, then the rest by
    /// score, contact-free arrivals and closeness of the pass.
    fn rank(&self, i: usize, segments: &[DesignSegment]) -> Result<(Vec<Scored>, usize), PlanError> {
        let (cfg, target) = (self.cfg, self.positions[i]);
        let particles: Vec<Particle> = (0..cfg.samples)
            .into_par_iter()
            .filter_map(|k| {
                let mut rng = trial_rng(cfg.seed, ((i as u64) << 40) | k as u64);
                let sampled = sample_segments(segments, self.u, &mut rng);
                let turn_noise = rng.random_range(-1.0..=1.0);
                let mut g = Grower::new(self.map, self.map.start, self.start_heading, cfg.kinematics).ok()?;
                g.schedule(&sampled, 0.0);
                let total: f64 = sampled.iter().map(|s| s.length).sum();
                g.grow_to(total).ok()?;
                (!g.is_terminated() && g.tip().distance(self.positions[i - 1]) < cfg.radius)
                    .then_some(Particle { grower: g, turn_noise })
            })
            .collect();
        if particles.is_empty() {
            return Err(PlanError::DepletedParticles(i));
        }
        let scores: Vec<Scored> = self
            .candidates
            .par_iter()
            .map(|&theta| {
                let (mut hits, mut touched, mut length, mut miss) = (0, 0, 0.0, 0.0);
                for p in &particles {
                    if let Some(a) = continue_to(p, theta, segments.len(), target, self.u, cfg) {
                        hits += 1;
                        touched += usize::from(a.touched);
                        length += a.length;
                        miss += a.distance;
                    }
                }
                let n = hits.max(1) as f64;
                Scored {
                    theta,
                    hits,
                    touched,
                    arrival: length / n,
                    miss: miss / n,
                }
            })
            .collect();
        let mut best: Option<usize> = None;
        for (c, s) in scores.iter().enumerate() {
            if s.hits > 0 && best.is_none_or(|b| s.hits > scores[b].hits) {
                best = Some(c);
            }
        }
        let Some(b) = best else {
            return Ok((Vec::new(), particles.len()));
        };
        let mut rest: Vec<Scored> = scores
            .iter()
            .enumerate()
            .filter(|&(c, s)| c != b && s.hits > 0)
            .map(|(_, s)| *s)
            .collect();
        rest.sort_by(|x, y| {
            y.hits
                .cmp(&x.hits)
                .then(x.touched.cmp(&y.touched))
                .then(x.miss.total_cmp(&y.miss))
        });
        rest.insert(0, scores[b]);
        Ok((rest, particles.len()))
    }

    fn descend(
        &self,
        i: usize,
        segments: Vec<DesignSegment>,
        reports: Vec<WaypointReport>,
        budget: &mut usize,
    ) -> Result<(Vec<DesignSegment>, Vec<WaypointReport>), PlanError> {
        let (ranked, survivors) = self.rank(i, &segments)?;
        if ranked.is_empty() {
            return Err(PlanError::InfeasibleWaypoint(i));
        }
        let prefix: f64 = segments.iter().map(|s| s.length).sum();
        let mut first_err = None;
        for (k, s) in ranked.iter().enumerate() {
            if k > 0 {
                if k > MAX_ALTERNATIVES || *budget == 0 {
                    break;
                }
                *budget -= 1;
            }
            let mut segs = segments.clone();
            let length = s.arrival - prefix;
            if length > 1e-9 {
                match segs.last_mut() {
                    Some(last) if s.theta == 0.0 => last.length += length,
                    _ => segs.push(DesignSegment::new(length, s.theta)),
                }
            }
            let mut reps = reports.clone();
            reps.push(WaypointReport {
                position: self.positions[i],
                turn: s.theta,
                success: s.hits as f64 / survivors as f64,
                survivors,
                arrival_length: s.arrival,
            });
            if i + 1 == self.positions.len() {
                return Ok((segs, reps));
            }
            match self.descend(i + 1, segs, reps, budget) {
                Ok(done) => return Ok(done),
                Err(e @ (PlanError::InfeasibleWaypoint(_) | PlanError::DepletedParticles(_))) => {
                    first_err.get_or_insert(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(first_err.unwrap_or(PlanError::InfeasibleWaypoint(i + 1)))
    }
}

struct Arrival {
    length: f64,
    distance: f64,
    touched: bool,
}

/// Grows a particle on with the candidate turn and returns its length and distance at
/// the closest approach to `target`, if the continuation passes within the radius.
fn continue_to(
    p: &Particle,
    theta: f64,
    index: usize,
    target: Vec2,
    u: &UncertaintyModel,
    cfg: &DesignConfig,
) -> Option<Arrival> {
    let mut g = p.grower.clone();
    let from = g.length();
    let events = g.events().len();
    if theta != 0.0 {
        g.schedule_turn(ScheduledTurn {
            at_length: from,
            angle: theta + u.sigma_theta * p.turn_noise,
            index,
        });
    }
    let skip = g.tip_path().len() - 1;
    let chunk = (4.0 * cfg.radius).max(0.05);
    let limit = from + cfg.probe_length;
    while g.length() < limit - 1e-12 && !g.is_terminated() {
        let to = (g.length() + chunk).min(limit);
        let failed = g.grow_to(to).is_err();
        let pass = first_pass(&g.tip_path()[skip..], target, cfg.radius);
        if let Some(pass) = pass {
            // the pass is over once the tip has left the disk again
            if failed || g.is_terminated() || g.tip().distance(target) >= cfg.radius {
                return Some(arrival(&g, events, pass));
            }
        }
        if failed {
            return None;
        }
    }
    first_pass(&g.tip_path()[skip..], target, cfg.radius).map(|pass| arrival(&g, events, pass))
}

fn arrival(g: &Grower, events: usize, pass: Pass) -> Arrival {
    let touched = g.events()[events..].iter().any(|e| match e {
        TraceEvent::ContactStart { length, .. } | TraceEvent::GlancingContact { length, .. } => *length <= pass.length,
        _ => false,
    });
    Arrival {
        length: pass.length,
        distance: pass.distance,
        touched,
    }
}
