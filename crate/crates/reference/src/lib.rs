//! Fixed-step reference integrator.
//!
//! Grows the robot in small arc-length steps. Free growth is a straight march with an
//! independent segment/edge intersection test; sliding integrates the pivot rotation rate
//! with the midpoint rule and keeps the tip on the contacted edge line. It shares only the
//! model rules (pivot selection, handedness, vertex wedge test) with the event-driven engine.

use vine_nav::geometry::{MapModel, Vec2, EPS_GEOM};
use vine_nav::kinematics::{
    contact_handedness, select_pivot, turn_direction, turn_schedule, ContactFeature, DesignSegment, Handedness,
    PivotKind, PivotPoint, PivotPolicy, RobotState, Termination, TipContact, TurnDirection,
};

#[derive(Debug, Clone, Copy)]
pub struct ReferenceConfig {
    pub step: f64,
    pub policy: PivotPolicy,
    pub eps_perp: f64,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            step: 1e-4,
            policy: PivotPolicy::default(),
            eps_perp: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub state: RobotState,
    pub length: f64,
    pub termination: Termination,
    /// Tip positions after every step.
    pub tip_path: Vec<Vec2>,
    pub contacts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceError {
    DegenerateHeadOn,
    Singular,
    Trapped,
}

#[derive(Debug, Clone, Copy)]
struct Contact {
    obstacle: usize,
    edge: usize,
    tangent: Vec2,
    target: usize,
}

struct Integrator<'m> {
    map: &'m MapModel,
    cfg: ReferenceConfig,
    state: RobotState,
    length: f64,
    contact: Option<Contact>,
    pending: Option<PivotPoint>,
    corners: Vec<(usize, usize)>,
    termination: Option<Termination>,
    tip_path: Vec<Vec2>,
    contacts: usize,
}

pub fn integrate(
    segments: &[DesignSegment],
    map: &MapModel,
    start: Vec2,
    start_angle: f64,
    cfg: &ReferenceConfig,
) -> Result<ReferenceRun, ReferenceError> {
    let mut it = Integrator {
        map,
        cfg: *cfg,
        state: RobotState::at_base(start, start_angle),
        length: 0.0,
        contact: None,
        pending: None,
        corners: Vec::new(),
        termination: None,
        tip_path: vec![start],
        contacts: 0,
    };
    let turns = turn_schedule(segments, 0.0);
    let total: f64 = segments.iter().map(|s| s.length).sum();
    let mut next = 0;
    while it.termination.is_none() {
        while next < turns.len() && turns[next].at_length <= it.length + 1e-12 {
            if turns[next].angle != 0.0 {
                it.evert(turns[next].angle, turns[next].index)?;
            }
            next += 1;
        }
        if it.length >= total - 1e-12 {
            break;
        }
        let limit = turns.get(next).map_or(total, |t| t.at_length.min(total));
        let h = cfg.step.min(limit - it.length);
        if it.contact.is_some() {
            it.slide(h)?;
        } else {
            it.free(h)?;
        }
        it.tip_path.push(it.state.tip);
    }
    Ok(ReferenceRun {
        termination: it.termination.unwrap_or(Termination::LengthReached),
        state: it.state,
        length: it.length,
        tip_path: it.tip_path,
        contacts: it.contacts,
    })
}

/// Outward normal of a counter-clockwise polygon edge direction.
fn outward(d: Vec2) -> Vec2 {
    Vec2::new(d.y, -d.x)
}

fn hand(dir: TurnDirection) -> Handedness {
    match dir {
        TurnDirection::Left => Handedness::Left,
        TurnDirection::Right => Handedness::Right,
    }
}

impl Integrator<'_> {
    fn evert(&mut self, angle: f64, index: usize) -> Result<(), ReferenceError> {
        self.pending = None;
        let tip = self.state.tip;
        if !(self.state.pivots.len() == 1 && self.state.pivots[0].position == tip) {
            self.state.pivots.push(PivotPoint {
                position: tip,
                kind: PivotKind::DesignedTurn { index },
                handedness: if angle > 0.0 { Handedness::Left } else { Handedness::Right },
            });
        }
        self.state.heading = self.state.heading.rotated(angle);
        if let Some(c) = self.contact {
            let poly = &self.map.obstacles[c.obstacle];
            let (a, b) = poly.edge(c.edge);
            let te = (b - a) / (b - a).norm();
            let h = self.state.heading;
            if h.dot(outward(te)) >= -1e-12 {
                self.contact = None;
                self.state.tip_contact = None;
            } else {
                if h.dot(te).abs() < self.cfg.eps_perp.sin() {
                    return Err(ReferenceError::DegenerateHeadOn);
                }
                let (tangent, target) = if h.dot(te) > 0.0 {
                    (te, (c.edge + 1) % poly.len())
                } else {
                    (-te, c.edge)
                };
                self.contact = Some(Contact { tangent, target, ..c });
            }
        }
        Ok(())
    }

    fn free(&mut self, h: f64) -> Result<(), ReferenceError> {
        let from = self.state.tip;
        let dir = self.state.heading;
        // nearest entering crossing of the step with any obstacle edge
        let mut best: Option<(f64, usize, usize)> = None;
        for (oi, poly) in self.map.obstacles.iter().enumerate() {
            for ei in 0..poly.len() {
                let (a, b) = poly.edge(ei);
                let e = b - a;
                let denom = dir.x * e.y - dir.y * e.x;
                if denom >= -1e-15 {
                    continue;
                }
                let ao = a - from;
                let t = (ao.x * e.y - ao.y * e.x) / denom;
                let u = (ao.x * dir.y - ao.y * dir.x) / denom;
                if t > 1e-12 && t <= h && (0.0..=1.0).contains(&u) && best.is_none_or(|(bt, _, _)| t < bt) {
                    best = Some((t, oi, ei));
                }
            }
        }
        let mut travel = best.map_or(h, |(t, _, _)| t);
        let mut out_of_bounds = false;
        if let Some(bounds) = &self.map.bounds {
            let to = from + dir * travel;
            if !bounds.contains(to) {
                let mut t_exit = travel;
                for (lo, hi, o, d) in [
                    (bounds.min.x, bounds.max.x, from.x, dir.x),
                    (bounds.min.y, bounds.max.y, from.y, dir.y),
                ] {
                    if d > 0.0 {
                        t_exit = t_exit.min((hi - o) / d);
                    } else if d < 0.0 {
                        t_exit = t_exit.min((lo - o) / d);
                    }
                }
                travel = t_exit.max(0.0);
                out_of_bounds = true;
            }
        }
        if travel > 0.0 {
            if let Some(p) = self.pending.take() {
                if let PivotKind::Contact { obstacle, .. } = p.kind {
                    self.demote_on(obstacle);
                }
                self.state.pivots.push(p);
            }
        }
        self.state.tip = from + dir * travel;
        self.length += travel;
        if out_of_bounds {
            self.termination = Some(Termination::OutOfBounds);
            return Ok(());
        }
        if let Some((_, oi, ei)) = best {
            let poly = &self.map.obstacles[oi];
            let (a, b) = poly.edge(ei);
            let te = (b - a) / (b - a).norm();
            let along = dir.dot(te);
            if along.abs() < self.cfg.eps_perp.sin() {
                return Err(ReferenceError::DegenerateHeadOn);
            }
            let (tangent, target) = if along > 0.0 {
                (te, (ei + 1) % poly.len())
            } else {
                (-te, ei)
            };
            self.demote_on(oi);
            self.contact = Some(Contact {
                obstacle: oi,
                edge: ei,
                tangent,
                target,
            });
            self.state.tip_contact = Some(TipContact { obstacle: oi, edge: ei });
            self.corners.clear();
            self.contacts += 1;
        }
        Ok(())
    }

    fn rates(heading: Vec2, w: Vec2, t: Vec2) -> Result<(f64, f64), ReferenceError> {
        // theta_dot * (z x w) - v * t = -heading, by Cramer's rule
        let (a11, a21) = (-w.y, w.x);
        let (a12, a22) = (-t.x, -t.y);
        let (b1, b2) = (-heading.x, -heading.y);
        let det = a11 * a22 - a12 * a21;
        if det.abs() < 1e-12 {
            return Err(ReferenceError::Singular);
        }
        Ok(((b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det))
    }

    fn slide(&mut self, h: f64) -> Result<(), ReferenceError> {
        let c = self.contact.expect("in contact");
        let poly = &self.map.obstacles[c.obstacle];
        let vertex = poly.vertex(c.target);
        let t = c.tangent;
        let tip = self.state.tip;
        let to_vertex = (vertex - tip).dot(t);
        if to_vertex <= 1e-12 {
            self.state.tip = vertex;
            return self.at_vertex();
        }
        let e = self.state.heading;
        let p = select_pivot(&self.state, turn_direction(e, t), t, self.map, self.cfg.policy)
            .map_err(|_| ReferenceError::Singular)?;
        let center = self.state.pivots[p].position;
        let (w1, v1) = Self::rates(e, tip - center, t)?;
        // near a pivot switch the tip races along the edge; cap its travel per step too
        let h = h / v1.abs().max(1.0);
        let half_tip = tip + t * (v1 * 0.5 * h);
        let (w2, v2) = Self::rates(e.rotated(w1 * 0.5 * h), half_tip - center, t)?;
        let (mut step, mut reached) = (h, false);
        if v2 * h >= to_vertex {
            step = to_vertex / v2;
            reached = true;
        }
        let before: Vec<Vec2> = self.state.positions()[p..].to_vec();
        let dtheta = w2 * step;
        for pivot in &mut self.state.pivots[p + 1..] {
            pivot.position = pivot.position.rotated_about(center, dtheta);
        }
        let new_tip = if reached { vertex } else { tip + t * (v2 * step) };
        self.state.tip = new_tip;
        let last = self.state.last_pivot();
        self.state.heading = (new_tip - last).normalized().unwrap_or(e.rotated(dtheta));
        self.length += step;
        let after: Vec<Vec2> = self.state.positions()[p..].to_vec();
        self.glance(&before, &after, c.obstacle);
        self.expire();
        if reached && self.termination.is_none() {
            return self.at_vertex();
        }
        Ok(())
    }

    /// Detects obstacle vertices that a moving body segment swept across during the step.
    fn glance(&mut self, before: &[Vec2], after: &[Vec2], tip_obstacle: usize) {
        // a pivot pushed into an edge
        for q in &after[1..after.len() - 1] {
            if self.map.obstacles.iter().any(|o| o.signed_distance(*q) < -1e-9) {
                self.termination = Some(Termination::Wedged);
                return;
            }
        }
        for (oi, poly) in self.map.obstacles.iter().enumerate() {
            for vi in 0..poly.len() {
                let wv = poly.vertex(vi);
                for j in 0..after.len() - 1 {
                    let (a0, b0) = (before[j], before[j + 1]);
                    let (a1, b1) = (after[j], after[j + 1]);
                    let s0 = (b0 - a0).cross(wv - a0);
                    let s1 = (b1 - a1).cross(wv - a1);
                    let ab = b1 - a1;
                    let u = (wv - a1).dot(ab) / ab.norm_sq();
                    // a vertex already on the segment only counts if the motion pushes the body into it
                    let crossed = if s0.abs() <= 1e-12 * (b0 - a0).norm() {
                        poly.segment_penetrates(a1, b1, EPS_GEOM)
                    } else {
                        s0 * s1 < 0.0
                    };
                    if crossed && u > 1e-9 && u < 1.0 - 1e-9 && (wv - a1).cross(ab).abs() < 1e-2 * ab.norm() {
                        if oi == tip_obstacle {
                            self.termination = Some(Termination::Wedged);
                            return;
                        }
                        let dir = ab / ab.norm();
                        let handedness = hand(contact_handedness(poly, vi, dir));
                        self.demote_on(oi);
                        let positions = self.state.positions();
                        let Some(k) = positions.windows(2).position(|w| w[0] == a1 && w[1] == b1) else {
                            continue;
                        };
                        self.state.pivots.insert(
                            k + 1,
                            PivotPoint {
                                position: wv,
                                kind: PivotKind::Contact {
                                    obstacle: oi,
                                    feature: ContactFeature::Vertex(vi),
                                },
                                handedness,
                            },
                        );
                        self.contacts += 1;
                        return;
                    }
                }
            }
        }
    }

    fn at_vertex(&mut self) -> Result<(), ReferenceError> {
        let c = self.contact.expect("in contact");
        let poly = &self.map.obstacles[c.obstacle];
        let vi = c.target;
        if self.corners.contains(&(c.obstacle, vi)) {
            return Err(ReferenceError::Trapped);
        }
        self.corners.push((c.obstacle, vi));
        let h = self.state.heading;
        let v = poly.vertex(vi);
        let n = poly.len();
        if poly.enters_at_vertex(vi, h) {
            let forward = vi == (c.edge + 1) % n;
            let (edge, other) = if forward { (vi, (vi + 1) % n) } else { ((vi + n - 1) % n, (vi + n - 1) % n) };
            let tangent = (poly.vertex(other) - v) / (poly.vertex(other) - v).norm();
            if h.dot(tangent) > self.cfg.eps_perp.sin() {
                self.contact = Some(Contact {
                    obstacle: c.obstacle,
                    edge,
                    tangent,
                    target: other,
                });
                self.state.tip_contact = Some(TipContact {
                    obstacle: c.obstacle,
                    edge,
                });
            } else {
                self.termination = Some(Termination::Wedged);
            }
            return Ok(());
        }
        self.contact = None;
        self.state.tip_contact = None;
        self.pending = Some(PivotPoint {
            position: v,
            kind: PivotKind::Contact {
                obstacle: c.obstacle,
                feature: ContactFeature::Vertex(vi),
            },
            handedness: hand(contact_handedness(poly, vi, h)),
        });
        Ok(())
    }

    fn bend(&self, i: usize) -> f64 {
        self.state.joint_angle(i)
    }

    fn demote_on(&mut self, o: usize) {
        for i in (1..self.state.pivots.len()).rev() {
            if matches!(self.state.pivots[i].kind, PivotKind::Contact { obstacle, .. } if obstacle == o) {
                self.demote(i);
            }
        }
    }

    fn demote(&mut self, i: usize) {
        let angle = self.bend(i);
        if angle.abs() < 1e-6 {
            self.state.pivots.remove(i);
        } else {
            self.state.pivots[i].kind = PivotKind::Kink;
            self.state.pivots[i].handedness = if angle > 0.0 { Handedness::Left } else { Handedness::Right };
        }
    }

    fn expire(&mut self) {
        for i in (1..self.state.pivots.len()).rev() {
            let p = self.state.pivots[i];
            match p.kind {
                PivotKind::Contact { obstacle, .. } => {
                    if self.map.obstacles[obstacle].signed_distance(p.position) > EPS_GEOM {
                        self.demote(i);
                    }
                }
                PivotKind::Kink if self.bend(i).abs() < 1e-6 => {
                    self.state.pivots.remove(i);
                }
                _ => {}
            }
        }
    }
}

pub mod cases {
    //! Random (map, design) pairs for equivalence testing.

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use vine_nav::geometry::{Bounds, MapModel, Polygon, Vec2};
    use vine_nav::kinematics::{deploy_with, DeploymentTrace, DesignSegment, KinematicsConfig, TraceEvent};

    #[derive(Debug, Clone)]
    pub struct Case {
        pub seed: u64,
        pub map: MapModel,
        pub segments: Vec<DesignSegment>,
        pub start: Vec2,
        pub start_angle: f64,
    }

    fn random_polygon(rng: &mut ChaCha8Rng, center: Vec2, radius: f64) -> Option<Polygon> {
        let n = rng.random_range(3..=6);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let pts = angles
            .iter()
            .map(|&a| center + Vec2::from_angle(a) * (radius * rng.random_range(0.6..1.0)))
            .collect();
        let poly = Polygon::new(pts).ok()?;
        // skip slivers
        (poly.area() > 0.3 * radius * radius).then_some(poly)
    }

    /// A random map with 5 to 9 obstacles ahead of a start on the left, and a 1 to 3
    /// segment design.
    pub fn random_case(seed: u64) -> Option<Case> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bounds = Bounds::new(Vec2::new(-3.0, -3.0), Vec2::new(3.0, 3.0)).ok()?;
        let mut obstacles: Vec<Polygon> = Vec::new();
        let count = rng.random_range(5..=9);
        for _ in 0..80 {
            if obstacles.len() == count {
                break;
            }
            let c = Vec2::new(rng.random_range(-1.5..2.5), rng.random_range(-2.3..2.3));
            let radius = rng.random_range(0.2..0.6);
            let Some(p) = random_polygon(&mut rng, c, radius) else {
                continue;
            };
            let mut trial = obstacles.clone();
            trial.push(p);
            let map = MapModel::new(Some(bounds), trial.clone(), Vec2::new(-2.5, 0.0), None, Vec2::ZERO, 0.05);
            if map.is_ok() && trial.iter().all(|o| o.signed_distance(Vec2::new(-2.5, 0.0)) > 0.3) {
                obstacles = trial;
            }
        }
        let map = MapModel::new(Some(bounds), obstacles, Vec2::new(-2.5, 0.0), None, Vec2::new(2.5, 0.0), 0.05).ok()?;
        let start_angle = rng.random_range(-0.6..0.6);
        let segs = rng.random_range(1..=3);
        let segments = (0..segs)
            .map(|i| {
                let turn = if i == 0 { 0.0 } else { rng.random_range(-0.7..0.7) };
                DesignSegment::new(rng.random_range(1.0..2.5), turn)
            })
            .collect();
        Some(Case {
            seed,
            start: map.start,
            map,
            segments,
            start_angle,
        })
    }

    /// Rejects cases whose event-driven trace sits near a discontinuity of the model:
    /// near-perpendicular contacts, contacts landing near a vertex, or tips grazing a vertex.
    pub fn well_conditioned(case: &Case, trace: &DeploymentTrace) -> bool {
        let near_vertex = |p: Vec2, tol: f64| {
            case.map
                .obstacles
                .iter()
                .any(|o| o.vertices().iter().any(|&v| v.distance(p) < tol))
        };
        for ev in &trace.events {
            match ev {
                TraceEvent::ContactStart { hit, .. } => {
                    let e = trace.tip_path.iter().find(|s| s.point == hit.point).map(|s| s.heading);
                    if let Some(e) = e {
                        if e.dot(hit.tangent).abs() < 5f64.to_radians().sin() {
                            return false;
                        }
                    }
                    if near_vertex(hit.point, 5e-3) {
                        return false;
                    }
                }
                TraceEvent::FreeGrowth { from, to } => {
                    for o in &case.map.obstacles {
                        for &v in o.vertices() {
                            let d = vine_nav::geometry::point_segment_distance(v, *from, *to);
                            let at_end = v.distance(*from) < 1e-9 || v.distance(*to) < 1e-9;
                            if d < 5e-3 && !at_end {
                                return false;
                            }
                        }
                    }
                }
                TraceEvent::TurnEverted { at, .. }
                    // turns everted while touching or right next to an obstacle
                    if case.map.obstacles.iter().any(|o| o.boundary_distance(*at) < 5e-3) => {
                        return false;
                    }
                _ => {}
            }
        }
        true
    }

    /// The first `n` well-conditioned cases with at least one contact, starting from `seed`.
    pub fn corpus(seed: u64, n: usize) -> Vec<(Case, DeploymentTrace)> {
        let cfg = KinematicsConfig::default();
        let mut out = Vec::new();
        let mut s = seed;
        while out.len() < n {
            if let Some(case) = random_case(s) {
                if let Ok(trace) = deploy_with(&case.segments, &case.map, case.start, case.start_angle, &cfg) {
                    if trace.contact_events() > 0 && well_conditioned(&case, &trace) {
                        out.push((case, trace));
                    }
                }
            }
            s += 1;
        }
        out
    }
}
