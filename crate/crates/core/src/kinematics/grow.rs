use serde::{Deserialize, Serialize};

use super::design::{turn_schedule, DesignSegment, RobotDesign, ScheduledTurn};
use super::pivot::{contact_handedness, is_unsupported, select_pivot, turn_direction, PivotPolicy};
use super::trace::{DeploymentTrace, Termination, TipSample, TraceEvent};
use super::{ContactFeature, Handedness, KinematicsError, PivotKind, PivotPoint, RobotState, TipContact, TurnDirection};
use crate::geometry::{
    point_segment_distance, ray_cast, sliding_vertex, vertex_hit, GeometryError, MapModel, RayHit, Surface, Vec2,
    DEFAULT_EPS_PERP, EPS_GEOM,
};

/// Length tolerance for event coincidence, in meters.
pub const LENGTH_TOL: f64 = 1e-9;
/// Joint angles below this magnitude count as straight, in radians.
pub const STRAIGHT_TOL: f64 = 1e-6;

const TOUCH_TOL: f64 = 1e-8;
const SWEEP_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicsConfig {
    pub eps_perp: f64,
    pub policy: PivotPolicy,
    /// Upper bound on processed events per deployment before giving up as trapped.
    pub max_events: usize,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        KinematicsConfig {
            eps_perp: DEFAULT_EPS_PERP,
            policy: PivotPolicy::default(),
            max_events: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Slide {
    obstacle: usize,
    edge: usize,
    /// Edge direction oriented along the slide.
    tangent: Vec2,
    /// Vertex the tip is sliding toward.
    target: usize,
}

/// Event-driven growth engine. Cloning it forks the deployment.
#[derive(Debug, Clone)]
pub struct Grower<'m> {
    map: &'m MapModel,
    cfg: KinematicsConfig,
    state: RobotState,
    length: f64,
    turns: Vec<ScheduledTurn>,
    next_turn: usize,
    pending: Option<PivotPoint>,
    slide: Option<Slide>,
    corners: Vec<(usize, usize)>,
    processed: usize,
    events: Vec<TraceEvent>,
    tip_path: Vec<TipSample>,
    termination: Option<Termination>,
}

impl<'m> Grower<'m> {
    pub fn new(map: &'m MapModel, start: Vec2, start_angle: f64, cfg: KinematicsConfig) -> Result<Self, KinematicsError> {
        if !start.is_finite() || !start_angle.is_finite() {
            return Err(KinematicsError::Geometry(GeometryError::NonFinite));
        }
        if let Some(o) = map.obstacles.iter().position(|o| o.signed_distance(start) < -EPS_GEOM) {
            return Err(KinematicsError::StartInObstacle(o));
        }
        let state = RobotState::at_base(start, start_angle);
        let tip_path = vec![TipSample {
            point: start,
            heading: state.heading,
            length: 0.0,
        }];
        Ok(Grower {
            map,
            cfg,
            state,
            length: 0.0,
            turns: Vec::new(),
            next_turn: 0,
            pending: None,
            slide: None,
            corners: Vec::new(),
            processed: 0,
            events: Vec::new(),
            tip_path,
            termination: None,
        })
    }

    /// Schedules the turns of `segments`, the first one at total length `offset`.
    pub fn schedule(&mut self, segments: &[DesignSegment], offset: f64) {
        for t in turn_schedule(segments, offset) {
            self.schedule_turn(t);
        }
    }

    pub fn schedule_turn(&mut self, turn: ScheduledTurn) {
        let pos = self.turns[self.next_turn..]
            .iter()
            .position(|t| t.at_length > turn.at_length)
            .map_or(self.turns.len(), |i| i + self.next_turn);
        self.turns.insert(pos, turn);
    }

    pub fn map(&self) -> &'m MapModel {
        self.map
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn tip(&self) -> Vec2 {
        self.state.tip
    }

    pub fn heading(&self) -> Vec2 {
        self.state.heading
    }

    pub fn termination(&self) -> Option<Termination> {
        self.termination
    }

    pub fn is_terminated(&self) -> bool {
        self.termination.is_some()
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn tip_path(&self) -> &[TipSample] {
        &self.tip_path
    }

    /// Grows by `delta` meters or until termination.
    pub fn grow(&mut self, delta: f64) -> Result<(), KinematicsError> {
        self.grow_to(self.length + delta)
    }

    /// Grows until the total length reaches `target` or the deployment terminates.
    pub fn grow_to(&mut self, target: f64) -> Result<(), KinematicsError> {
        loop {
            if self.termination.is_some() {
                return Ok(());
            }
            self.processed += 1;
            if self.processed > self.cfg.max_events {
                return Err(KinematicsError::Trapped);
            }
            if let Some(turn) = self.due_turn() {
                self.evert(turn)?;
                continue;
            }
            if self.length >= target - LENGTH_TOL {
                return Ok(());
            }
            let stop = match self.turns.get(self.next_turn) {
                Some(t) => t.at_length.min(target),
                None => target,
            };
            if self.slide.is_some() {
                self.slide_step(stop)?;
            } else {
                self.free_step(stop)?;
            }
        }
    }

    /// Marks the deployment complete at its current length.
    pub fn finish(&mut self) {
        if self.termination.is_none() {
            self.terminate(Termination::LengthReached);
        }
    }

    pub fn trace(&self) -> DeploymentTrace {
        DeploymentTrace {
            events: self.events.clone(),
            tip_path: self.tip_path.clone(),
            final_state: self.state.clone(),
            termination: self.termination,
        }
    }

    pub fn into_trace(self) -> DeploymentTrace {
        DeploymentTrace {
            events: self.events,
            tip_path: self.tip_path,
            final_state: self.state,
            termination: self.termination,
        }
    }

    fn due_turn(&mut self) -> Option<ScheduledTurn> {
        let t = *self.turns.get(self.next_turn)?;
        (t.at_length <= self.length + LENGTH_TOL).then(|| {
            self.next_turn += 1;
            t
        })
    }

    fn terminate(&mut self, reason: Termination) {
        self.termination = Some(reason);
        self.events.push(TraceEvent::Terminated {
            reason,
            length: self.length,
        });
    }

    fn push_sample(&mut self) {
        let sample = TipSample {
            point: self.state.tip,
            heading: self.state.heading,
            length: self.length,
        };
        // collapse collinear free-growth samples
        if let [.., a, b] = self.tip_path.as_slice() {
            if a.heading == b.heading && b.heading == sample.heading && (b.point - a.point).cross(sample.point - b.point) == 0.0 {
                *self.tip_path.last_mut().expect("non-empty") = sample;
                return;
            }
        }
        self.tip_path.push(sample);
    }

    fn evert(&mut self, turn: ScheduledTurn) -> Result<(), KinematicsError> {
        if turn.angle == 0.0 {
            return Ok(());
        }
        let at = self.state.tip;
        self.pending = None;
        if self.state.pivots.len() == 1 && at == self.state.pivots[0].position {
            // a turn at the base only rotates the initial heading
            self.state.heading = self.state.heading.rotated(turn.angle);
        } else {
            self.state.pivots.push(PivotPoint {
                position: at,
                kind: PivotKind::DesignedTurn { index: turn.index },
                handedness: Handedness::of_angle(turn.angle),
            });
            self.state.heading = self.state.heading.rotated(turn.angle);
        }
        self.events.push(TraceEvent::TurnEverted {
            index: turn.index,
            at,
            angle: turn.angle,
            length: self.length,
        });
        self.tip_path.push(TipSample {
            point: at,
            heading: self.state.heading,
            length: self.length,
        });
        if let Some(sl) = self.slide {
            let poly = &self.map.obstacles[sl.obstacle];
            let (a, b) = poly.edge(sl.edge);
            let te = (b - a).normalized().expect("validated polygon edge");
            let outward = -te.perp();
            let h = self.state.heading;
            if h.dot(outward) >= -1e-12 {
                self.slide = None;
                self.state.tip_contact = None;
            } else {
                let along = h.dot(te);
                if along.abs() < self.cfg.eps_perp.sin() {
                    return Err(KinematicsError::DegenerateHeadOn { at });
                }
                let (tangent, target) = if along > 0.0 {
                    (te, poly.next_index(sl.edge))
                } else {
                    (-te, sl.edge)
                };
                self.slide = Some(Slide { tangent, target, ..sl });
            }
        }
        Ok(())
    }

    /// An obstacle the tip is touching and heading into, as a zero-distance hit.
    fn blocking_at_tip(&self) -> Option<RayHit> {
        let tip = self.state.tip;
        let h = self.state.heading;
        for (oi, poly) in self.map.obstacles.iter().enumerate() {
            if poly.boundary_distance(tip) > TOUCH_TOL {
                continue;
            }
            if let Some(vi) = (0..poly.len()).find(|&i| poly.vertex(i).distance(tip) <= TOUCH_TOL) {
                if poly.enters_at_vertex(vi, h) {
                    let mut hit = vertex_hit(poly, vi, h, 0.0, oi);
                    hit.point = tip;
                    return Some(hit);
                }
                continue;
            }
            let edge = (0..poly.len())
                .min_by(|&i, &j| {
                    let (a, b) = poly.edge(i);
                    let (c, d) = poly.edge(j);
                    point_segment_distance(tip, a, b).total_cmp(&point_segment_distance(tip, c, d))
                })
                .expect("polygon has edges");
            let (a, b) = poly.edge(edge);
            let te = (b - a).normalized().expect("validated polygon edge");
            if h.dot(-te.perp()) < -1e-12 {
                return Some(RayHit {
                    point: tip,
                    surface: Surface::Obstacle(oi),
                    edge,
                    tangent: te,
                    distance: 0.0,
                });
            }
        }
        None
    }

    fn free_step(&mut self, stop: f64) -> Result<(), KinematicsError> {
        if let Some(hit) = self.blocking_at_tip() {
            return self.start_contact(hit);
        }
        let remaining = stop - self.length;
        match ray_cast(self.state.tip, self.state.heading, self.map)? {
            Some(hit) if hit.distance <= remaining => {
                self.advance_free(hit.distance, self.length + hit.distance);
                self.state.tip = hit.point;
                match hit.surface {
                    Surface::Bounds => {
                        self.terminate(Termination::OutOfBounds);
                        Ok(())
                    }
                    Surface::Obstacle(_) => self.start_contact(hit),
                }
            }
            _ => {
                self.advance_free(remaining, stop);
                Ok(())
            }
        }
    }

    fn advance_free(&mut self, distance: f64, new_length: f64) {
        if distance <= 0.0 {
            return;
        }
        if let Some(p) = self.pending.take() {
            if let Some(o) = p.contact_obstacle() {
                self.demote_contacts_on(o);
            }
            self.state.pivots.push(p);
        }
        let from = self.state.tip;
        let to = from + self.state.heading * distance;
        self.state.tip = to;
        self.length = new_length;
        match self.events.last_mut() {
            Some(TraceEvent::FreeGrowth { from: f, to: t }) if *t == from && (from - *f).cross(to - from).abs() <= 1e-12 * distance => {
                *t = to;
            }
            _ => self.events.push(TraceEvent::FreeGrowth { from, to }),
        }
        self.push_sample();
    }

    fn start_contact(&mut self, hit: RayHit) -> Result<(), KinematicsError> {
        let Surface::Obstacle(oi) = hit.surface else {
            return Err(KinematicsError::Geometry(GeometryError::NotOnObstacle));
        };
        let (target, tangent) = sliding_vertex(&hit, self.state.heading, self.map, self.cfg.eps_perp).map_err(|e| match e {
            GeometryError::DegenerateHeadOn => KinematicsError::DegenerateHeadOn { at: hit.point },
            other => other.into(),
        })?;
        self.pending = None;
        self.demote_contacts_on(oi);
        self.slide = Some(Slide {
            obstacle: oi,
            edge: hit.edge,
            tangent,
            target,
        });
        self.state.tip_contact = Some(TipContact {
            obstacle: oi,
            edge: hit.edge,
        });
        self.corners.clear();
        self.events.push(TraceEvent::ContactStart {
            hit,
            length: self.length,
        });
        Ok(())
    }

    /// Demotes every contact pivot on obstacle `o`: straight ones are removed, bent ones
    /// become kinks.
    fn demote_contacts_on(&mut self, o: usize) {
        for i in (1..self.state.pivots.len()).rev() {
            if self.state.pivots[i].contact_obstacle() == Some(o) {
                self.demote(i);
            }
        }
    }

    fn demote(&mut self, i: usize) {
        let angle = self.state.joint_angle(i);
        if angle.abs() < STRAIGHT_TOL {
            let pivot = self.state.pivots.remove(i);
            self.events.push(TraceEvent::PivotRemoved { index: i, pivot });
        } else {
            let p = &mut self.state.pivots[i];
            p.kind = PivotKind::Kink;
            p.handedness = Handedness::of_angle(angle);
        }
    }

    /// Drops contact pivots that lifted off their obstacle and kinks that straightened.
    fn expire_pivots(&mut self) {
        for i in (1..self.state.pivots.len()).rev() {
            let p = self.state.pivots[i];
            match p.kind {
                PivotKind::Contact { obstacle, .. } => {
                    if self.map.obstacles[obstacle].signed_distance(p.position) > EPS_GEOM {
                        self.demote(i);
                    }
                }
                PivotKind::Kink
                    if self.state.joint_angle(i).abs() < STRAIGHT_TOL => {
                        let pivot = self.state.pivots.remove(i);
                        self.events.push(TraceEvent::PivotRemoved { index: i, pivot });
                    }
                _ => {}
            }
        }
    }

    fn slide_step(&mut self, stop: f64) -> Result<(), KinematicsError> {
        let sl = self.slide.expect("sliding");
        let t = sl.tangent;
        let vertex = self.map.obstacles[sl.obstacle].vertex(sl.target);
        let q0 = self.state.tip;
        let s_vertex = (vertex - q0).dot(t);
        if s_vertex <= LENGTH_TOL {
            self.state.tip = vertex;
            return self.at_vertex();
        }
        let e = self.state.heading;
        let turn = turn_direction(e, t);
        let p = select_pivot(&self.state, turn, t, self.map, self.cfg.policy)?;
        let arc = SlideArc::new(&self.state, p, t, self.length);
        if arc.w0.dot(e) <= 0.0 {
            return Err(KinematicsError::SingularContact);
        }
        let s_length = arc.s_for_growth(stop - self.length);
        let (s_end, at_vertex) = if s_vertex <= s_length {
            (s_vertex, true)
        } else {
            (s_length, false)
        };
        let switch = self.pivot_switch(&arc, turn, s_end);
        let (s_end, at_vertex) = match switch {
            Some(s) => (s, false),
            None => (s_end, at_vertex),
        };

        let penetrated = (1..=SWEEP_SAMPLES)
            .map(|k| s_end * k as f64 / SWEEP_SAMPLES as f64)
            .enumerate()
            .find(|&(_, s)| self.body_penetration(&arc, s).is_some());
        if let Some((k, s_hit)) = penetrated {
            let mut lo = s_end * k as f64 / SWEEP_SAMPLES as f64;
            let mut hi = s_hit;
            for _ in 0..100 {
                if hi - lo <= 1e-13 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if self.body_penetration(&arc, mid).is_some() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let obstacle = self.body_penetration(&arc, hi).expect("penetrates at upper bracket");
            self.apply_slide(&arc, lo, sl, p, None);
            self.expire_pivots();
            return self.glancing_contact(p, obstacle, sl.obstacle);
        }

        let snap = if at_vertex || switch.is_some() { None } else { Some(stop) };
        self.apply_slide(&arc, s_end, sl, p, snap);
        if at_vertex {
            self.state.tip = vertex;
        }
        self.expire_pivots();
        Ok(())
    }

    fn apply_slide(&mut self, arc: &SlideArc, s: f64, sl: Slide, p: usize, snap_length: Option<f64>) {
        let (angle, l) = arc.at(s);
        let center = arc.center;
        for pivot in &mut self.state.pivots[p + 1..] {
            pivot.position = pivot.position.rotated_about(center, angle);
        }
        let q0 = self.state.tip;
        let q = arc.q0 + arc.t * s;
        self.state.tip = q;
        self.state.heading = arc.e.rotated(angle);
        self.length = snap_length.unwrap_or(arc.length0 + (l - arc.l0));
        match self.events.last_mut() {
            Some(TraceEvent::Slide {
                pivot,
                obstacle,
                edge,
                path,
            }) if *pivot == p && *obstacle == sl.obstacle && *edge == sl.edge && path.last() == Some(&q0) => {
                path.push(q);
            }
            _ => self.events.push(TraceEvent::Slide {
                pivot: p,
                obstacle: sl.obstacle,
                edge: sl.edge,
                path: vec![q0, q],
            }),
        }
        self.tip_path.push(TipSample {
            point: q,
            heading: self.state.heading,
            length: self.length,
        });
    }

    /// Where a pivot the policy prefers over the current one becomes able to drive the
    /// slide, if that happens before `s_end`.
    fn pivot_switch(&self, arc: &SlideArc, turn: TurnDirection, s_end: f64) -> Option<f64> {
        let p = arc.pivot;
        let n = self.state.pivots.len();
        let preferred = match self.cfg.policy {
            PivotPolicy::MostProximalUnsupported if p == 0 => 1..n,
            PivotPolicy::MostProximalUnsupported => 1..p,
            PivotPolicy::MostDistalMatching => p + 1..n,
        };
        let mut first: Option<f64> = None;
        for k in preferred {
            if !self.state.pivots[k].handedness.matches(turn) || self.feasibility(arc, k, 0.0) >= -EPS_GEOM {
                continue;
            }
            if self.cfg.policy == PivotPolicy::MostProximalUnsupported && !is_unsupported(&self.state, k, turn, self.map) {
                continue;
            }
            if self.feasibility(arc, k, s_end) < 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (0.0, s_end);
            for _ in 0..100 {
                if hi - lo <= 1e-13 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if self.feasibility(arc, k, mid) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if first.is_none_or(|f| hi < f) {
                first = Some(hi);
            }
        }
        first
    }

    /// Tip advance along the slide tangent relative to pivot `k`, at slide parameter `s`.
    fn feasibility(&self, arc: &SlideArc, k: usize, s: f64) -> f64 {
        let tip = arc.q0 + arc.t * s;
        let c = if k <= arc.pivot {
            self.state.pivots[k].position
        } else {
            self.state.pivots[k].position.rotated_about(arc.center, arc.at(s).0)
        };
        (tip - c).dot(arc.t)
    }

    /// Body points from the slide pivot to the tip at slide parameter `s`.
    fn body_at(&self, arc: &SlideArc, s: f64) -> Vec<Vec2> {
        let (angle, _) = arc.at(s);
        std::iter::once(arc.center)
            .chain(
                self.state.pivots[arc.pivot + 1..]
                    .iter()
                    .map(|p| p.position.rotated_about(arc.center, angle)),
            )
            .chain(std::iter::once(arc.q0 + arc.t * s))
            .collect()
    }

    fn body_penetration(&self, arc: &SlideArc, s: f64) -> Option<usize> {
        let body = self.body_at(arc, s);
        body.windows(2).find_map(|w| {
            self.map
                .obstacles
                .iter()
                .position(|o| o.segment_penetrates(w[0], w[1], EPS_GEOM))
        })
    }

    /// The body swept into `obstacle`: record the vertex it rests on as a new contact pivot.
    fn glancing_contact(&mut self, p: usize, obstacle: usize, tip_obstacle: usize) -> Result<(), KinematicsError> {
        if obstacle == tip_obstacle {
            self.terminate(Termination::Wedged);
            return Ok(());
        }
        let poly = &self.map.obstacles[obstacle];
        let body: Vec<Vec2> = self.state.positions()[p..].to_vec();
        let mut best: Option<(f64, usize, usize)> = None;
        for vi in 0..poly.len() {
            let v = poly.vertex(vi);
            for (j, w) in body.windows(2).enumerate() {
                if v.distance(w[0]) <= EPS_GEOM || v.distance(w[1]) <= EPS_GEOM {
                    continue;
                }
                let d = point_segment_distance(v, w[0], w[1]);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, vi, j));
                }
            }
        }
        let Some((d, vi, j)) = best else {
            self.terminate(Termination::Wedged);
            return Ok(());
        };
        let v = poly.vertex(vi);
        let (a, b) = (body[j], body[j + 1]);
        if d > 1e-6 {
            // a pivot or the tip is pressed into an edge
            self.terminate(Termination::Wedged);
            return Ok(());
        }
        let dir = (b - a).normalized().expect("nondegenerate body segment");
        let hand = contact_handedness(poly, vi, dir);
        self.demote_contacts_on(obstacle);
        // demotion may have removed a pivot next to the vertex
        let positions = self.state.positions();
        let j = (0..positions.len() - 1)
            .min_by(|&i, &k| {
                point_segment_distance(v, positions[i], positions[i + 1])
                    .total_cmp(&point_segment_distance(v, positions[k], positions[k + 1]))
            })
            .expect("body has a segment");
        let pivot = PivotPoint {
            position: v,
            kind: PivotKind::Contact {
                obstacle,
                feature: ContactFeature::Vertex(vi),
            },
            handedness: match hand {
                TurnDirection::Left => Handedness::Left,
                TurnDirection::Right => Handedness::Right,
            },
        };
        self.state.pivots.insert(j + 1, pivot);
        self.events.push(TraceEvent::GlancingContact {
            obstacle,
            pivot,
            length: self.length,
        });
        Ok(())
    }

    fn at_vertex(&mut self) -> Result<(), KinematicsError> {
        let sl = self.slide.expect("sliding");
        let poly = &self.map.obstacles[sl.obstacle];
        let vi = sl.target;
        if self.corners.contains(&(sl.obstacle, vi)) {
            return Err(KinematicsError::Trapped);
        }
        self.corners.push((sl.obstacle, vi));
        let h = self.state.heading;
        let v = poly.vertex(vi);
        if poly.enters_at_vertex(vi, h) {
            let forward = vi == poly.next_index(sl.edge);
            let (edge, other) = if forward {
                (vi, poly.next_index(vi))
            } else {
                let prev = poly.prev_index(vi);
                (prev, prev)
            };
            let tangent = (poly.vertex(other) - v).normalized().expect("validated polygon edge");
            if h.dot(tangent) > self.cfg.eps_perp.sin() {
                self.slide = Some(Slide {
                    obstacle: sl.obstacle,
                    edge,
                    tangent,
                    target: other,
                });
                self.state.tip_contact = Some(TipContact {
                    obstacle: sl.obstacle,
                    edge,
                });
            } else {
                self.terminate(Termination::Wedged);
            }
            return Ok(());
        }
        self.slide = None;
        self.state.tip_contact = None;
        let handedness = match contact_handedness(poly, vi, h) {
            TurnDirection::Left => Handedness::Left,
            TurnDirection::Right => Handedness::Right,
        };
        let pivot = PivotPoint {
            position: v,
            kind: PivotKind::Contact {
                obstacle: sl.obstacle,
                feature: ContactFeature::Vertex(vi),
            },
            handedness,
        };
        self.pending = Some(pivot);
        self.events.push(TraceEvent::ContactEnd {
            obstacle: sl.obstacle,
            pivot,
            length: self.length,
        });
        Ok(())
    }
}

/// Closed-form configuration of a slide: the tip moves along `t` from `q0` while the
/// body distal to `center` rotates rigidly and the distal segment lengthens.
#[derive(Debug, Clone, Copy)]
struct SlideArc {
    pivot: usize,
    center: Vec2,
    q0: Vec2,
    t: Vec2,
    e: Vec2,
    /// Last pivot relative to the rotation center.
    r: Vec2,
    l0: f64,
    w0: Vec2,
    length0: f64,
}

impl SlideArc {
    fn new(state: &RobotState, p: usize, t: Vec2, length0: f64) -> Self {
        let center = state.pivots[p].position;
        let last = state.last_pivot();
        SlideArc {
            pivot: p,
            center,
            q0: state.tip,
            t,
            e: state.heading,
            r: last - center,
            l0: (state.tip - last).dot(state.heading).max(0.0),
            w0: state.tip - center,
            length0,
        }
    }

    /// Slide distance at which the distal segment has grown by `dl`.
    fn s_for_growth(&self, dl: f64) -> f64 {
        let rho2 = (self.r + self.e * (self.l0 + dl)).norm_sq();
        let wt = self.w0.dot(self.t);
        let disc = wt * wt - self.w0.norm_sq() + rho2;
        (-wt + disc.max(0.0).sqrt()).max(0.0)
    }

    /// Rotation about the center and distal segment length at slide distance `s`.
    fn at(&self, s: f64) -> (f64, f64) {
        if s == 0.0 {
            return (0.0, self.l0);
        }
        let after = self.w0 + self.t * s;
        let re = self.r.dot(self.e);
        let disc = re * re - self.r.norm_sq() + after.norm_sq();
        let l = -re + disc.max(0.0).sqrt();
        let before = self.r + self.e * l;
        (before.angle_to(after), l)
    }
}

/// Deploys `design` from `start` with initial heading `start_angle` (radians).
pub fn deploy(design: &RobotDesign, map: &MapModel, start: Vec2, start_angle: f64) -> Result<DeploymentTrace, KinematicsError> {
    deploy_with(design.segments(), map, start, start_angle, &KinematicsConfig::default())
}

pub fn deploy_with(
    segments: &[DesignSegment],
    map: &MapModel,
    start: Vec2,
    start_angle: f64,
    cfg: &KinematicsConfig,
) -> Result<DeploymentTrace, KinematicsError> {
    let mut g = Grower::new(map, start, start_angle, *cfg)?;
    g.schedule(segments, 0.0);
    let total: f64 = segments.iter().map(|s| s.length).sum();
    g.grow_to(total)?;
    g.finish();
    Ok(g.into_trace())
}
