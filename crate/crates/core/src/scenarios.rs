//! Built-in maps and designs used by the acceptance suite, the CLI and the benches.

use std::f64::consts::FRAC_PI_2;

use crate::geometry::{Bounds, MapModel, Polygon, Vec2};
use crate::kinematics::{DesignSegment, RobotDesign};

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    Polygon::rectangle(Vec2::new(x0, y0), Vec2::new(x1, y1)).expect("valid rectangle")
}

fn poly(points: &[(f64, f64)]) -> Polygon {
    Polygon::new(points.iter().map(|&(x, y)| Vec2::new(x, y)).collect()).expect("valid polygon")
}

/// Heading for an approach angle measured from the wall normal, positive toward the
/// robot's right (clockwise), for a robot facing +y.
pub fn approach_heading(approach: f64) -> f64 {
    FRAC_PI_2 - approach
}

/// A long straight wall at `y = distance` in front of a robot at the origin facing +y.
pub fn wall(distance: f64) -> MapModel {
    let half = 50.0 * distance;
    MapModel {
        bounds: None,
        obstacles: vec![rect(-half, distance, half, distance + 0.05)],
        start: Vec2::ZERO,
        start_angle: Some(FRAC_PI_2),
        goal: Vec2::new(0.0, distance / 2.0),
        success_radius: 0.05,
    }
}

pub const HOLE_WIDTH: f64 = 0.065;
pub const HOLE_WALL_DISTANCE: f64 = 2.0;
pub const HOLE_WALL_THICKNESS: f64 = 0.05;

/// Wall at `y = wall_distance` with a hole of [`HOLE_WIDTH`] centred at `x = offset`; the
/// robot starts at the origin, the foot of the perpendicular to the wall. Growth stops
/// 0.3 m behind the wall, and the goal disk covers everything reachable there through the
/// hole, so reaching the goal is the same as passing the hole.
pub fn hole_in_wall(offset: f64, wall_distance: f64) -> MapModel {
    let (y0, y1) = (wall_distance, wall_distance + HOLE_WALL_THICKNESS);
    let reach = 4.0 * (offset.abs() + wall_distance);
    let (left, right) = (offset - HOLE_WIDTH / 2.0, offset + HOLE_WIDTH / 2.0);
    MapModel {
        bounds: Some(Bounds::new(Vec2::new(-reach - 1.0, -1.0), Vec2::new(reach + 1.0, y1 + 0.3)).expect("bounds")),
        obstacles: vec![rect(-reach, y0, left, y1), rect(right, y0, reach, y1)],
        start: Vec2::ZERO,
        start_angle: Some(FRAC_PI_2),
        goal: Vec2::new(offset, y1 + 1.0),
        success_radius: 1.0,
    }
}

/// Whether a tip position has passed through the hole of a [`hole_in_wall`] map.
pub fn passed_hole(tip: Vec2, wall_distance: f64) -> bool {
    tip.y > wall_distance + HOLE_WALL_THICKNESS
}

/// Robot with a left and then a right designed turn, grown into a wall that turns it
/// left. The distal turn is right-handed, so the wall pivots the robot about the left
/// turn one joint further in.
pub fn pivot_shift() -> (MapModel, RobotDesign) {
    let map = MapModel {
        bounds: None,
        obstacles: vec![poly(&[(0.95, 0.27), (0.993, 0.245), (1.393, 0.938), (1.35, 0.963)])],
        start: Vec2::ZERO,
        start_angle: Some(0.0),
        goal: Vec2::new(1.0, 1.5),
        success_radius: 0.05,
    };
    let design = RobotDesign::new(
        vec![
            DesignSegment::new(0.4, 0.0),
            DesignSegment::new(0.4, 60f64.to_radians()),
            DesignSegment::new(0.8, -40f64.to_radians()),
        ],
        FRAC_PI_2,
    )
    .expect("valid design");
    (map, design)
}

/// Exit gaps of the [`course`], numbered from the lower left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exit {
    pub label: u8,
    pub min: Vec2,
    pub max: Vec2,
}

impl Exit {
    pub fn contains(&self, p: Vec2) -> bool {
        let tol = 1e-6;
        p.x >= self.min.x - tol && p.x <= self.max.x + tol && p.y >= self.min.y - tol && p.y <= self.max.y + tol
    }
}

pub struct Course {
    pub map: MapModel,
    pub exits: Vec<Exit>,
    /// Straight robot long enough to leave through any exit.
    pub design: RobotDesign,
    /// Start-angle sweep range in radians.
    pub sweep: (f64, f64),
}

impl Course {
    /// Label of the exit through which a tip path first leaves the course rectangle.
    pub fn exit_of(&self, path: &[Vec2]) -> Option<u8> {
        let tol = 1e-6;
        let inside = |p: Vec2| {
            p.x >= -tol && p.x <= COURSE_WIDTH + tol && p.y >= -tol && p.y <= COURSE_HEIGHT + tol
        };
        let w = path.windows(2).find(|w| inside(w[0]) && !inside(w[1]))?;
        let (a, b) = (w[0], w[1]);
        let on_boundary = a.x <= tol || a.x >= COURSE_WIDTH - tol || a.y <= tol || a.y >= COURSE_HEIGHT - tol;
        if on_boundary {
            return self.exits.iter().find(|e| e.contains(a)).map(|e| e.label);
        }
        // parameter where the segment meets the rectangle boundary
        let mut s: f64 = 1.0;
        for (from, to, bound) in [(a.x, b.x, 0.0), (a.x, b.x, COURSE_WIDTH), (a.y, b.y, 0.0), (a.y, b.y, COURSE_HEIGHT)] {
            if (to - bound) * (from - bound) < 0.0 || to == bound {
                s = s.min((bound - from) / (to - from));
            }
        }
        let crossing = a.lerp(b, s.clamp(0.0, 1.0));
        self.exits.iter().find(|e| e.contains(crossing)).map(|e| e.label)
    }
}

pub const COURSE_WIDTH: f64 = 1.22;
pub const COURSE_HEIGHT: f64 = 0.92;

/// Walled 1.22 m x 0.92 m obstacle course with four exits. The robot starts near the
/// top and is swept over downward start angles.
pub fn course() -> Course {
    Course::with_obstacles(vec![
        poly(&[(0.63, 0.45), (0.75, 0.45), (0.69, 0.52)]),
        poly(&[(0.31, 0.51), (0.30, 0.50), (0.46, 0.34), (0.47, 0.35)]),
        poly(&[(0.92, 0.51), (0.63, 0.39), (0.64, 0.37), (0.93, 0.49)]),
        poly(&[(0.55, 0.64), (0.50, 0.68), (0.49, 0.61)]),
    ])
}

impl Course {
    /// The walled course frame and its four exits around the given inner obstacles.
    pub fn with_obstacles(inner: Vec<Polygon>) -> Course {
        let (w, h, t) = (COURSE_WIDTH, COURSE_HEIGHT, 0.03);
        let margin = 0.15;
        let mut obstacles = vec![
            // left wall, top and right wall in one piece, open at both lower corners
            poly(&[
                (-t, 0.1),
                (0.0, 0.1),
                (0.0, h),
                (w, h),
                (w, 0.1),
                (w + t, 0.1),
                (w + t, h + t),
                (-t, h + t),
            ]),
            rect(0.1, -t, 0.4, 0.0),
            rect(0.47, -t, 0.75, 0.0),
            rect(0.82, -t, w - 0.1, 0.0),
        ];
        obstacles.extend(inner);
        let gate = |label, min: (f64, f64), max: (f64, f64)| Exit {
            label,
            min: Vec2::new(min.0, min.1),
            max: Vec2::new(max.0, max.1),
        };
        let exits = vec![
            gate(1, (-margin, -margin), (0.1, 0.1)),
            gate(2, (0.4, -margin), (0.47, 0.0)),
            gate(3, (0.75, -margin), (0.82, 0.0)),
            gate(4, (w - 0.1, -margin), (w + margin, 0.1)),
        ];
        Course {
            map: MapModel {
                bounds: Some(Bounds::new(Vec2::new(-margin, -margin), Vec2::new(w + margin, h + margin)).expect("bounds")),
                obstacles,
                start: Vec2::new(w / 2.0, h - 0.04),
                start_angle: None,
                goal: Vec2::new(w / 2.0, 0.0),
                success_radius: 0.05,
            },
            exits,
            design: RobotDesign::straight(4.0).expect("valid design"),
            sweep: (-175f64.to_radians(), -5f64.to_radians()),
        }
    }
}

pub const MAZE_SUCCESS_RADIUS: f64 = 0.05;

/// Two chambers, one above the other, joined by a passage along the left wall. The start
/// is in the upper left of the top chamber and the goal in the lower right of the bottom
/// chamber, 4 cm above the floor.
pub fn maze() -> MapModel {
    MapModel {
        bounds: Some(Bounds::new(Vec2::new(-0.1, -0.1), Vec2::new(2.1, 1.3)).expect("bounds")),
        obstacles: vec![
            // ceiling, upper right wall and divider
            poly(&[
                (0.06, 1.15),
                (1.95, 1.15),
                (1.95, 0.6),
                (0.6, 0.6),
                (0.6, 0.55),
                (2.0, 0.55),
                (2.0, 1.2),
                (0.06, 1.2),
            ]),
            // floor and lower right wall
            poly(&[(0.06, 0.0), (2.0, 0.0), (2.0, 0.5), (1.95, 0.5), (1.95, 0.05), (0.06, 0.05)]),
            // left wall, clear of the ceiling and the floor
            rect(0.0, 0.1, 0.05, 1.1),
        ],
        start: Vec2::new(0.2, 1.0),
        start_angle: None,
        goal: Vec2::new(1.8, 0.09),
        success_radius: MAZE_SUCCESS_RADIUS,
    }
}

/// Hand-made design for [`maze`] that keeps clear of every wall: straight down the middle
/// of the passage, then one left turn toward the goal. Returns the design and its start
/// heading.
pub fn maze_avoidance_design() -> (RobotDesign, f64) {
    let map = maze();
    let bend = Vec2::new(0.325, 0.3);
    let first = bend - map.start;
    let second = map.goal - bend;
    let heading = first.angle();
    let turn = second.angle() - heading;
    let design = RobotDesign::new(
        vec![DesignSegment::new(first.norm(), 0.0), DesignSegment::new(second.norm(), turn)],
        FRAC_PI_2,
    )
    .expect("valid design");
    (design, heading)
}
