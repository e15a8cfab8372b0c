//! Lumped-parameter growth model: pivots, conversions, contact sliding and the
//! event-driven deployment integrator.

mod design;
mod grow;
mod pivot;
mod state;
mod trace;

pub use design::{turn_schedule, DesignSegment, RobotDesign, ScheduledTurn};
pub use grow::{deploy, deploy_with, Grower, KinematicsConfig, LENGTH_TOL, STRAIGHT_TOL};
pub use pivot::{
    contact_handedness, contact_slide_rate, is_unsupported, select_pivot, turn_direction, PivotPolicy,
    UNSUPPORTED_ROTATION,
};
pub use state::{
    to_cartesian, to_cartesian_from, to_joint, ContactFeature, Handedness, Joint, JointState, PivotKind, PivotPoint,
    RobotState, TipContact, TurnDirection,
};
pub use trace::{first_pass, DeploymentTrace, Pass, Termination, TipSample, TraceEvent};

use thiserror::Error;

use crate::geometry::{GeometryError, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("coincident pivots at segment {0}")]
    CoincidentPivots(usize),
    #[error("nonpositive length at segment {0}")]
    NonPositiveLength(usize),
    #[error("degenerate head-on contact at ({:.6}, {:.6})", at.x, at.y)]
    DegenerateHeadOn { at: Vec2 },
    #[error("singular contact geometry")]
    SingularContact,
    #[error("trapped: sliding re-entered an exhausted corner")]
    Trapped,
    #[error("no pivot with index {0}")]
    NoSuchPivot(usize),
    #[error("start lies inside obstacle {0}")]
    StartInObstacle(usize),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
