//! Planar kinematics and contact-exploiting design planning for tip-everting growing robots.

pub mod geometry;
pub mod kinematics;
pub mod planner;
pub mod scenarios;
pub mod uncertainty;

pub use geometry::{Bounds, MapModel, Polygon, RayHit, Vec2};
pub use kinematics::{deploy, DeploymentTrace, DesignSegment, Grower, KinematicsConfig, RobotDesign, RobotState};
pub use uncertainty::{mc_success, SuccessEstimate, UncertaintyModel};
pub use planner::{plan, PlanError, PlanResult, PlannerConfig};
