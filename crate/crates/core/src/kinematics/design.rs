use serde::{Deserialize, Serialize};

use super::KinematicsError;

/// One manufactured segment. The turn is everted where the segment begins, i.e. at the
/// cumulative length of all previous segments; the first segment's turn rotates the
/// initial heading at the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSegment {
    pub length: f64,
    pub turn: f64,
}

impl DesignSegment {
    pub fn new(length: f64, turn: f64) -> Self {
        DesignSegment { length, turn }
    }
}

/// Nominal robot design: segment lengths and discrete turn deflections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotDesign {
    segments: Vec<DesignSegment>,
    theta_max: f64,
}

impl RobotDesign {
    pub fn new(segments: Vec<DesignSegment>, theta_max: f64) -> Result<Self, KinematicsError> {
        if !(theta_max >= 0.0 && theta_max.is_finite()) {
            return Err(KinematicsError::InvalidDesign(format!("theta_max {theta_max} must be finite and >= 0")));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.length > 0.0 && s.length.is_finite()) {
                return Err(KinematicsError::InvalidDesign(format!("segment {i}: length must be positive")));
            }
            if !s.turn.is_finite() || s.turn.abs() > theta_max + 1e-12 {
                return Err(KinematicsError::InvalidDesign(format!(
                    "segment {i}: |turn| {:.6} rad exceeds theta_max {:.6} rad",
                    s.turn.abs(),
                    theta_max
                )));
            }
        }
        Ok(RobotDesign { segments, theta_max })
    }

    /// Straight robot of the given length.
    pub fn straight(length: f64) -> Result<Self, KinematicsError> {
        RobotDesign::new(vec![DesignSegment::new(length, 0.0)], std::f64::consts::FRAC_PI_2)
    }

    pub fn segments(&self) -> &[DesignSegment] {
        &self.segments
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Cumulative lengths `L_i = l_1 + ... + l_i`.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        self.segments
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.length;
                Some(*acc)
            })
            .collect()
    }

    /// Number of nonzero turns.
    pub fn turn_count(&self) -> usize {
        self.segments.iter().filter(|s| s.turn != 0.0).count()
    }
}

/// A turn scheduled to evert at a given total length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTurn {
    pub at_length: f64,
    pub angle: f64,
    pub index: usize,
}

/// Eversion schedule for a list of segments, starting at `offset` length.
pub fn turn_schedule(segments: &[DesignSegment], offset: f64) -> Vec<ScheduledTurn> {
    let mut at = offset;
    segments
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let turn = ScheduledTurn {
                at_length: at,
                angle: s.turn,
                index,
            };
            at += s.length;
            turn
        })
        .collect()
}
