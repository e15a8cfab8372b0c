//! Manufacturing and map uncertainty: sampled designs, perturbed maps, and Monte-Carlo
//! success estimates with deterministic per-trial random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{MapModel, Polygon, Vec2};
use crate::kinematics::{deploy_with, DesignSegment, KinematicsConfig, KinematicsError, RobotDesign, Termination};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;
/// Map noise is truncated at this many standard deviations.
pub const MAP_NOISE_TRUNCATION: f64 = 4.0;
/// Redraws allowed per obstacle before `perturb_map` gives up.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UncertaintyError {
    #[error("invalid uncertainty: {0}")]
    InvalidModel(String),
    #[error("sigma_l {sigma_l} must be below the shortest segment length {min_length}")]
    LengthTooUncertain { sigma_l: f64, min_length: f64 },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("cannot perturb obstacle {0} after {MAX_REDRAWS} redraws")]
    CannotPerturb(usize),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Uniform half-widths on realized segment lengths and turn deflections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyModel {
    pub sigma_l: f64,
    pub sigma_theta: f64,
    /// Whether nominally straight joints also receive angular noise.
    #[serde(default)]
    pub perturb_zero_turns: bool,
}

impl UncertaintyModel {
    pub fn new(sigma_l: f64, sigma_theta: f64) -> Result<Self, UncertaintyError> {
        for (name, v) in [("sigma_l", sigma_l), ("sigma_theta", sigma_theta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(UncertaintyError::InvalidModel(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(UncertaintyModel {
            sigma_l,
            sigma_theta,
            perturb_zero_turns: false,
        })
    }

    pub fn exact() -> Self {
        UncertaintyModel {
            sigma_l: 0.0,
            sigma_theta: 0.0,
            perturb_zero_turns: false,
        }
    }

    pub fn with_zero_turns(mut self, on: bool) -> Self {
        self.perturb_zero_turns = on;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.sigma_l == 0.0 && self.sigma_theta == 0.0
    }

    /// Checks that every sampled length stays positive.
    pub fn check(&self, segments: &[DesignSegment]) -> Result<(), UncertaintyError> {
        let min_length = segments.iter().map(|s| s.length).fold(f64::INFINITY, f64::min);
        if self.sigma_l > 0.0 && self.sigma_l >= min_length {
            return Err(UncertaintyError::LengthTooUncertain {
                sigma_l: self.sigma_l,
                min_length,
            });
        }
        Ok(())
    }
}

impl Default for UncertaintyModel {
    fn default() -> Self {
        UncertaintyModel::exact()
    }
}

/// One realized robot drawn around a nominal design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledDesign {
    pub segments: Vec<DesignSegment>,
    pub sample_seed: u64,
}

/// Random stream for trial `stream` under `seed`. Streams never overlap, so a trial's
/// draws do not depend on which thread runs it.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, center: f64, half: f64) -> f64 {
    if half == 0.0 {
        center
    } else {
        rng.random_range(center - half..=center + half)
    }
}

/// Realized segments: each length and each turn drawn uniformly within its half-width.
pub fn sample_segments<R: Rng + ?Sized>(nominal: &[DesignSegment], u: &UncertaintyModel, rng: &mut R) -> Vec<DesignSegment> {
    nominal
        .iter()
        .map(|s| {
            let length = uniform(rng, s.length, u.sigma_l);
            let turn = if s.turn != 0.0 || u.perturb_zero_turns {
                uniform(rng, s.turn, u.sigma_theta)
            } else {
                s.turn
            };
            DesignSegment::new(length, turn)
        })
        .collect()
}

pub fn sample_design<R: Rng + ?Sized>(
    nominal: &RobotDesign,
    u: &UncertaintyModel,
    rng: &mut R,
    sample_seed: u64,
) -> Result<SampledDesign, UncertaintyError> {
    u.check(nominal.segments())?;
    Ok(SampledDesign {
        segments: sample_segments(nominal.segments(), u, rng),
        sample_seed,
    })
}

fn truncated_normal<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= MAP_NOISE_TRUNCATION {
            return z * sigma;
        }
    }
}

/// Displaces every obstacle vertex by independent normal noise per coordinate. A
/// perturbed obstacle that is no longer a simple counter-clockwise polygon, or that
/// swallows the start or goal, is redrawn.
pub fn perturb_map<R: Rng + ?Sized>(map: &MapModel, sigma: f64, rng: &mut R) -> Result<MapModel, UncertaintyError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(UncertaintyError::InvalidModel(format!("map noise {sigma} must be finite and >= 0")));
    }
    if sigma == 0.0 {
        return Ok(map.clone());
    }
    let mut out = map.clone();
    for (i, poly) in map.obstacles.iter().enumerate() {
        let mut accepted = None;
        for _ in 0..MAX_REDRAWS {
            let pts: Vec<Vec2> = poly
                .vertices()
                .iter()
                .map(|v| Vec2::new(v.x + truncated_normal(rng, sigma), v.y + truncated_normal(rng, sigma)))
                .collect();
            if let Ok(p) = Polygon::new(pts) {
                if !p.contains(map.start) && !p.contains(map.goal) {
                    accepted = Some(p);
                    break;
                }
            }
        }
        out.obstacles[i] = accepted.ok_or(UncertaintyError::CannotPerturb(i))?;
    }
    Ok(out)
}

/// How a single trial ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    Success,
    Miss,
    Wedged,
    Degenerate,
    Trapped,
    /// The perturbed map could not be generated.
    MapFailure,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureTally {
    pub miss: u64,
    pub wedged: u64,
    pub degenerate: u64,
    pub trapped: u64,
    pub map_failure: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub trials: u64,
    pub successes: u64,
    pub probability: f64,
    pub seed: u64,
    pub failures: FailureTally,
}

impl SuccessEstimate {
    fn from_counts(seed: u64, counts: [u64; 6]) -> Self {
        let trials = counts.iter().sum();
        SuccessEstimate {
            trials,
            successes: counts[0],
            probability: counts[0] as f64 / trials as f64,
            seed,
            failures: FailureTally {
                miss: counts[1],
                wedged: counts[2],
                degenerate: counts[3],
                trapped: counts[4],
                map_failure: counts[5],
            },
        }
    }

    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.successes, self.trials, z)
    }

    pub fn wilson95(&self) -> (f64, f64) {
        self.wilson(Z95)
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes >= trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    /// Standard deviation of per-trial map noise, in meters.
    pub map_noise: f64,
    pub kinematics: KinematicsConfig,
}

impl McOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        McOptions {
            trials,
            seed,
            map_noise: 0.0,
            kinematics: KinematicsConfig::default(),
        }
    }
}

/// Initial heading of a deployment on `map`; a free start counts from the +x axis.
pub fn start_angle(map: &MapModel) -> f64 {
    map.start_angle.unwrap_or(0.0)
}

/// Deploys `segments` from the map start and classifies the result against the goal.
pub fn classify(segments: &[DesignSegment], map: &MapModel, cfg: &KinematicsConfig) -> TrialOutcome {
    match deploy_with(segments, map, map.start, start_angle(map), cfg) {
        Ok(trace) => {
            if trace.final_tip().distance(map.goal) < map.success_radius {
                TrialOutcome::Success
            } else if trace.termination == Some(Termination::Wedged) {
                TrialOutcome::Wedged
            } else {
                TrialOutcome::Miss
            }
        }
        Err(KinematicsError::Trapped) => TrialOutcome::Trapped,
        Err(_) => TrialOutcome::Degenerate,
    }
}

/// One trial: design draws first, then map noise, all from the trial's own stream.
pub fn run_trial(nominal: &[DesignSegment], map: &MapModel, u: &UncertaintyModel, opts: &McOptions, trial: u64) -> TrialOutcome {
    let mut rng = trial_rng(opts.seed, trial);
    let segments = sample_segments(nominal, u, &mut rng);
    if opts.map_noise > 0.0 {
        match perturb_map(map, opts.map_noise, &mut rng) {
            Ok(m) => classify(&segments, &m, &opts.kinematics),
            Err(_) => TrialOutcome::MapFailure,
        }
    } else {
        classify(&segments, map, &opts.kinematics)
    }
}

pub fn mc_success(
    nominal: &RobotDesign,
    map: &MapModel,
    u: &UncertaintyModel,
    trials: u64,
    seed: u64,
) -> Result<SuccessEstimate, UncertaintyError> {
    mc_success_with(nominal.segments(), map, u, &McOptions::new(trials, seed))
}

/// Monte-Carlo success probability. Trials run in parallel and reduce to integer tallies,
/// so the estimate depends only on the inputs.
pub fn mc_success_with(
    nominal: &[DesignSegment],
    map: &MapModel,
    u: &UncertaintyModel,
    opts: &McOptions,
) -> Result<SuccessEstimate, UncertaintyError> {
    if opts.trials == 0 {
        return Err(UncertaintyError::NoTrials);
    }
    u.check(nominal)?;
    if !(opts.map_noise >= 0.0 && opts.map_noise.is_finite()) {
        return Err(UncertaintyError::InvalidModel(format!("map noise {} must be finite and >= 0", opts.map_noise)));
    }
    let counts = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let mut c = [0u64; 6];
            c[outcome_slot(run_trial(nominal, map, u, opts, trial))] = 1;
            c
        })
        .reduce(
            || [0u64; 6],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(SuccessEstimate::from_counts(opts.seed, counts))
}

fn outcome_slot(o: TrialOutcome) -> usize {
    match o {
        TrialOutcome::Success => 0,
        TrialOutcome::Miss => 1,
        TrialOutcome::Wedged => 2,
        TrialOutcome::Degenerate => 3,
        TrialOutcome::Trapped => 4,
        TrialOutcome::MapFailure => 5,
    }
}
