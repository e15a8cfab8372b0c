//! The `simulate`, `plan`, `evaluate`, `sweep` and `export` commands.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use vine_nav::kinematics::{deploy_with, KinematicsError, Termination};
use vine_nav::scenarios;
use vine_nav::uncertainty::{mc_success_with, FailureTally, McOptions, TrialOutcome};
use vine_nav::{
    plan, DeploymentTrace, DesignSegment, Grower, KinematicsConfig, MapModel, PlanResult, PlannerConfig, RobotDesign,
    SuccessEstimate, UncertaintyModel,
};

use crate::files::{self, DesignFile, MapFile, PointFile, TraceDocument, FORMAT_VERSION};
use crate::{svg, CliError, Result};

pub const EVALUATE_HEADER: &str =
    "sigma_theta_deg,sigma_l_m,map_noise_m,trials,successes,probability,wilson_lo,wilson_hi,seed";
pub const START_ANGLE_HEADER: &str = "start_angle_deg,outcome,tip_x,tip_y,distance_m";

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.into()))?;
    text.push('\n');
    write(path, text)
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Argument(format!("--{name} must be finite")))
    }
}

/// Start heading in radians: the flag, else the map's fixed angle, else the design's.
pub fn resolve_start(map: &MapModel, flag_deg: Option<f64>, design: Option<f64>) -> Result<f64> {
    if let Some(d) = flag_deg {
        return Ok(finite("start-angle-deg", d)?.to_radians());
    }
    map.start_angle.or(design).ok_or_else(|| {
        CliError::Argument(
            "start.angle_deg is \"free\": pass --start-angle-deg or set start_angle_deg in the design".into(),
        )
    })
}

fn uncertainty(sigma_theta_deg: f64, sigma_l_m: f64) -> Result<UncertaintyModel> {
    UncertaintyModel::new(sigma_l_m, sigma_theta_deg.to_radians()).map_err(|e| CliError::Argument(e.to_string()))
}

/// Deploys `design` and names the last event reached if the deployment fails.
pub fn deploy_named(design: &RobotDesign, map: &MapModel, start_angle: f64) -> Result<DeploymentTrace> {
    let mut g = Grower::new(map, map.start, start_angle, KinematicsConfig::default())
        .map_err(|e| CliError::Simulate(e.to_string()))?;
    g.schedule(design.segments(), 0.0);
    if let Err(e) = g.grow_to(design.total_length()) {
        let n = g.events().len();
        let last = g.events().last().map_or("start", |ev| ev.kind());
        return Err(CliError::Simulate(format!(
            "{e} after event {n} ({last}) at length {:.6} m",
            g.length()
        )));
    }
    g.finish();
    Ok(g.into_trace())
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub design: PathBuf,
    /// Overrides the start heading of the map and the design.
    #[arg(long, allow_hyphen_values = true)]
    pub start_angle_deg: Option<f64>,
    #[arg(long)]
    pub out_svg: PathBuf,
    #[arg(long)]
    pub out_trace: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> Result<DeploymentTrace> {
    let map = files::read_map(&args.map)?;
    let (design, design_angle) = files::read_design(&args.design)?;
    let angle = resolve_start(&map, args.start_angle_deg, design_angle)?;
    let trace = deploy_named(&design, &map, angle)?;
    write(&args.out_svg, svg::deployment(&map, &trace))?;
    write_json(
        &args.out_trace,
        &TraceDocument {
            version: FORMAT_VERSION,
            start_angle_rad: angle,
            trace: trace.clone(),
        },
    )?;
    Ok(trace)
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub sigma_theta_deg: f64,
    #[arg(long)]
    pub sigma_l_m: f64,
    #[arg(long, default_value_t = 90.0)]
    pub theta_max_deg: f64,
    /// Random interior waypoints added to the obstacle-vertex waypoints.
    #[arg(long, default_value_t = 0)]
    pub interior: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Particles per waypoint in the design stage.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Monte Carlo trials of the final estimate.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Heading bins of the waypoint graph.
    #[arg(long, default_value_t = 360)]
    pub bins: usize,
    #[arg(long)]
    pub out_design: PathBuf,
    #[arg(long)]
    pub out_report: PathBuf,
}

impl PlanArgs {
    pub fn config(&self) -> Result<PlannerConfig> {
        if self.trials == 0 {
            return Err(CliError::Argument("--trials must be at least 1".into()));
        }
        Ok(PlannerConfig {
            bins: self.bins,
            theta_max: finite("theta-max-deg", self.theta_max_deg)?.to_radians(),
            n_interior: self.interior,
            seed: self.seed,
            samples: self.samples,
            eval_trials: self.trials,
            ..PlannerConfig::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointRow {
    pub x: f64,
    pub y: f64,
    pub turn_deg: f64,
    pub success: f64,
    pub survivors: usize,
    pub arrival_length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub trials: u64,
    pub successes: u64,
    pub probability: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
    pub failures: FailureTally,
}

impl From<&SuccessEstimate> for EstimateRow {
    fn from(e: &SuccessEstimate) -> Self {
        let (lo, hi) = e.wilson95();
        EstimateRow {
            trials: e.trials,
            successes: e.successes,
            probability: e.probability,
            wilson_lo: lo,
            wilson_hi: hi,
            seed: e.seed,
            failures: e.failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub version: u32,
    pub start_heading_deg: f64,
    /// Designed turns in the nominal design, the base heading excluded.
    pub turn_count: usize,
    /// Turns on the minimum-turn waypoint path.
    pub path_weight: u32,
    pub sequence: Vec<PointFile>,
    pub waypoints: Vec<WaypointRow>,
    pub estimate: EstimateRow,
    /// Tip and body contacts of the nominal deployment.
    pub contact_events: usize,
    /// Whether the nominal design ends elsewhere with all obstacles removed.
    pub free_space_differs: bool,
}

pub fn plan_report(map: &MapModel, result: &PlanResult) -> Result<PlanReport> {
    let trace = deploy_named(&result.design, map, result.start_heading)?;
    let free = MapModel {
        obstacles: Vec::new(),
        ..map.clone()
    };
    let free_trace = deploy_named(&result.design, &free, result.start_heading)?;
    Ok(PlanReport {
        version: FORMAT_VERSION,
        start_heading_deg: result.start_heading.to_degrees(),
        turn_count: result.design.segments().iter().skip(1).filter(|s| s.turn != 0.0).count(),
        path_weight: result.path_weight,
        sequence: result.sequence.iter().map(|&p| p.into()).collect(),
        waypoints: result
            .reports
            .iter()
            .map(|r| WaypointRow {
                x: r.position.x,
                y: r.position.y,
                turn_deg: r.turn.to_degrees(),
                success: r.success,
                survivors: r.survivors,
                arrival_length_m: r.arrival_length,
            })
            .collect(),
        estimate: (&result.estimate).into(),
        contact_events: trace.contact_events(),
        free_space_differs: trace.final_tip().distance(free_trace.final_tip()) > 1e-6,
    })
}

pub fn plan_command(args: &PlanArgs) -> Result<(PlanResult, PlanReport)> {
    let map = files::read_map(&args.map)?;
    let u = uncertainty(args.sigma_theta_deg, args.sigma_l_m)?;
    let result = plan(&map, &u, &args.config()?)?;
    let report = plan_report(&map, &result)?;
    write_json(&args.out_design, &DesignFile::from_design(&result.design, Some(result.start_heading)))?;
    write_json(&args.out_report, &report)?;
    Ok((result, report))
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long)]
    pub sigma_theta_deg: f64,
    #[arg(long)]
    pub sigma_l_m: f64,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Standard deviation of obstacle vertex noise.
    #[arg(long, default_value_t = 0.0)]
    pub map_noise_m: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub start_angle_deg: Option<f64>,
    #[arg(long)]
    pub out_csv: PathBuf,
}

/// One row of a results CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluateRow {
    pub sigma_theta_deg: f64,
    pub sigma_l_m: f64,
    pub map_noise_m: f64,
    pub trials: u64,
    pub successes: u64,
    pub probability: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
}

fn evaluate_row(
    design: &RobotDesign,
    map: &MapModel,
    sigma_theta_deg: f64,
    sigma_l_m: f64,
    map_noise_m: f64,
    trials: u64,
    seed: u64,
) -> Result<EvaluateRow> {
    if trials == 0 {
        return Err(CliError::Argument("--trials must be at least 1".into()));
    }
    let u = uncertainty(sigma_theta_deg, sigma_l_m)?;
    let opts = McOptions {
        map_noise: map_noise_m,
        ..McOptions::new(trials, seed)
    };
    let e = mc_success_with(design.segments(), map, &u, &opts).map_err(|e| CliError::Argument(e.to_string()))?;
    let (lo, hi) = e.wilson95();
    Ok(EvaluateRow {
        sigma_theta_deg,
        sigma_l_m,
        map_noise_m,
        trials: e.trials,
        successes: e.successes,
        probability: e.probability,
        wilson_lo: lo,
        wilson_hi: hi,
        seed,
    })
}

fn csv_text<T: Serialize>(header: &str, rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Other(e.into()))?;
    }
    let body = w.into_inner().map_err(|e| CliError::Other(anyhow::anyhow!("{e}")))?;
    let mut out = String::with_capacity(header.len() + 1 + body.len());
    out.push_str(header);
    out.push('\n');
    out.push_str(std::str::from_utf8(&body).map_err(|e| CliError::Other(e.into()))?);
    Ok(out)
}

/// Map with its start heading fixed, so trials launch at `angle`.
fn launched(map: &MapModel, angle: f64) -> MapModel {
    MapModel {
        start_angle: Some(angle),
        ..map.clone()
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Result<EvaluateRow> {
    let map = files::read_map(&args.map)?;
    let (design, design_angle) = files::read_design(&args.design)?;
    let map = launched(&map, resolve_start(&map, args.start_angle_deg, design_angle)?);
    let row = evaluate_row(
        &design,
        &map,
        finite("sigma-theta-deg", args.sigma_theta_deg)?,
        finite("sigma-l-m", args.sigma_l_m)?,
        finite("map-noise-m", args.map_noise_m)?,
        args.trials,
        args.seed,
    )?;
    write(&args.out_csv, csv_text(EVALUATE_HEADER, &[row])?)?;
    Ok(row)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    /// Angular half-width in degrees.
    #[value(name = "sigma_theta")]
    SigmaTheta,
    /// Map noise in meters.
    #[value(name = "map_noise")]
    MapNoise,
    /// Start heading in degrees, one exact deployment per point.
    #[value(name = "start_angle")]
    StartAngle,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, required_unless_present = "plan", conflicts_with = "plan")]
    pub design: Option<PathBuf>,
    /// Plan a design at the given uncertainty instead of reading one.
    #[arg(long)]
    pub plan: bool,
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long, num_args = 2, value_names = ["FROM", "TO"], allow_hyphen_values = true)]
    pub range: Vec<f64>,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma_theta_deg: f64,
    #[arg(long, default_value_t = 0.011)]
    pub sigma_l_m: f64,
    #[arg(long, default_value_t = 0.0)]
    pub map_noise_m: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub start_angle_deg: Option<f64>,
    /// Particles per waypoint when planning.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long)]
    pub out_csv: PathBuf,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartAngleRow {
    pub start_angle_deg: f64,
    pub outcome: TrialOutcome,
    pub tip_x: Option<f64>,
    pub tip_y: Option<f64>,
    pub distance_m: Option<f64>,
}

/// Exact deployment at one heading, classified like a Monte Carlo trial.
pub fn start_angle_row(design: &RobotDesign, map: &MapModel, angle_deg: f64) -> StartAngleRow {
    let trace = deploy_with(design.segments(), map, map.start, angle_deg.to_radians(), &KinematicsConfig::default());
    let (outcome, tip) = match trace {
        Ok(t) => {
            let tip = t.final_tip();
            let outcome = if tip.distance(map.goal) < map.success_radius {
                TrialOutcome::Success
            } else if t.termination == Some(Termination::Wedged) {
                TrialOutcome::Wedged
            } else {
                TrialOutcome::Miss
            };
            (outcome, Some(tip))
        }
        Err(KinematicsError::Trapped) => (TrialOutcome::Trapped, None),
        Err(_) => (TrialOutcome::Degenerate, None),
    };
    StartAngleRow {
        start_angle_deg: angle_deg,
        outcome,
        tip_x: tip.map(|p| p.x),
        tip_y: tip.map(|p| p.y),
        distance_m: tip.map(|p| p.distance(map.goal)),
    }
}

pub enum SweepRows {
    Estimates(Vec<EvaluateRow>),
    StartAngles(Vec<StartAngleRow>),
}

pub fn sweep(args: &SweepArgs) -> Result<SweepRows> {
    let map = files::read_map(&args.map)?;
    let (design, design_angle) = match (&args.design, args.plan) {
        (Some(path), _) => files::read_design(path)?,
        (None, true) => {
            let cfg = PlannerConfig {
                samples: args.samples,
                seed: args.seed,
                eval_trials: args.trials.max(1),
                ..PlannerConfig::default()
            };
            let r = plan(&map, &uncertainty(args.sigma_theta_deg, args.sigma_l_m)?, &cfg)?;
            (r.design, Some(r.start_heading))
        }
        (None, false) => return Err(CliError::Argument("one of --design or --plan is required".into())),
    };
    let [from, to] = args.range[..] else {
        return Err(CliError::Argument("--range takes two values".into()));
    };
    if args.steps == 0 {
        return Err(CliError::Argument("--steps must be at least 1".into()));
    }
    let xs = grid(finite("range", from)?, finite("range", to)?, args.steps);
    let (text, ys, label, rows) = match args.param {
        SweepParam::StartAngle => {
            let rows: Vec<StartAngleRow> = xs.iter().map(|&a| start_angle_row(&design, &map, a)).collect();
            let ys: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r.outcome == TrialOutcome::Success))).collect();
            (csv_text(START_ANGLE_HEADER, &rows)?, ys, "start angle (deg)", SweepRows::StartAngles(rows))
        }
        param => {
            let map = launched(&map, resolve_start(&map, args.start_angle_deg, design_angle)?);
            let rows = xs
                .iter()
                .map(|&x| {
                    let (st, noise) = match param {
                        SweepParam::SigmaTheta => (x, args.map_noise_m),
                        _ => (args.sigma_theta_deg, x),
                    };
                    evaluate_row(&design, &map, st, args.sigma_l_m, noise, args.trials, args.seed)
                })
                .collect::<Result<Vec<_>>>()?;
            let ys: Vec<f64> = rows.iter().map(|r| r.probability).collect();
            let label = if param == SweepParam::SigmaTheta {
                "sigma_theta (deg)"
            } else {
                "map noise (m)"
            };
            (csv_text(EVALUATE_HEADER, &rows)?, ys, label, SweepRows::Estimates(rows))
        }
    };
    write(&args.out_csv, text)?;
    if let Some(path) = &args.out_svg {
        write(path, svg::curve(&xs, &ys, label, "success"))?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    Wall,
    Hole,
    #[value(name = "pivot_shift")]
    PivotShift,
    Course,
    Maze,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    /// Hole offset as a multiple of the wall distance.
    #[arg(long, default_value_t = 1.0)]
    pub hole_ratio: f64,
    #[arg(long)]
    pub out_map: PathBuf,
    /// Writes a matching design: straight for the wall, hole and course, the scripted
    /// robot for pivot_shift and the wall-avoiding design for the maze.
    #[arg(long)]
    pub out_design: Option<PathBuf>,
}

pub fn scenario(which: Scenario, hole_ratio: f64) -> Result<(MapModel, RobotDesign, Option<f64>)> {
    let straight = |l: f64| RobotDesign::straight(l).map_err(|e| CliError::Argument(e.to_string()));
    Ok(match which {
        Scenario::Wall => (scenarios::wall(1.0), straight(1.5)?, None),
        Scenario::Hole => {
            let d = scenarios::HOLE_WALL_DISTANCE;
            let x = finite("hole-ratio", hole_ratio)? * d;
            let design = RobotDesign::new(vec![DesignSegment::new(2.0 * (x.abs() + d) + 0.5, 0.0)], FRAC_PI_2)
                .map_err(|e| CliError::Argument(e.to_string()))?;
            (scenarios::hole_in_wall(x, d), design, None)
        }
        Scenario::PivotShift => {
            let (map, design) = scenarios::pivot_shift();
            (map, design, None)
        }
        Scenario::Course => {
            let c = scenarios::course();
            (c.map, c.design, Some(-90f64.to_radians()))
        }
        Scenario::Maze => {
            let (design, heading) = scenarios::maze_avoidance_design();
            (scenarios::maze(), design, Some(heading))
        }
    })
}

pub fn export(args: &ExportArgs) -> Result<()> {
    let (map, design, angle) = scenario(args.scenario, args.hole_ratio)?;
    write_json(&args.out_map, &MapFile::from_model(&map))?;
    if let Some(path) = &args.out_design {
        write_json(path, &DesignFile::from_design(&design, angle))?;
    }
    Ok(())
}
