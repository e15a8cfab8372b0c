//! JSON map and design documents.

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use vine_nav::geometry::GeometryError;
use vine_nav::kinematics::KinematicsError;
use vine_nav::{Bounds, DeploymentTrace, DesignSegment, MapModel, Polygon, RobotDesign, Vec2};

pub const FORMAT_VERSION: u32 = 1;

/// A parse or validation failure, located by field path and, for syntax errors, by line.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub path: String,
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl ParseError {
    fn at(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ParseError {
            path: path.into(),
            message: message.to_string(),
            line: None,
            column: None,
        }
    }

    fn from_json(err: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let path = err.path().to_string();
        let inner = err.into_inner();
        ParseError {
            path,
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: inner.to_string(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            if !self.message.contains(" at line ") {
                write!(f, " at line {l} column {c}")?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(ParseError::from_json)
}

fn check_version(version: u32) -> Result<(), ParseError> {
    if version != FORMAT_VERSION {
        return Err(ParseError::at("version", format!("unsupported version {version}, expected {FORMAT_VERSION}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub x: f64,
    pub y: f64,
}

impl From<Vec2> for PointFile {
    fn from(v: Vec2) -> Self {
        PointFile { x: v.x, y: v.y }
    }
}

impl From<PointFile> for Vec2 {
    fn from(p: PointFile) -> Self {
        Vec2::new(p.x, p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsFile {
    pub min: PointFile,
    pub max: PointFile,
}

/// Initial heading in degrees, or free for the planner to choose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartAngle {
    Degrees(f64),
    Free,
}

impl Serialize for StartAngle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            StartAngle::Degrees(d) => s.serialize_f64(*d),
            StartAngle::Free => s.serialize_str("free"),
        }
    }
}

impl<'de> Deserialize<'de> for StartAngle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(StartAngle::Degrees(v)),
            Raw::Text(t) if t == "free" => Ok(StartAngle::Free),
            Raw::Text(t) => Err(de::Error::custom(format!("expected degrees or \"free\", got \"{t}\""))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartFile {
    pub x: f64,
    pub y: f64,
    pub angle_deg: StartAngle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsFile>,
    /// Counter-clockwise vertex lists in meters.
    pub obstacles: Vec<Vec<[f64; 2]>>,
    pub start: StartFile,
    pub goal: PointFile,
    pub success_radius_m: f64,
}

impl MapFile {
    pub fn parse(text: &str) -> Result<MapFile, ParseError> {
        parse_json(text)
    }

    pub fn from_model(map: &MapModel) -> MapFile {
        MapFile {
            version: FORMAT_VERSION,
            bounds: map.bounds.map(|b| BoundsFile {
                min: b.min.into(),
                max: b.max.into(),
            }),
            obstacles: map
                .obstacles
                .iter()
                .map(|o| o.vertices().iter().map(|v| [v.x, v.y]).collect())
                .collect(),
            start: StartFile {
                x: map.start.x,
                y: map.start.y,
                angle_deg: map.start_angle.map_or(StartAngle::Free, |a| StartAngle::Degrees(a.to_degrees())),
            },
            goal: map.goal.into(),
            success_radius_m: map.success_radius,
        }
    }

    pub fn to_model(&self) -> Result<MapModel, ParseError> {
        check_version(self.version)?;
        let bounds = match self.bounds {
            Some(b) => Some(Bounds::new(b.min.into(), b.max.into()).map_err(|e| ParseError::at("bounds", e))?),
            None => None,
        };
        let obstacles = self
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, pts)| {
                Polygon::new(pts.iter().map(|&[x, y]| Vec2::new(x, y)).collect())
                    .map_err(|e| ParseError::at(format!("obstacles[{i}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let start_angle = match self.start.angle_deg {
            StartAngle::Degrees(d) if d.is_finite() => Some(d.to_radians()),
            StartAngle::Degrees(_) => return Err(ParseError::at("start.angle_deg", "angle must be finite")),
            StartAngle::Free => None,
        };
        let map = MapModel {
            bounds,
            obstacles,
            start: Vec2::new(self.start.x, self.start.y),
            start_angle,
            goal: self.goal.into(),
            success_radius: self.success_radius_m,
        };
        map.validate().map_err(|e| {
            let path = match &e {
                GeometryError::ObstacleOutOfBounds(i) | GeometryError::ObstaclesOverlap(i, _) => format!("obstacles[{i}]"),
                GeometryError::PointInObstacle(which, _) => (*which).to_string(),
                GeometryError::NonPositiveRadius => "success_radius_m".into(),
                GeometryError::NonFinite => "start".into(),
                _ => "map".into(),
            };
            ParseError::at(path, e)
        })?;
        Ok(map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub length_m: f64,
    pub turn_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    pub version: u32,
    pub segments: Vec<SegmentFile>,
    pub theta_max_deg: f64,
    /// Heading to launch with when the map leaves the start angle free.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_angle_deg: Option<f64>,
}

impl DesignFile {
    pub fn parse(text: &str) -> Result<DesignFile, ParseError> {
        parse_json(text)
    }

    pub fn from_design(design: &RobotDesign, start_angle: Option<f64>) -> DesignFile {
        DesignFile {
            version: FORMAT_VERSION,
            segments: design
                .segments()
                .iter()
                .map(|s| SegmentFile {
                    length_m: s.length,
                    turn_deg: s.turn.to_degrees(),
                })
                .collect(),
            theta_max_deg: design.theta_max().to_degrees(),
            start_angle_deg: start_angle.map(f64::to_degrees),
        }
    }

    /// The design and its start heading in radians, if the file carries one.
    pub fn to_design(&self) -> Result<(RobotDesign, Option<f64>), ParseError> {
        check_version(self.version)?;
        if !(self.theta_max_deg.is_finite() && self.theta_max_deg >= 0.0) {
            return Err(ParseError::at("theta_max_deg", "must be finite and >= 0"));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.length_m.is_finite() && s.length_m > 0.0) {
                return Err(ParseError::at(format!("segments[{i}].length_m"), "length must be positive"));
            }
            if !s.turn_deg.is_finite() || s.turn_deg.abs() > self.theta_max_deg + 1e-9 {
                return Err(ParseError::at(
                    format!("segments[{i}].turn_deg"),
                    format!("|{}| exceeds theta_max_deg {}", s.turn_deg, self.theta_max_deg),
                ));
            }
        }
        let segments: Vec<DesignSegment> = self
            .segments
            .iter()
            .map(|s| DesignSegment::new(s.length_m, s.turn_deg.to_radians()))
            .collect();
        let design = RobotDesign::new(segments, self.theta_max_deg.to_radians()).map_err(|e| {
            let path = match &e {
                KinematicsError::NonPositiveLength(i) => format!("segments[{i}].length_m"),
                _ => "segments".into(),
            };
            ParseError::at(path, e)
        })?;
        match self.start_angle_deg {
            Some(d) if !d.is_finite() => Err(ParseError::at("start_angle_deg", "angle must be finite")),
            a => Ok((design, a.map(f64::to_radians))),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|e| ParseError::at(path.display().to_string(), e))
}

pub fn read_map(path: &Path) -> Result<MapModel, ParseError> {
    MapFile::parse(&read_text(path)?).and_then(|f| f.to_model()).map_err(|e| prefixed(path, e))
}

pub fn read_design(path: &Path) -> Result<(RobotDesign, Option<f64>), ParseError> {
    DesignFile::parse(&read_text(path)?).and_then(|f| f.to_design()).map_err(|e| prefixed(path, e))
}

fn prefixed(path: &Path, mut e: ParseError) -> ParseError {
    e.path = format!("{}: {}", path.display(), e.path);
    e
}

/// Serialized deployment: every event with positions and lengths in meters, angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDocument {
    pub version: u32,
    pub start_angle_rad: f64,
    pub trace: DeploymentTrace,
}

impl TraceDocument {
    pub fn parse(text: &str) -> Result<TraceDocument, ParseError> {
        let doc: TraceDocument = parse_json(text)?;
        check_version(doc.version)?;
        Ok(doc)
    }
}
