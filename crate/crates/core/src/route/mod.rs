//! Waypoint export: macro actions to metric corridor-centerline polylines.
//!
//! The abstract field is laid onto real geometry as follows. Corridor `k`
//! runs along `x = (k + 0.5) * row_spacing_m`. Interior cell `y` sits at the
//! centre of its section, `(y + 0.5) * section_m`, with
//! `section_m = corridor_length_m / L`. The headlands lie
//! `headland_offset_m` beyond either row end.

mod compile;
mod export;
mod geometry;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plan::PlanError;

pub use compile::{abstract_actions, compile, expected_length, CompiledRoute};
pub use export::{
    from_csv, from_geojson, read_path, to_csv, to_geojson, write_path, ExportFormat,
};
pub use geometry::{
    snap_to_n_sections, snap_to_sections, FieldGeometry, DEFAULT_HEADLAND_OFFSET_M, SECTIONS,
};

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("geometry config line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown geometry key `{0}`")]
    UnknownKey(String),
    #[error("geometry key `{0}` given twice")]
    DuplicateKey(String),
    #[error("missing geometry key `{0}`")]
    MissingKey(String),
    #[error("bad value for `{key}`: `{value}`")]
    BadValue { key: String, value: String },
    #[error("position {y_m} m lies outside a corridor of length {length_m} m")]
    OutOfCorridor { y_m: f64, length_m: f64 },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("macro {index} starts phase `{phase}` after phase `{after}`")]
    PhaseOrder {
        index: usize,
        phase: Phase,
        after: Phase,
    },
    #[error("waypoint path is empty")]
    EmptyPath,
    #[error("malformed waypoint file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Pipeline stage a waypoint belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Exit,
    Switch,
    Enter,
    /// Start and goal share a corridor and no headland is visited.
    Approach,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Exit => "exit",
            Phase::Switch => "switch",
            Phase::Enter => "enter",
            Phase::Approach => "approach",
        }
    }

    fn rank(self) -> u8 {
        match self {
            Phase::Exit => 0,
            Phase::Switch => 1,
            Phase::Enter | Phase::Approach => 2,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = RouteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exit" => Ok(Phase::Exit),
            "switch" => Ok(Phase::Switch),
            "enter" => Ok(Phase::Enter),
            "approach" => Ok(Phase::Approach),
            other => Err(RouteError::Malformed(format!("unknown phase `{other}`"))),
        }
    }
}

/// Drive direction along the waypoints; backward means the controller
/// reverses through them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = RouteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            other => Err(RouteError::Malformed(format!("unknown direction `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x_m: f64,
    pub y_m: f64,
    pub phase: Phase,
    pub direction: Direction,
}

/// Ordered, nonempty waypoint polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointPath {
    points: Vec<Waypoint>,
}

impl WaypointPath {
    /// Checks the path invariants: nonempty, consecutive points distinct and
    /// phases in pipeline order.
    pub fn new(points: Vec<Waypoint>) -> Result<Self, RouteError> {
        if points.is_empty() {
            return Err(RouteError::EmptyPath);
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0].x_m == w[1].x_m && w[0].y_m == w[1].y_m {
                return Err(RouteError::Malformed(format!(
                    "points {i} and {} coincide",
                    i + 1
                )));
            }
        }
        let phases = collapse_phases(&points);
        for w in phases.windows(2) {
            if w[1].rank() <= w[0].rank() {
                return Err(RouteError::Malformed(format!(
                    "phase `{}` follows `{}`",
                    w[1], w[0]
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Waypoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distinct phases in order of appearance.
    pub fn phases(&self) -> Vec<Phase> {
        collapse_phases(&self.points)
    }

    /// Euclidean length of the polyline.
    pub fn length_m(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].x_m - w[0].x_m).hypot(w[1].y_m - w[0].y_m))
            .sum()
    }
}

fn collapse_phases(points: &[Waypoint]) -> Vec<Phase> {
    let mut out: Vec<Phase> = Vec::new();
    for p in points {
        if out.last() != Some(&p.phase) {
            out.push(p.phase);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wp(x: f64, y: f64, phase: Phase) -> Waypoint {
        Waypoint {
            x_m: x,
            y_m: y,
            phase,
            direction: Direction::Forward,
        }
    }

    #[test]
    fn path_invariants() {
        assert!(matches!(WaypointPath::new(vec![]), Err(RouteError::EmptyPath)));
        assert!(WaypointPath::new(vec![wp(0.0, 0.0, Phase::Exit), wp(0.0, 0.0, Phase::Exit)]).is_err());
        assert!(WaypointPath::new(vec![wp(0.0, 0.0, Phase::Enter), wp(0.0, 1.0, Phase::Exit)]).is_err());
        let ok = WaypointPath::new(vec![
            wp(0.0, 0.0, Phase::Exit),
            wp(0.0, 1.0, Phase::Exit),
            wp(2.0, 1.0, Phase::Switch),
            wp(2.0, 0.0, Phase::Enter),
        ])
        .unwrap();
        assert_eq!(ok.phases(), vec![Phase::Exit, Phase::Switch, Phase::Enter]);
        assert_eq!(ok.length_m(), 4.0);
    }

    #[test]
    fn tags_parse() {
        for p in [Phase::Exit, Phase::Switch, Phase::Enter, Phase::Approach] {
            assert_eq!(p.as_str().parse::<Phase>().unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{}\"", p.as_str()));
        }
        assert!("Exit".parse::<Phase>().is_err());
        assert_eq!("backward".parse::<Direction>().unwrap(), Direction::Backward);
    }
}
