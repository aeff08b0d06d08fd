use std::fmt;

use serde::{Deserialize, Serialize};

use super::EnvError;

/// Dimensions of the abstract field.
///
/// Rows are numbered `0..num_rows`; corridor `k` lies between rows `k` and
/// `k + 1`, at `corridor_x = k + 0.5`. Cells along a corridor are numbered
/// `0..corridor_len`, with the bottom headland at `-1` and the top headland at
/// `corridor_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldSpecRepr", into = "FieldSpecRepr")]
pub struct FieldSpec {
    num_rows: u32,
    corridor_len: u32,
    max_steps: u32,
}

#[derive(Serialize, Deserialize)]
struct FieldSpecRepr {
    num_rows: u32,
    corridor_len: u32,
    max_steps: u32,
}

impl FieldSpec {
    /// Field with the default episode budget of `10 * (L + 2)` steps, raised
    /// to `2 * (L + 2) + R` on fields too wide for it.
    pub fn new(num_rows: u32, corridor_len: u32) -> Result<Self, EnvError> {
        let band = corridor_len.saturating_add(2);
        let max_steps = band
            .saturating_mul(10)
            .max(band.saturating_mul(2).saturating_add(num_rows));
        Self::with_max_steps(num_rows, corridor_len, max_steps)
    }

    pub fn with_max_steps(
        num_rows: u32,
        corridor_len: u32,
        max_steps: u32,
    ) -> Result<Self, EnvError> {
        if num_rows < 2 {
            return Err(EnvError::InvalidField(format!(
                "need at least 2 rows, got {num_rows}"
            )));
        }
        if corridor_len < 1 {
            return Err(EnvError::InvalidField("corridor length must be >= 1".into()));
        }
        let needed = 2 * (u64::from(corridor_len) + 2) + u64::from(num_rows);
        if u64::from(max_steps) < needed {
            return Err(EnvError::InvalidField(format!(
                "max_steps {max_steps} cannot fit a shortest path (need >= {needed})"
            )));
        }
        Ok(Self {
            num_rows,
            corridor_len,
            max_steps,
        })
    }

    #[inline]
    pub fn num_rows(&self) -> u32 {
        self.num_rows
    }

    #[inline]
    pub fn corridor_len(&self) -> u32 {
        self.corridor_len
    }

    #[inline]
    pub fn max_steps(&self) -> u32 {
        self.max_steps
    }

    /// Number of interior corridors, `R - 1`.
    #[inline]
    pub fn num_corridors(&self) -> u32 {
        self.num_rows - 1
    }

    /// y coordinate of the top headland.
    #[inline]
    pub fn top(&self) -> i32 {
        self.corridor_len as i32
    }

    /// y coordinate of the bottom headland.
    #[inline]
    pub fn bottom(&self) -> i32 {
        -1
    }

    #[inline]
    pub fn is_headland(&self, y: i32) -> bool {
        y == -1 || y == self.top()
    }

    /// Total number of `(corridor, y, orientation)` states.
    pub fn num_states(&self) -> usize {
        self.num_corridors() as usize * (self.corridor_len as usize + 2) * 2
    }
}

impl TryFrom<FieldSpecRepr> for FieldSpec {
    type Error = EnvError;

    fn try_from(r: FieldSpecRepr) -> Result<Self, Self::Error> {
        Self::with_max_steps(r.num_rows, r.corridor_len, r.max_steps)
    }
}

impl From<FieldSpec> for FieldSpecRepr {
    fn from(f: FieldSpec) -> Self {
        Self {
            num_rows: f.num_rows,
            corridor_len: f.corridor_len,
            max_steps: f.max_steps,
        }
    }
}

/// Heading along the corridor axis. Encoded as 0 (up, +y) / 1 (down, -y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Up,
    Down,
}

impl Orientation {
    pub const ALL: [Orientation; 2] = [Orientation::Up, Orientation::Down];

    #[inline]
    pub fn code(self) -> u32 {
        match self {
            Orientation::Up => 0,
            Orientation::Down => 1,
        }
    }

    pub fn from_code(code: u32) -> Result<Self, EnvError> {
        match code {
            0 => Ok(Orientation::Up),
            1 => Ok(Orientation::Down),
            other => Err(EnvError::MalformedAction(format!(
                "orientation must be 0 or 1, got {other}"
            ))),
        }
    }

    #[inline]
    pub fn flipped(self) -> Self {
        match self {
            Orientation::Up => Orientation::Down,
            Orientation::Down => Orientation::Up,
        }
    }

    /// Vertical unit displacement of a forward move.
    #[inline]
    pub fn forward_dy(self) -> i32 {
        match self {
            Orientation::Up => 1,
            Orientation::Down => -1,
        }
    }
}

impl Serialize for Orientation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.code())
    }
}

impl<'de> Deserialize<'de> for Orientation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = u32::deserialize(d)?;
        Orientation::from_code(code).map_err(serde::de::Error::custom)
    }
}

/// Robot pose in the abstract field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RobotStateRepr", into = "RobotStateRepr")]
pub struct RobotState {
    /// Corridor index `k`; the corridor sits at `x = k + 0.5`.
    pub corridor: u32,
    pub y: i32,
    pub orientation: Orientation,
}

#[derive(Serialize, Deserialize)]
struct RobotStateRepr {
    corridor_x: f64,
    y: i32,
    orientation: Orientation,
}

impl RobotState {
    pub fn new(corridor: u32, y: i32, orientation: Orientation) -> Self {
        Self {
            corridor,
            y,
            orientation,
        }
    }

    /// Builds a state from the half-integer corridor coordinate.
    pub fn from_corridor_x(corridor_x: f64, y: i32, orientation: Orientation) -> Result<Self, EnvError> {
        let corridor = corridor_index(corridor_x)?;
        Ok(Self::new(corridor, y, orientation))
    }

    #[inline]
    pub fn corridor_x(&self) -> f64 {
        f64::from(self.corridor) + 0.5
    }

    pub fn validate(&self, field: &FieldSpec) -> Result<(), EnvError> {
        if self.corridor >= field.num_corridors() {
            return Err(EnvError::InvalidState(format!(
                "corridor_x {} outside 0.5..={}",
                self.corridor_x(),
                f64::from(field.num_corridors()) - 0.5
            )));
        }
        if self.y < -1 || self.y > field.top() {
            return Err(EnvError::InvalidState(format!(
                "y {} outside -1..={}",
                self.y,
                field.top()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for RobotState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.corridor_x(),
            self.y,
            match self.orientation {
                Orientation::Up => "up",
                Orientation::Down => "down",
            }
        )
    }
}

impl TryFrom<RobotStateRepr> for RobotState {
    type Error = EnvError;

    fn try_from(r: RobotStateRepr) -> Result<Self, Self::Error> {
        RobotState::from_corridor_x(r.corridor_x, r.y, r.orientation)
    }
}

impl From<RobotState> for RobotStateRepr {
    fn from(s: RobotState) -> Self {
        Self {
            corridor_x: s.corridor_x(),
            y: s.y,
            orientation: s.orientation,
        }
    }
}

/// Converts a half-integer corridor coordinate (`0.5`, `1.5`, ...) to its index.
pub fn corridor_index(corridor_x: f64) -> Result<u32, EnvError> {
    let k = corridor_x - 0.5;
    if !k.is_finite() || k < 0.0 || k.fract() != 0.0 || k > f64::from(u32::MAX) {
        return Err(EnvError::InvalidState(format!(
            "corridor_x must be a non-negative half-integer, got {corridor_x}"
        )));
    }
    Ok(k as u32)
}

/// A sampling point on a planted row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoalSpec {
    pub row: u32,
    pub y: i32,
}

impl GoalSpec {
    pub fn new(row: u32, y: i32) -> Self {
        Self { row, y }
    }

    pub fn validate(&self, field: &FieldSpec) -> Result<(), EnvError> {
        if self.row >= field.num_rows() {
            return Err(EnvError::InvalidGoal(format!(
                "goal row {} outside 0..{}",
                self.row,
                field.num_rows()
            )));
        }
        if self.y < 0 || self.y >= field.top() {
            return Err(EnvError::InvalidGoal(format!(
                "goal y {} outside 0..{}",
                self.y,
                field.top()
            )));
        }
        Ok(())
    }
}

/// Decoded movement component of an [`Action`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Movement {
    Forward,
    Backward,
    /// Lateral switch at a headland to the corridor with this index.
    Switch { corridor: u32 },
}

/// Two-component action `[orientation, move]`.
///
/// `move` 0 and 1 are unit forward/backward steps along the (possibly just
/// changed) heading; `move >= 2` switches to the corridor at `move - 1.5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub orientation: Orientation,
    pub movement: u32,
}

impl Action {
    pub const FORWARD: u32 = 0;
    pub const BACKWARD: u32 = 1;

    pub fn new(orientation: Orientation, movement: u32) -> Self {
        Self {
            orientation,
            movement,
        }
    }

    pub fn from_codes(orientation: u32, movement: u32) -> Result<Self, EnvError> {
        Ok(Self::new(Orientation::from_code(orientation)?, movement))
    }

    pub fn forward(orientation: Orientation) -> Self {
        Self::new(orientation, Self::FORWARD)
    }

    pub fn backward(orientation: Orientation) -> Self {
        Self::new(orientation, Self::BACKWARD)
    }

    pub fn switch_to(orientation: Orientation, corridor: u32) -> Self {
        Self::new(orientation, corridor + 2)
    }

    /// Unit vertical step in direction `dy` (+1 or -1) while facing `orientation`.
    pub fn vertical(orientation: Orientation, dy: i32) -> Self {
        if dy == orientation.forward_dy() {
            Self::forward(orientation)
        } else {
            Self::backward(orientation)
        }
    }

    #[inline]
    pub fn kind(&self) -> Movement {
        match self.movement {
            0 => Movement::Forward,
            1 => Movement::Backward,
            m => Movement::Switch { corridor: m - 2 },
        }
    }

    /// Signed vertical direction of a unit move, `None` for switches.
    pub fn vertical_dy(&self) -> Option<i32> {
        match self.kind() {
            Movement::Forward => Some(self.orientation.forward_dy()),
            Movement::Backward => Some(-self.orientation.forward_dy()),
            Movement::Switch { .. } => None,
        }
    }

    pub fn codes(&self) -> [u32; 2] {
        [self.orientation.code(), self.movement]
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.orientation.code(), self.movement)
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.codes().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [o, m] = <[u32; 2]>::deserialize(d)?;
        Action::from_codes(o, m).map_err(serde::de::Error::custom)
    }
}

/// Formats a sequence in the bracketed `[[o,m],...]` form.
pub fn format_actions(actions: &[Action]) -> String {
    let mut out = String::from("[");
    for (i, a) in actions.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&a.to_string());
    }
    out.push(']');
    out
}

/// Parses `[[o,m],...]`.
pub fn parse_actions(text: &str) -> Result<Vec<Action>, EnvError> {
    serde_json::from_str(text).map_err(|e| EnvError::MalformedAction(e.to_string()))
}
