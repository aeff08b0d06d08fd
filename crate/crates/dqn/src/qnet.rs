//! Q-network, action indexing and masked epsilon-greedy selection.

use ndarray::Array2;
use rand::Rng;
use rowplan_core::env::{observe, Action, FieldSpec, GoalSpec, Orientation, RobotState, OBS_DIM};

use crate::mlp::Mlp;
use crate::DqnError;

/// Flat action indexing shared by every curriculum stage.
///
/// Index `o * (max_rows + 1) + m` encodes action `[o, m]`, where `m` runs
/// over forward, backward and the `max_rows - 1` switch targets of the
/// largest field. Smaller fields mask the switch codes they lack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionSpace {
    max_rows: u32,
}

impl ActionSpace {
    pub fn new(max_rows: u32) -> Self {
        assert!(max_rows >= 2, "a field has at least two rows");
        Self { max_rows }
    }

    pub fn max_rows(&self) -> u32 {
        self.max_rows
    }

    fn per_orientation(&self) -> usize {
        self.max_rows as usize + 1
    }

    pub fn len(&self) -> usize {
        2 * self.per_orientation()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, action: &Action) -> Option<usize> {
        (action.movement <= self.max_rows)
            .then(|| action.orientation.code() as usize * self.per_orientation() + action.movement as usize)
    }

    pub fn action(&self, index: usize) -> Action {
        assert!(index < self.len(), "action index {index} out of range");
        let o = if index < self.per_orientation() {
            Orientation::Up
        } else {
            Orientation::Down
        };
        Action::new(o, (index % self.per_orientation()) as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Interior,
    Top,
    Bottom,
}

/// The part of a state that decides which actions are valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MaskKey {
    pub num_rows: u32,
    pub corridor: u32,
    pub place: Place,
}

impl MaskKey {
    pub fn of(field: &FieldSpec, state: &RobotState) -> Self {
        let place = if state.y == field.top() {
            Place::Top
        } else if state.y == field.bottom() {
            Place::Bottom
        } else {
            Place::Interior
        };
        Self {
            num_rows: field.num_rows(),
            corridor: state.corridor,
            place,
        }
    }

    /// Valid actions: vertical moves that stay on the field, and switches to
    /// another existing corridor from a headland.
    pub fn fill(&self, space: &ActionSpace, mask: &mut Vec<bool>) {
        mask.clear();
        mask.resize(space.len(), false);
        for (i, slot) in mask.iter_mut().enumerate() {
            let a = space.action(i);
            *slot = match a.vertical_dy() {
                Some(dy) => !((self.place == Place::Top && dy > 0) || (self.place == Place::Bottom && dy < 0)),
                None => {
                    let target = a.movement - 2;
                    self.place != Place::Interior && target + 1 < self.num_rows && target != self.corridor
                }
            };
        }
    }

    pub fn mask(&self, space: &ActionSpace) -> Vec<bool> {
        let mut m = Vec::new();
        self.fill(space, &mut m);
        m
    }
}

pub fn observation(state: &RobotState, goal: &GoalSpec, field: &FieldSpec) -> [f32; OBS_DIM] {
    observe(state, goal, field).map(|v| v as f32)
}

/// Q-value approximator: an [`Mlp`] from observations to one value per action.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub mlp: Mlp<f32>,
    space: ActionSpace,
}

impl QNetwork {
    pub fn new<R: Rng + ?Sized>(max_rows: u32, hidden: &[usize], rng: &mut R) -> Self {
        let space = ActionSpace::new(max_rows);
        let sizes: Vec<usize> = std::iter::once(OBS_DIM)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(space.len()))
            .collect();
        Self {
            mlp: Mlp::new_random(&sizes, rng),
            space,
        }
    }

    pub fn from_mlp(mlp: Mlp<f32>, max_rows: u32) -> Result<Self, DqnError> {
        let space = ActionSpace::new(max_rows);
        if mlp.input_dim() != OBS_DIM || mlp.output_dim() != space.len() {
            return Err(DqnError::Shape(format!(
                "network maps {} -> {}, expected {} -> {}",
                mlp.input_dim(),
                mlp.output_dim(),
                OBS_DIM,
                space.len()
            )));
        }
        Ok(Self { mlp, space })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn max_rows(&self) -> u32 {
        self.space.max_rows()
    }

    pub fn q_values(&self, obs: &[f32; OBS_DIM]) -> Vec<f32> {
        self.mlp.forward_row(obs)
    }

    pub fn q_batch(&self, obs: &Array2<f32>) -> Array2<f32> {
        self.mlp.forward(obs.view())
    }
}

/// Epsilon-greedy choice among valid actions.
///
/// With probability `epsilon` the action is uniform over valid indices,
/// otherwise it is the valid argmax of `q`, ties going to the lowest index.
pub fn select_from_q<R: Rng + ?Sized>(
    q: &[f32],
    epsilon: f64,
    mask: &[bool],
    rng: &mut R,
) -> Result<usize, DqnError> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(DqnError::InvalidConfig(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if q.len() != mask.len() {
        return Err(DqnError::Shape(format!("{} Q-values for a mask of {}", q.len(), mask.len())));
    }
    let valid = mask.iter().filter(|&&m| m).count();
    if valid == 0 {
        return Err(DqnError::EmptyMask);
    }
    if rng.random::<f64>() < epsilon {
        let k = rng.random_range(0..valid);
        return Ok(mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .nth(k)
            .map(|(i, _)| i)
            .expect("k < valid"));
    }
    Ok(masked_argmax(q, mask).expect("mask has a valid entry"))
}

pub fn select_action<R: Rng + ?Sized>(
    net: &QNetwork,
    obs: &[f32; OBS_DIM],
    epsilon: f64,
    mask: &[bool],
    rng: &mut R,
) -> Result<usize, DqnError> {
    select_from_q(&net.q_values(obs), epsilon, mask, rng)
}

/// Index of the largest valid value (first on ties).
pub fn masked_argmax(q: &[f32], mask: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f32)> = None;
    for (i, (&v, &ok)) in q.iter().zip(mask).enumerate() {
        if ok && best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Largest valid value, or `None` if nothing is valid.
pub fn masked_max(q: &[f32], mask: &[bool]) -> Option<f32> {
    masked_argmax(q, mask).map(|i| q[i])
}
