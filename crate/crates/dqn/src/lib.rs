//! Deep Q-learning for the crop-row world, written from scratch: an MLP with
//! manual backpropagation, Adam, a replay buffer, a target network and a
//! curriculum over field sizes. [`DqnPlanner`] turns a trained network into a
//! [`rowplan_core::Planner`].

pub mod adam;
pub mod checkpoint;
pub mod fpenv;
pub mod mlp;
pub mod planner;
pub mod qnet;
pub mod replay;
pub mod train;

use thiserror::Error;

pub use checkpoint::{load, save, CheckpointMeta};
pub use planner::{plan_dqn, DqnPlanner};
pub use qnet::{select_action, ActionSpace, MaskKey, QNetwork};
pub use replay::{ReplayBuffer, Transition};
pub use train::{
    evaluate, run_curriculum, td_target, train_stage, train_step, CurriculumStage, EvalReport, TrainConfig,
    TrainingLog,
};

#[derive(Debug, Error)]
pub enum DqnError {
    #[error("no valid action in this state")]
    EmptyMask,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Env(#[from] rowplan_core::EnvError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
