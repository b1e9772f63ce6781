//! Deep deterministic policy gradient: networks, replay, exploration and training.

pub mod adam;
pub mod agent;
pub mod buffer;
pub mod nn;
pub mod noise;
pub mod normalize;
pub mod policy;
pub mod train;

pub use adam::{Adam, AdamConfig};
pub use agent::{
    actor_forward, actor_objective_and_grads, critic_forward, critic_loss_and_grads, td_targets,
    DdpgAgent, LossPair, UpdateConfig,
};
pub use buffer::{ReplayBuffer, Transition};
pub use nn::{Activation, ForwardTrace, Layer, Mlp};
pub use noise::{OuConfig, OuNoise};
pub use normalize::StateNormalizer;
pub use policy::{Policy, PolicyController};
pub use train::{train, EpisodeRecord, TrainConfig, TrainLog, TrainOutcome};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DdpgError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("non-finite {0}")]
    NonFinite(String),
    #[error("policy load error: {0}")]
    Load(String),
    #[error(transparent)]
    Env(#[from] crate::env::EnvError),
    #[error(transparent)]
    Reward(#[from] crate::objectives::ObjectiveError),
    #[error("training failed in episode {episode}, step {step}: {source}")]
    Training {
        episode: usize,
        step: usize,
        #[source]
        source: Box<DdpgError>,
    },
}
