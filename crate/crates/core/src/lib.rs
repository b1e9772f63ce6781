//! Eco-driving car-following: trajectory data, a kinematic follower
//! environment, IDM and VT-Micro models, a multi-objective reward, a DDPG
//! trainer and evaluation reports.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); data handling,
//! rollouts and training run in `f64`. Concrete aliases live at the crate root.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod ddpg;
pub mod env;
pub mod eval;
pub mod fuel;
pub mod histogram;
pub mod idm;
pub mod objectives;
pub mod scalar;
pub mod seed;
pub mod synthetic;

pub use data::{CarFollowingEvent, DataError, TrajectorySample};
pub use env::{Controller, EnvConfig, EnvState};
pub use fuel::{FuelModel, VtMicroCoefficients};
pub use idm::IdmParams;
pub use objectives::{HeadwayModel, RewardConfig};
pub use scalar::Scalar;

pub type EnvState32 = env::EnvState<f32>;
pub type EnvState64 = env::EnvState<f64>;
pub type EnvConfig32 = env::EnvConfig<f32>;
pub type EnvConfig64 = env::EnvConfig<f64>;
pub type IdmParams32 = idm::IdmParams<f32>;
pub type IdmParams64 = idm::IdmParams<f64>;
pub type FuelModel32 = fuel::FuelModel<f32>;
pub type FuelModel64 = fuel::FuelModel<f64>;
pub type VtMicro32 = fuel::VtMicroCoefficients<f32>;
pub type VtMicro64 = fuel::VtMicroCoefficients<f64>;
pub type RewardConfig32 = objectives::RewardConfig<f32>;
pub type RewardConfig64 = objectives::RewardConfig<f64>;
pub type HeadwayModel32 = objectives::HeadwayModel<f32>;
pub type HeadwayModel64 = objectives::HeadwayModel<f64>;
pub type Mlp32 = ddpg::Mlp<f32>;
pub type Mlp64 = ddpg::Mlp<f64>;
pub type Agent32 = ddpg::DdpgAgent<f32>;
pub type Agent64 = ddpg::DdpgAgent<f64>;
pub type ReplayBuffer32 = ddpg::ReplayBuffer<f32>;
pub type ReplayBuffer64 = ddpg::ReplayBuffer<f64>;
