//! Actor–critic networks, their losses and the DDPG update.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::buffer::Transition;
use super::nn::{Activation, Mlp};
use super::DdpgError;
use crate::scalar::Scalar;

/// Hidden widths shared by actor and critic.
pub const HIDDEN: [usize; 2] = [64, 64];

pub fn actor_sizes(hidden: &[usize]) -> Vec<usize> {
    std::iter::once(3)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(1))
        .collect()
}

pub fn critic_sizes(hidden: &[usize]) -> Vec<usize> {
    std::iter::once(4)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(1))
        .collect()
}

/// Deterministic policy output in `[−1, 1]`.
pub fn actor_forward<T: Scalar>(actor: &Mlp<T>, state: &[T; 3]) -> Result<T, DdpgError> {
    if actor.input_size() != 3 || actor.output_size() != 1 {
        return Err(DdpgError::Shape(format!(
            "actor must map 3 → 1, got {:?}",
            actor.sizes()
        )));
    }
    Ok(actor.forward(state)[0])
}

/// Q-value of a state/normalized-action pair.
pub fn critic_forward<T: Scalar>(
    critic: &Mlp<T>,
    state: &[T; 3],
    action: T,
) -> Result<T, DdpgError> {
    if critic.input_size() != 4 || critic.output_size() != 1 {
        return Err(DdpgError::Shape(format!(
            "critic must map 4 → 1, got {:?}",
            critic.sizes()
        )));
    }
    Ok(critic.forward(&critic_input(state, action))[0])
}

fn critic_input<T: Scalar>(state: &[T; 3], action: T) -> [T; 4] {
    [state[0], state[1], state[2], action]
}

/// Mean squared TD error `mean (Q(s,a) − y)²` and its parameter gradient.
pub fn critic_loss_and_grads<T: Scalar>(
    critic: &Mlp<T>,
    batch: &[Transition<T>],
    targets: &[T],
) -> (T, Mlp<T>) {
    let mut grads = critic.zeros_like();
    let n = T::from_usize(batch.len()).expect("batch size fits scalar");
    let mut loss = T::zero();
    for (tr, &y) in batch.iter().zip(targets) {
        let trace = critic.forward_trace(&critic_input(&tr.state, tr.action));
        let err = trace.output()[0] - y;
        loss += err * err;
        critic.backward(&trace, &[T::lit(2.0) * err / n], &mut grads);
    }
    (loss / n, grads)
}

/// Policy objective `mean Q(s, μ(s))` and the gradient of its negation w.r.t. actor parameters.
pub fn actor_objective_and_grads<T: Scalar>(
    actor: &Mlp<T>,
    critic: &Mlp<T>,
    states: &[[T; 3]],
) -> (T, Mlp<T>) {
    let mut actor_grads = actor.zeros_like();
    let n = T::from_usize(states.len()).expect("batch size fits scalar");
    let mut objective = T::zero();
    for s in states {
        let a_trace = actor.forward_trace(s);
        let a = a_trace.output()[0];
        let c_trace = critic.forward_trace(&critic_input(s, a));
        objective += c_trace.output()[0];
        let d_input = critic.input_gradient(&c_trace, &[-T::one() / n]);
        actor.backward(&a_trace, &[d_input[3]], &mut actor_grads);
    }
    (objective / n, actor_grads)
}

/// `r + γ(1 − done)·Q′(s′, μ′(s′))` per transition.
pub fn td_targets<T: Scalar>(
    actor_target: &Mlp<T>,
    critic_target: &Mlp<T>,
    batch: &[Transition<T>],
    gamma: T,
) -> Vec<T> {
    batch
        .iter()
        .map(|tr| {
            if tr.done {
                tr.reward
            } else {
                let a = actor_target.forward(&tr.next_state)[0];
                tr.reward + gamma * critic_target.forward(&critic_input(&tr.next_state, a))[0]
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossPair<T = f64> {
    pub critic_loss: T,
    pub actor_objective: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateConfig {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
}

/// Online and target networks with their optimizers.
#[derive(Debug, Clone)]
pub struct DdpgAgent<T = f64> {
    pub actor: Mlp<T>,
    pub critic: Mlp<T>,
    pub actor_target: Mlp<T>,
    pub critic_target: Mlp<T>,
    actor_opt: Adam<T>,
    critic_opt: Adam<T>,
}

impl<T: Scalar> DdpgAgent<T> {
    pub fn new<R: Rng + ?Sized>(hidden: &[usize], rng: &mut R) -> Self {
        let actor = Mlp::random(
            &actor_sizes(hidden),
            Activation::Tanh,
            Activation::Tanh,
            3e-3,
            rng,
        );
        let critic = Mlp::random(
            &critic_sizes(hidden),
            Activation::Tanh,
            Activation::Identity,
            3e-3,
            rng,
        );
        Self::from_networks(actor, critic)
    }

    pub fn from_networks(actor: Mlp<T>, critic: Mlp<T>) -> Self {
        let adam = AdamConfig::default();
        Self {
            actor_opt: Adam::new(actor.num_params(), adam),
            critic_opt: Adam::new(critic.num_params(), adam),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
        }
    }

    /// Critic regression, actor ascent on the refreshed critic, then soft target updates.
    pub fn update_step(
        &mut self,
        batch: &[Transition<T>],
        cfg: &UpdateConfig,
    ) -> Result<LossPair<T>, DdpgError> {
        if batch.is_empty() {
            return Err(DdpgError::Argument("empty batch".into()));
        }
        let targets = td_targets(
            &self.actor_target,
            &self.critic_target,
            batch,
            T::lit(cfg.gamma),
        );
        let (critic_loss, critic_grads) = critic_loss_and_grads(&self.critic, batch, &targets);
        if !critic_loss.is_finite() || !critic_grads.all_finite() {
            return Err(DdpgError::NonFinite("critic gradient".into()));
        }
        self.critic_opt
            .step(&mut self.critic, &critic_grads, T::lit(cfg.critic_lr));

        let states: Vec<[T; 3]> = batch.iter().map(|t| t.state).collect();
        let (actor_objective, actor_grads) =
            actor_objective_and_grads(&self.actor, &self.critic, &states);
        if !actor_objective.is_finite() || !actor_grads.all_finite() {
            return Err(DdpgError::NonFinite("actor gradient".into()));
        }
        self.actor_opt
            .step(&mut self.actor, &actor_grads, T::lit(cfg.actor_lr));

        let tau = T::lit(cfg.tau);
        self.actor_target.soft_update_from(&self.actor, tau);
        self.critic_target.soft_update_from(&self.critic, tau);
        Ok(LossPair {
            critic_loss,
            actor_objective,
        })
    }
}
