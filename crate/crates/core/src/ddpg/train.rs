//! Episode loop: draw a training event, roll out with exploration, learn per step.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::agent::{DdpgAgent, UpdateConfig, HIDDEN};
use super::buffer::{ReplayBuffer, Transition};
use super::noise::{OuConfig, OuNoise};
use super::normalize::StateNormalizer;
use super::policy::Policy;
use super::DdpgError;
use crate::data::CarFollowingEvent;
use crate::env::{EnvConfig, Episode};
use crate::fuel::FuelModel;
use crate::objectives::{reward, RewardConfig, StepSignals};
use crate::seed::derive_seed;

/// Every field is optional in JSON; missing ones take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub episodes: usize,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub noise: OuConfig,
    pub warmup_steps: usize,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub normalizer: StateNormalizer,
    pub rolling_window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 3000,
            gamma: 0.99,
            tau: 0.005,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            batch_size: 64,
            buffer_capacity: 100_000,
            noise: OuConfig::default(),
            warmup_steps: 1000,
            seed: 0,
            hidden: HIDDEN.to_vec(),
            normalizer: StateNormalizer::default(),
            rolling_window: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), DdpgError> {
        let bad = |m: &str| Err(DdpgError::Argument(m.into()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if self.episodes == 0 {
            return bad("episodes must be at least 1");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("buffer capacity must hold at least one batch");
        }
        if self.rolling_window == 0 {
            return bad("rolling window must be positive");
        }
        Ok(())
    }

    fn update(&self) -> UpdateConfig {
        UpdateConfig {
            gamma: self.gamma,
            tau: self.tau,
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub mean_reward: f64,
    pub rolling_reward: f64,
    pub collisions_cum: usize,
    pub steps: usize,
    pub fuel_ml: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub episodes: Vec<EpisodeRecord>,
}

impl TrainLog {
    /// CSV `episode,mean_reward,rolling_reward,collisions_cum,steps,fuel_ml`.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.episodes {
            w.serialize(r)?;
        }
        if self.episodes.is_empty() {
            w.write_record([
                "episode",
                "mean_reward",
                "rolling_reward",
                "collisions_cum",
                "steps",
                "fuel_ml",
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub struct TrainOutcome {
    pub policy: Policy,
    pub log: TrainLog,
    pub agent: DdpgAgent<f64>,
    pub buffer: ReplayBuffer<f64>,
}

/// Trains a policy on `events`. Reproducible bit-for-bit under `config.seed`.
///
/// `observer` sees every finished episode. A collision ends the episode with the
/// reward's collision penalty and is the only terminal transition; running out of
/// leader data truncates without marking the transition terminal.
pub fn train(
    events: &[CarFollowingEvent],
    env: &EnvConfig,
    reward_cfg: &RewardConfig,
    fuel: &FuelModel,
    config: &TrainConfig,
    mut observer: impl FnMut(&EpisodeRecord),
) -> Result<TrainOutcome, DdpgError> {
    config.validate()?;
    if events.is_empty() {
        return Err(DdpgError::Argument("training set is empty".into()));
    }
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "ddpg/init"));
    let mut draw_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "ddpg/episodes"));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "ddpg/noise"));
    let mut batch_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "ddpg/batches"));

    let mut agent = DdpgAgent::<f64>::new(&config.hidden, &mut init_rng);
    let mut buffer = ReplayBuffer::new(config.buffer_capacity);
    let mut noise = OuNoise::new(config.noise.theta);
    let norm = config.normalizer;
    let scale = env.a_max;
    let update = config.update();

    let mut log = TrainLog::default();
    let mut collisions = 0usize;
    let mut total_steps = 0usize;
    for episode in 0..config.episodes {
        let event = &events[draw_rng.random_range(0..events.len())];
        let mut ep = Episode::new(event, *env);
        let sigma = config.noise.sigma_at(episode, config.episodes);
        noise.reset();
        let mut prev_accel = 0.0;
        let mut reward_sum = 0.0;
        let mut fuel_ml = 0.0;
        let mut steps = 0usize;
        let ctx = |step: usize, source: DdpgError| DdpgError::Training {
            episode,
            step,
            source: Box::new(source),
        };
        while !ep.is_done() {
            let state = ep.state();
            let s = norm.normalize(&state);
            let y = agent.actor.forward(&s)[0];
            let y = (y + noise.sample(sigma, &mut noise_rng)).clamp(-1.0, 1.0);
            let accel = env.clamp(y * scale);
            let out = ep.step(accel).map_err(|e| ctx(steps, DdpgError::Env(e)))?;
            let signals = StepSignals {
                next_spacing: out.next_state.spacing,
                next_rel_speed: out.next_state.rel_speed,
                next_follow_speed: out.next_state.follow_speed,
                speed: state.follow_speed,
                accel,
                prev_accel,
                dt: event.dt(),
                collided: out.collided,
            };
            let r =
                reward(&signals, reward_cfg, fuel).map_err(|e| ctx(steps, DdpgError::Reward(e)))?;
            fuel_ml += fuel.rate(state.follow_speed, accel) * event.dt();
            reward_sum += r.total;
            buffer.push(Transition {
                state: s,
                action: accel / scale,
                reward: r.total,
                next_state: norm.normalize(&out.next_state),
                done: out.collided,
            });
            total_steps += 1;
            steps += 1;
            prev_accel = accel;
            if total_steps >= config.warmup_steps {
                if let Some(batch) = buffer.sample(config.batch_size, &mut batch_rng) {
                    agent
                        .update_step(&batch, &update)
                        .map_err(|e| ctx(steps - 1, e))?;
                }
            }
        }
        if ep.collided() {
            collisions += 1;
        }
        let mean_reward = if steps > 0 {
            reward_sum / steps as f64
        } else {
            0.0
        };
        let window_start = log.episodes.len().saturating_sub(config.rolling_window - 1);
        let window = &log.episodes[window_start..];
        let rolling_reward = (window.iter().map(|r| r.mean_reward).sum::<f64>() + mean_reward)
            / (window.len() + 1) as f64;
        let rec = EpisodeRecord {
            episode,
            mean_reward,
            rolling_reward,
            collisions_cum: collisions,
            steps,
            fuel_ml,
        };
        observer(&rec);
        log.episodes.push(rec);
    }
    let policy = Policy {
        actor: agent.actor.clone(),
        normalizer: norm,
        action_scale: scale,
    };
    Ok(TrainOutcome {
        policy,
        log,
        agent,
        buffer,
    })
}
