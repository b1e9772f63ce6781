//! Longitudinal car-following environment.
//!
//! The leader replays its recorded speed profile. The follower integrates the
//! commanded acceleration with explicit Euler on speed (clamped at zero) and
//! trapezoidal updates of position and spacing.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::CarFollowingEvent;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("non-finite {0} in environment step")]
    NonFinite(&'static str),
    #[error("acceleration {accel} outside bounds [{min}, {max}]")]
    ActionOutOfBounds { accel: f64, min: f64, max: f64 },
    #[error("timestep must be positive, got {0}")]
    Timestep(f64),
    #[error("episode already finished")]
    Finished,
    #[error("start index {start} beyond event of {len} samples")]
    Start { start: usize, len: usize },
}

/// Observation: follower speed, spacing and leader-minus-follower speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvState<T = f64> {
    pub follow_speed: T,
    pub spacing: T,
    pub rel_speed: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    bound(deserialize = "T: Scalar + serde::de::DeserializeOwned")
)]
pub struct EnvConfig<T = f64> {
    /// m/s²
    pub a_min: T,
    /// m/s²
    pub a_max: T,
    /// A step whose resulting spacing is at or below this gap (m) is a collision.
    pub collision_gap: T,
}

impl<T: Scalar> Default for EnvConfig<T> {
    fn default() -> Self {
        Self {
            a_min: T::lit(-3.0),
            a_max: T::lit(3.0),
            collision_gap: T::zero(),
        }
    }
}

impl<T: Scalar> EnvConfig<T> {
    /// No actuator limits; used to replay recorded drivers.
    pub fn unbounded() -> Self {
        Self {
            a_min: T::neg_infinity(),
            a_max: T::infinity(),
            ..Self::default()
        }
    }

    pub fn clamp(&self, accel: T) -> T {
        accel.max(self.a_min).min(self.a_max)
    }
}

/// Commanded follower acceleration, m/s².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action<T = f64> {
    pub accel: T,
}

impl<T: Scalar> Action<T> {
    pub fn new(accel: T, config: &EnvConfig<T>) -> Result<Self, EnvError> {
        if accel.is_nan() {
            return Err(EnvError::NonFinite("acceleration"));
        }
        if accel < config.a_min || accel > config.a_max {
            return Err(EnvError::ActionOutOfBounds {
                accel: accel.to_f64_lossy(),
                min: config.a_min.to_f64_lossy(),
                max: config.a_max.to_f64_lossy(),
            });
        }
        Ok(Self { accel })
    }

    pub fn clamped(accel: T, config: &EnvConfig<T>) -> Self {
        Self {
            accel: config.clamp(accel),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<T = f64> {
    pub next_state: EnvState<T>,
    pub collided: bool,
    pub done: bool,
    pub follow_position: T,
}

/// Advances one step against the leader's next recorded speed.
///
/// `done` is set only on collision here; [`Episode`] also ends on leader exhaustion.
pub fn step<T: Scalar>(
    config: &EnvConfig<T>,
    state: &EnvState<T>,
    follow_position: T,
    action: Action<T>,
    lead_speed_next: T,
    dt: T,
) -> Result<StepOutcome<T>, EnvError> {
    let inputs = [
        state.follow_speed,
        state.spacing,
        state.rel_speed,
        follow_position,
        action.accel,
        lead_speed_next,
        dt,
    ];
    if inputs.iter().any(|x| !x.is_finite()) {
        return Err(EnvError::NonFinite("input"));
    }
    if !(dt > T::zero()) {
        return Err(EnvError::Timestep(dt.to_f64_lossy()));
    }
    if action.accel < config.a_min || action.accel > config.a_max {
        return Err(EnvError::ActionOutOfBounds {
            accel: action.accel.to_f64_lossy(),
            min: config.a_min.to_f64_lossy(),
            max: config.a_max.to_f64_lossy(),
        });
    }
    let half = T::lit(0.5);
    let follow_speed = (state.follow_speed + action.accel * dt).max(T::zero());
    let rel_speed = lead_speed_next - follow_speed;
    let spacing = state.spacing + (state.rel_speed + rel_speed) * half * dt;
    let follow_position = follow_position + (state.follow_speed + follow_speed) * half * dt;
    let collided = spacing <= config.collision_gap;
    Ok(StepOutcome {
        next_state: EnvState {
            follow_speed,
            spacing,
            rel_speed,
        },
        collided,
        done: collided,
        follow_position,
    })
}

/// Initial observation read off the event's first sample.
pub fn reset(event: &CarFollowingEvent) -> EnvState {
    state_at(event, 0)
}

fn state_at(event: &CarFollowingEvent, k: usize) -> EnvState {
    let s = &event.samples()[k];
    EnvState {
        follow_speed: s.follow_speed,
        spacing: s.gap(),
        rel_speed: s.rel_speed(),
    }
}

/// A single rollout over one event; owns the evolving state.
#[derive(Debug, Clone)]
pub struct Episode<'a> {
    event: &'a CarFollowingEvent,
    config: EnvConfig,
    cursor: usize,
    state: EnvState,
    follow_position: f64,
    collided: bool,
}

impl<'a> Episode<'a> {
    pub fn new(event: &'a CarFollowingEvent, config: EnvConfig) -> Self {
        Self::starting_at(event, config, 0).expect("index 0 always exists")
    }

    /// Starts from the recorded state at sample `start`.
    pub fn starting_at(
        event: &'a CarFollowingEvent,
        config: EnvConfig,
        start: usize,
    ) -> Result<Self, EnvError> {
        if start >= event.len() {
            return Err(EnvError::Start {
                start,
                len: event.len(),
            });
        }
        Ok(Self {
            event,
            config,
            cursor: start,
            state: state_at(event, start),
            follow_position: event.samples()[start].follow_position,
            collided: false,
        })
    }

    pub fn event(&self) -> &'a CarFollowingEvent {
        self.event
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> EnvState {
        self.state
    }

    /// Absolute sample index of the current state.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn time(&self) -> f64 {
        self.event.samples()[self.cursor].time
    }

    pub fn follow_position(&self) -> f64 {
        self.follow_position
    }

    pub fn collided(&self) -> bool {
        self.collided
    }

    pub fn is_done(&self) -> bool {
        self.collided || self.cursor + 1 >= self.event.len()
    }

    pub fn step(&mut self, accel: f64) -> Result<StepOutcome, EnvError> {
        if self.is_done() {
            return Err(EnvError::Finished);
        }
        let lead_next = self.event.samples()[self.cursor + 1].lead_speed;
        let action = Action::new(accel, &self.config)?;
        let mut out = step(
            &self.config,
            &self.state,
            self.follow_position,
            action,
            lead_next,
            self.event.dt(),
        )?;
        self.cursor += 1;
        self.state = out.next_state;
        self.follow_position = out.follow_position;
        self.collided = out.collided;
        out.done = self.is_done();
        Ok(out)
    }
}

#[derive(Debug, Error)]
#[error("{0}")]
pub struct ControllerError(pub String);

/// What a controller sees at each step.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub event: &'a CarFollowingEvent,
    /// Absolute sample index of `state`.
    pub index: usize,
    pub state: EnvState,
    pub prev_accel: f64,
}

/// Longitudinal policy. Implementations are stateless so rollouts can run in parallel.
pub trait Controller: Send + Sync {
    fn name(&self) -> &str;
    fn accel(&self, ctx: &StepContext<'_>) -> Result<f64, ControllerError>;
}

/// Replays the recorded follower's forward-difference accelerations.
#[derive(Debug, Clone, Default)]
pub struct ReplayController;

impl Controller for ReplayController {
    fn name(&self) -> &str {
        "ground_truth"
    }

    fn accel(&self, ctx: &StepContext<'_>) -> Result<f64, ControllerError> {
        let s = ctx.event.samples();
        let next = s
            .get(ctx.index + 1)
            .ok_or_else(|| ControllerError("no recorded sample after the last step".into()))?;
        Ok((next.follow_speed - s[ctx.index].follow_speed) / ctx.event.dt())
    }
}

/// Constant command; mostly useful in tests.
#[derive(Debug, Clone)]
pub struct ConstantController(pub f64);

impl Controller for ConstantController {
    fn name(&self) -> &str {
        "constant"
    }

    fn accel(&self, _: &StepContext<'_>) -> Result<f64, ControllerError> {
        Ok(self.0)
    }
}

/// Per-step record of a rollout. Row `k` holds the state at the start of the
/// step and the acceleration applied during it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulatedTrace {
    pub event_id: String,
    pub dt: f64,
    pub t: Vec<f64>,
    pub accel: Vec<f64>,
    pub v_follow: Vec<f64>,
    pub spacing: Vec<f64>,
    pub rel_speed: Vec<f64>,
    pub x_follow: Vec<f64>,
    /// State after the final step.
    pub final_state: Option<EnvState>,
    pub final_x_follow: Option<f64>,
    pub collided: bool,
}

impl SimulatedTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// CSV with header `t,accel,v_follow,spacing,rel_speed,x_follow`.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "accel", "v_follow", "spacing", "rel_speed", "x_follow"])?;
        for k in 0..self.len() {
            w.write_record(
                [
                    self.t[k],
                    self.accel[k],
                    self.v_follow[k],
                    self.spacing[k],
                    self.rel_speed[k],
                    self.x_follow[k],
                ]
                .map(|x| x.to_string()),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RolloutError {
    #[error("controller failed at step {step}: {source}")]
    Controller {
        step: usize,
        #[source]
        source: ControllerError,
    },
    #[error("environment failed at step {step}: {source}")]
    Env {
        step: usize,
        #[source]
        source: EnvError,
    },
}

/// Runs `controller` over the whole event (clamping its output to the bounds).
pub fn rollout(
    event: &CarFollowingEvent,
    controller: &dyn Controller,
    config: &EnvConfig,
) -> Result<SimulatedTrace, RolloutError> {
    rollout_from(event, controller, config, 0)
}

pub fn rollout_from(
    event: &CarFollowingEvent,
    controller: &dyn Controller,
    config: &EnvConfig,
    start: usize,
) -> Result<SimulatedTrace, RolloutError> {
    let mut ep = Episode::starting_at(event, *config, start)
        .map_err(|source| RolloutError::Env { step: 0, source })?;
    let mut trace = SimulatedTrace {
        event_id: event.id().to_string(),
        dt: event.dt(),
        ..Default::default()
    };
    let mut prev_accel = 0.0;
    let mut step = 0;
    while !ep.is_done() {
        let state = ep.state();
        let ctx = StepContext {
            event,
            index: ep.cursor(),
            state,
            prev_accel,
        };
        let raw = controller
            .accel(&ctx)
            .map_err(|source| RolloutError::Controller { step, source })?;
        if !raw.is_finite() {
            return Err(RolloutError::Controller {
                step,
                source: ControllerError(format!("non-finite acceleration {raw}")),
            });
        }
        let accel = config.clamp(raw);
        trace.t.push(ep.time() - event.samples()[start].time);
        trace.accel.push(accel);
        trace.v_follow.push(state.follow_speed);
        trace.spacing.push(state.spacing);
        trace.rel_speed.push(state.rel_speed);
        trace.x_follow.push(ep.follow_position());
        let out = ep
            .step(accel)
            .map_err(|source| RolloutError::Env { step, source })?;
        trace.final_state = Some(out.next_state);
        trace.final_x_follow = Some(out.follow_position);
        prev_accel = accel;
        step += 1;
    }
    trace.collided = ep.collided();
    Ok(trace)
}
