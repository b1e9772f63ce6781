//! Intelligent Driver Model baseline and a grid-search calibrator.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::CarFollowingEvent;
use crate::env::{rollout, Controller, ControllerError, EnvConfig, StepContext};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum IdmError {
    #[error("invalid IDM parameters: {0}")]
    Params(String),
    #[error("IDM needs positive spacing, got {0}")]
    Spacing(f64),
    #[error("calibration failed: {0}")]
    Calibration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    bound(deserialize = "T: Scalar + serde::de::DeserializeOwned")
)]
pub struct IdmParams<T = f64> {
    /// Maximum acceleration, m/s².
    pub a_max: T,
    /// Desired speed, m/s.
    pub v_desired: T,
    /// Free-road exponent.
    pub beta: T,
    /// Standstill spacing, m.
    pub s_jam: T,
    /// Desired time headway, s.
    #[serde(rename = "T_headway")]
    pub t_headway: T,
    /// Comfortable deceleration, m/s².
    pub a_comf: T,
}

impl<T: Scalar> Default for IdmParams<T> {
    /// Conventional IDM magnitudes, not calibrated values.
    fn default() -> Self {
        Self {
            a_max: T::lit(1.0),
            v_desired: T::lit(15.0),
            beta: T::lit(4.0),
            s_jam: T::lit(2.0),
            t_headway: T::lit(1.2),
            a_comf: T::lit(2.0),
        }
    }
}

impl<T: Scalar> IdmParams<T> {
    pub fn validate(&self) -> Result<(), IdmError> {
        let ok = self.a_max > T::zero()
            && self.v_desired > T::zero()
            && self.beta > T::zero()
            && self.s_jam >= T::zero()
            && self.t_headway >= T::zero()
            && self.a_comf > T::zero();
        let finite = [
            self.a_max,
            self.v_desired,
            self.beta,
            self.s_jam,
            self.t_headway,
            self.a_comf,
        ]
        .iter()
        .all(|x| x.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(IdmError::Params(format!("{self:?}")))
        }
    }
}

/// Desired spacing `s_jam + max(0, v·T + v·Δv / (2√(a_max·a_comf)))`.
///
/// `dv_closing` is follower minus leader speed (positive when closing), i.e. the
/// negated environment relative speed.
pub fn desired_spacing<T: Scalar>(p: &IdmParams<T>, v: T, dv_closing: T) -> T {
    let dynamic = v * p.t_headway + v * dv_closing / (T::lit(2.0) * (p.a_max * p.a_comf).sqrt());
    p.s_jam + dynamic.max(T::zero())
}

/// Unclamped IDM acceleration `a_max·[1 − (v/ṽ)^β − (s̃/s)²]`.
pub fn idm_accel_raw<T: Scalar>(
    p: &IdmParams<T>,
    v: T,
    spacing: T,
    dv_closing: T,
) -> Result<T, IdmError> {
    if !(spacing > T::zero()) {
        return Err(IdmError::Spacing(spacing.to_f64_lossy()));
    }
    let free = (v / p.v_desired).powf(p.beta);
    let interaction = desired_spacing(p, v, dv_closing) / spacing;
    Ok(p.a_max * (T::one() - free - interaction * interaction))
}

/// IDM acceleration clamped to the environment's actuator bounds.
pub fn idm_accel<T: Scalar>(
    p: &IdmParams<T>,
    bounds: &EnvConfig<T>,
    v: T,
    spacing: T,
    dv_closing: T,
) -> Result<T, IdmError> {
    idm_accel_raw(p, v, spacing, dv_closing).map(|a| bounds.clamp(a))
}

/// IDM as a rollout controller.
#[derive(Debug, Clone)]
pub struct IdmController {
    pub params: IdmParams,
    name: String,
}

impl IdmController {
    pub fn new(params: IdmParams) -> Self {
        Self {
            params,
            name: "idm".into(),
        }
    }
}

impl Controller for IdmController {
    fn name(&self) -> &str {
        &self.name
    }

    fn accel(&self, ctx: &StepContext<'_>) -> Result<f64, ControllerError> {
        idm_accel_raw(
            &self.params,
            ctx.state.follow_speed,
            ctx.state.spacing,
            -ctx.state.rel_speed,
        )
        .map_err(|e| ControllerError(e.to_string()))
    }
}

/// Candidate values per parameter; the calibrator searches their Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub a_max: Vec<f64>,
    pub v_desired: Vec<f64>,
    pub beta: Vec<f64>,
    pub s_jam: Vec<f64>,
    #[serde(rename = "T_headway")]
    pub t_headway: Vec<f64>,
    pub a_comf: Vec<f64>,
    /// When set, evaluate only this many candidates drawn without replacement.
    #[serde(default)]
    pub random_samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl SearchSpace {
    pub fn single(p: IdmParams) -> Self {
        Self {
            a_max: vec![p.a_max],
            v_desired: vec![p.v_desired],
            beta: vec![p.beta],
            s_jam: vec![p.s_jam],
            t_headway: vec![p.t_headway],
            a_comf: vec![p.a_comf],
            random_samples: None,
            seed: 0,
        }
    }

    pub fn candidates(&self) -> Vec<IdmParams> {
        let mut out = Vec::new();
        for &a_max in &self.a_max {
            for &v_desired in &self.v_desired {
                for &beta in &self.beta {
                    for &s_jam in &self.s_jam {
                        for &t_headway in &self.t_headway {
                            for &a_comf in &self.a_comf {
                                out.push(IdmParams {
                                    a_max,
                                    v_desired,
                                    beta,
                                    s_jam,
                                    t_headway,
                                    a_comf,
                                });
                            }
                        }
                    }
                }
            }
        }
        match self.random_samples {
            Some(n) if n < out.len() => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                out.choose_multiple(&mut rng, n).copied().collect()
            }
            _ => out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub params: IdmParams,
    /// Mean squared spacing error over non-colliding events, m².
    pub spacing_mse: f64,
    pub collided_events: usize,
}

/// Picks the candidate with the fewest colliding events, then the lowest mean
/// squared spacing error against the recorded follower.
pub fn calibrate_idm(
    events: &[CarFollowingEvent],
    space: &SearchSpace,
    env: &EnvConfig,
) -> Result<CalibrationResult, IdmError> {
    if events.is_empty() {
        return Err(IdmError::Calibration("no events".into()));
    }
    let candidates: Vec<IdmParams> = space
        .candidates()
        .into_iter()
        .filter(|p| p.validate().is_ok())
        .collect();
    if candidates.is_empty() {
        return Err(IdmError::Calibration(
            "search space has no valid candidate".into(),
        ));
    }
    let scored: Vec<CalibrationResult> = candidates
        .par_iter()
        .map(|p| score(p, events, env))
        .collect();
    scored
        .into_iter()
        .filter(|r| r.collided_events < events.len())
        .min_by(|a, b| {
            a.collided_events
                .cmp(&b.collided_events)
                .then(a.spacing_mse.total_cmp(&b.spacing_mse))
        })
        .ok_or_else(|| IdmError::Calibration("every candidate collides on every event".into()))
}

fn score(p: &IdmParams, events: &[CarFollowingEvent], env: &EnvConfig) -> CalibrationResult {
    let ctl = IdmController::new(*p);
    let mut sq = 0.0;
    let mut n = 0usize;
    let mut collided = 0;
    for ev in events {
        match rollout(ev, &ctl, env) {
            Ok(tr) if !tr.collided => {
                // Row k of the trace is the state at sample k; the final state matches the last sample.
                let simulated = tr
                    .spacing
                    .iter()
                    .copied()
                    .chain(tr.final_state.map(|s| s.spacing));
                for (sim, rec) in simulated.zip(ev.samples()) {
                    sq += (sim - rec.gap()).powi(2);
                    n += 1;
                }
            }
            _ => collided += 1,
        }
    }
    let spacing_mse = if n > 0 { sq / n as f64 } else { f64::INFINITY };
    CalibrationResult {
        params: *p,
        spacing_mse,
        collided_events: collided,
    }
}
