//! Surrogate safety, efficiency and comfort measures and the per-step reward.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuel::FuelModel;
use crate::scalar::Scalar;

/// TTC at or above this value (s) carries no safety penalty.
pub const TTC_THRESHOLD: f64 = 4.0;
/// Lower clip of the fuel term.
pub const FUEL_TERM_FLOOR: f64 = -5.0;
/// Minimum follower speed (m/s) for a defined time headway.
pub const SPEED_FLOOR: f64 = 0.1;

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("invalid headway model: sigma must be positive, got {0}")]
    Sigma(f64),
    #[error("non-finite reward input: {0}")]
    NonFinite(&'static str),
}

/// Time to collision for a closing gap: `−spacing / rel_speed` when `rel_speed < 0`.
///
/// `rel_speed` is leader minus follower. Returns `None` when the gap is not closing.
pub fn ttc<T: Scalar>(spacing: T, rel_speed: T) -> Option<T> {
    (rel_speed < T::zero()).then(|| -spacing / rel_speed)
}

/// Signed TTC `−spacing / rel_speed` for any nonzero relative speed (negative when opening).
pub fn ttc_signed<T: Scalar>(spacing: T, rel_speed: T) -> Option<T> {
    (rel_speed != T::zero()).then(|| -spacing / rel_speed)
}

/// `ln(TTC/4)` for TTC up to 4 s (clipped below at `floor`); zero otherwise.
pub fn f_ttc<T: Scalar>(ttc: Option<T>, floor: T) -> T {
    match ttc {
        Some(t) if t <= T::lit(TTC_THRESHOLD) => (t.max(floor) / T::lit(TTC_THRESHOLD)).ln(),
        _ => T::zero(),
    }
}

/// Time headway `gap / follow_speed`, undefined below the speed floor or for a negative gap.
pub fn time_headway<T: Scalar>(gap: T, follow_speed: T) -> Option<T> {
    (follow_speed >= T::lit(SPEED_FLOOR) && gap >= T::zero()).then(|| gap / follow_speed)
}

/// Lognormal headway density parameters (log-mean, log-stddev).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadwayModel<T = f64> {
    pub mu: T,
    pub sigma: T,
}

impl<T: Scalar> HeadwayModel<T> {
    pub fn new(mu: T, sigma: T) -> Result<Self, ObjectiveError> {
        if !(sigma > T::zero() && sigma.is_finite() && mu.is_finite()) {
            return Err(ObjectiveError::Sigma(sigma.to_f64_lossy()));
        }
        Ok(Self { mu, sigma })
    }

    pub fn pdf(&self, x: T) -> T {
        if !(x > T::zero()) {
            return T::zero();
        }
        let z = (x.ln() - self.mu) / self.sigma;
        let norm = x * self.sigma * T::lit(std::f64::consts::TAU).sqrt();
        (-(z * z) / T::lit(2.0)).exp() / norm
    }

    /// Density maximum, `exp(μ − σ²)`.
    pub fn mode(&self) -> T {
        (self.mu - self.sigma * self.sigma).exp()
    }
}

impl<T: Scalar> Default for HeadwayModel<T> {
    /// Fitted to the NGSIM I-80 car-following events.
    fn default() -> Self {
        Self {
            mu: T::lit(0.4226),
            sigma: T::lit(0.5436),
        }
    }
}

/// Lognormal density at `h`; zero when headway is undefined.
pub fn f_headway<T: Scalar>(h: Option<T>, model: &HeadwayModel<T>) -> T {
    h.map_or(T::zero(), |h| model.pdf(h))
}

pub fn jerk<T: Scalar>(accel_now: T, accel_prev: T, dt: T) -> T {
    (accel_now - accel_prev) / dt
}

/// `−(j / scale)²`.
pub fn f_jerk<T: Scalar>(j: T, scale: T) -> T {
    let r = j / scale;
    -(r * r)
}

/// `−rate / scale`, clipped to `[−5, 0]`.
pub fn f_fuel<T: Scalar>(rate: T, scale: T) -> T {
    (-rate / scale).max(T::lit(FUEL_TERM_FLOOR)).min(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    bound(deserialize = "T: Scalar + serde::de::DeserializeOwned")
)]
pub struct RewardWeights<T = f64> {
    pub w_ttc: T,
    pub w_headway: T,
    pub w_fuel: T,
    pub w_jerk: T,
}

impl<T: Scalar> Default for RewardWeights<T> {
    fn default() -> Self {
        Self {
            w_ttc: T::one(),
            w_headway: T::one(),
            w_fuel: T::one(),
            w_jerk: T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    bound(deserialize = "T: Scalar + serde::de::DeserializeOwned")
)]
pub struct RewardConfig<T = f64> {
    pub weights: RewardWeights<T>,
    pub headway: HeadwayModel<T>,
    /// m/s³
    pub jerk_scale: T,
    /// mL/s
    pub fuel_scale: T,
    pub collision_penalty: T,
    /// s
    pub ttc_floor: T,
}

impl<T: Scalar> Default for RewardConfig<T> {
    fn default() -> Self {
        Self {
            weights: RewardWeights::default(),
            headway: HeadwayModel::default(),
            jerk_scale: T::lit(60.0),
            fuel_scale: T::one(),
            collision_penalty: T::lit(-10.0),
            ttc_floor: T::lit(0.1),
        }
    }
}

/// Inputs for one transition. Spacing, relative and follower speed describe the
/// state reached after the action; `speed` and `accel` are the step-start values
/// that drive fuel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSignals<T = f64> {
    pub next_spacing: T,
    pub next_rel_speed: T,
    pub next_follow_speed: T,
    pub speed: T,
    pub accel: T,
    pub prev_accel: T,
    pub dt: T,
    pub collided: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown<T = f64> {
    pub f_ttc: T,
    pub f_headway: T,
    pub f_fuel: T,
    pub f_jerk: T,
    pub total: T,
    pub collision_penalty_applied: bool,
}

/// Composes the four weighted terms, plus the collision penalty on a colliding step.
pub fn reward<T: Scalar>(
    s: &StepSignals<T>,
    config: &RewardConfig<T>,
    fuel: &FuelModel<T>,
) -> Result<RewardBreakdown<T>, ObjectiveError> {
    let inputs = [
        s.next_spacing,
        s.next_rel_speed,
        s.next_follow_speed,
        s.speed,
        s.accel,
        s.prev_accel,
        s.dt,
    ];
    if inputs.iter().any(|x| !x.is_finite()) {
        return Err(ObjectiveError::NonFinite("step signals"));
    }
    let parts = RewardParts {
        f_ttc: f_ttc(ttc(s.next_spacing, s.next_rel_speed), config.ttc_floor),
        f_headway: f_headway(
            time_headway(s.next_spacing, s.next_follow_speed),
            &config.headway,
        ),
        f_fuel: f_fuel(fuel.rate(s.speed, s.accel), config.fuel_scale),
        f_jerk: f_jerk(jerk(s.accel, s.prev_accel, s.dt), config.jerk_scale),
    };
    let out = compose(
        parts,
        &config.weights,
        s.collided.then_some(config.collision_penalty),
    );
    if !out.total.is_finite() {
        return Err(ObjectiveError::NonFinite("reward total"));
    }
    Ok(out)
}

/// Unweighted reward components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParts<T = f64> {
    pub f_ttc: T,
    pub f_headway: T,
    pub f_fuel: T,
    pub f_jerk: T,
}

pub fn compose<T: Scalar>(
    p: RewardParts<T>,
    w: &RewardWeights<T>,
    penalty: Option<T>,
) -> RewardBreakdown<T> {
    let mut total =
        w.w_ttc * p.f_ttc + w.w_headway * p.f_headway + w.w_fuel * p.f_fuel + w.w_jerk * p.f_jerk;
    if let Some(pen) = penalty {
        total += pen;
    }
    RewardBreakdown {
        f_ttc: p.f_ttc,
        f_headway: p.f_headway,
        f_fuel: p.f_fuel,
        f_jerk: p.f_jerk,
        total,
        collision_penalty_applied: penalty.is_some(),
    }
}
