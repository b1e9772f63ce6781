//! Synthetic leader profiles and self-consistent car-following events.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{CarFollowingEvent, DataError, TrajectorySample};
use crate::env::{step, Action, EnvConfig, EnvState};
use crate::idm::{idm_accel_raw, IdmParams};

#[derive(Debug, Clone, PartialEq)]
pub enum LeaderProfile {
    Constant {
        speed: f64,
    },
    ConstantAccel {
        speed: f64,
        accel: f64,
    },
    Sinusoid {
        base: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    },
    /// Piecewise-constant targets `(start_time, speed)` approached at `ramp` m/s².
    Steps {
        levels: Vec<(f64, f64)>,
        ramp: f64,
    },
}

impl LeaderProfile {
    /// `n` speeds sampled every `dt`, floored at zero.
    pub fn speeds(&self, n: usize, dt: f64) -> Vec<f64> {
        match self {
            Self::Constant { speed } => vec![*speed; n],
            Self::ConstantAccel { speed, accel } => (0..n)
                .map(|k| (speed + accel * k as f64 * dt).max(0.0))
                .collect(),
            Self::Sinusoid {
                base,
                amplitude,
                period,
                phase,
            } => (0..n)
                .map(|k| {
                    let t = k as f64 * dt;
                    (base + amplitude * (std::f64::consts::TAU * t / period + phase).sin()).max(0.0)
                })
                .collect(),
            Self::Steps { levels, ramp } => {
                let mut v = levels.first().map_or(0.0, |l| l.1);
                (0..n)
                    .map(|k| {
                        // The target in force over [t_{k-1}, t_k) drives sample k.
                        if k > 0 {
                            let t = (k - 1) as f64 * dt;
                            let target = levels
                                .iter()
                                .rev()
                                .find(|l| l.0 <= t + 1e-9)
                                .map_or(v, |l| l.1);
                            v = (v + (target - v).clamp(-ramp * dt, ramp * dt)).max(0.0);
                        }
                        v
                    })
                    .collect()
            }
        }
    }
}

/// Builds an event whose positions are the trapezoidal integrals of the speeds,
/// so the environment's kinematics reproduce it exactly.
///
/// `follower` maps (state, previous accel) to the follower's acceleration.
pub fn synthesize_event(
    id: &str,
    lead_speeds: &[f64],
    dt: f64,
    initial_gap: f64,
    initial_follow_speed: f64,
    mut follower: impl FnMut(&EnvState, f64) -> f64,
) -> Result<CarFollowingEvent, DataError> {
    let config = EnvConfig::unbounded();
    let mut x_lead = 100.0 + initial_gap;
    let mut x_follow = 100.0;
    let mut state = EnvState {
        follow_speed: initial_follow_speed,
        spacing: initial_gap,
        rel_speed: lead_speeds[0] - initial_follow_speed,
    };
    let mut prev = 0.0;
    let mut samples = Vec::with_capacity(lead_speeds.len());
    for k in 0..lead_speeds.len() {
        samples.push(TrajectorySample {
            time: k as f64 * dt,
            lead_position: x_lead,
            lead_speed: lead_speeds[k],
            follow_position: x_follow,
            follow_speed: state.follow_speed,
        });
        if k + 1 == lead_speeds.len() {
            break;
        }
        let a = follower(&state, prev);
        let out = step(
            &config,
            &state,
            x_follow,
            Action { accel: a },
            lead_speeds[k + 1],
            dt,
        )
        .map_err(|e| DataError::InvalidEvent {
            event_id: id.into(),
            reason: e.to_string(),
        })?;
        x_lead += 0.5 * (lead_speeds[k] + lead_speeds[k + 1]) * dt;
        x_follow = out.follow_position;
        state = out.next_state;
        prev = a;
    }
    CarFollowingEvent::new(id, dt, samples)
}

/// An IDM-driven follower event against `profile`.
pub fn idm_event(
    id: &str,
    profile: &LeaderProfile,
    params: &IdmParams,
    n: usize,
    dt: f64,
    initial_gap: f64,
    initial_follow_speed: f64,
) -> Result<CarFollowingEvent, DataError> {
    let speeds = profile.speeds(n, dt);
    synthesize_event(
        id,
        &speeds,
        dt,
        initial_gap,
        initial_follow_speed,
        |s, _| {
            idm_accel_raw(params, s.follow_speed, s.spacing.max(1e-3), -s.rel_speed)
                .unwrap_or(-3.0)
                .clamp(-3.0, 3.0)
        },
    )
}

/// `count` events alternating sinusoidal and step-speed leaders, followed by a
/// default-parameter IDM driver. Deterministic under `seed`.
pub fn synthetic_events(count: usize, seed: u64, duration: f64, dt: f64) -> Vec<CarFollowingEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (duration / dt).round() as usize + 1;
    let params = IdmParams::default();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = out.len();
        let profile = if k % 2 == 0 {
            let base = rng.random_range(6.0..13.0);
            LeaderProfile::Sinusoid {
                base,
                amplitude: rng.random_range(1.0..4.0f64).min(base - 1.0),
                period: rng.random_range(8.0..25.0),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            }
        } else {
            let mut t = 0.0;
            let mut levels = Vec::new();
            while t < duration {
                levels.push((t, rng.random_range(3.0..14.0)));
                t += rng.random_range(4.0..8.0);
            }
            LeaderProfile::Steps {
                levels,
                ramp: rng.random_range(0.8..2.0),
            }
        };
        let speeds = profile.speeds(n, dt);
        let v0 = (speeds[0] + rng.random_range(-1.0..1.0)).max(0.0);
        let gap = params.s_jam + params.t_headway * v0 + rng.random_range(2.0..10.0);
        let id = format!("syn{k:04}");
        if let Ok(ev) = idm_event(&id, &profile, &params, n, dt, gap, v0) {
            out.push(ev);
        }
    }
    out
}
