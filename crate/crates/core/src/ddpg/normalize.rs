use serde::{Deserialize, Serialize};

use crate::env::EnvState;
use crate::scalar::Scalar;

/// Affine scaling of observations into roughly `[−1, 1]`, saturating at `±clip`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StateNormalizer {
    /// m/s
    pub speed_scale: f64,
    /// m
    pub spacing_scale: f64,
    /// m/s
    pub rel_speed_scale: f64,
    pub clip: f64,
}

impl Default for StateNormalizer {
    fn default() -> Self {
        Self {
            speed_scale: 30.0,
            spacing_scale: 100.0,
            rel_speed_scale: 10.0,
            clip: 1.1,
        }
    }
}

impl StateNormalizer {
    pub fn normalize<T: Scalar>(&self, s: &EnvState<T>) -> [T; 3] {
        let c = T::lit(self.clip);
        [
            (s.follow_speed / T::lit(self.speed_scale)).max(-c).min(c),
            (s.spacing / T::lit(self.spacing_scale)).max(-c).min(c),
            (s.rel_speed / T::lit(self.rel_speed_scale)).max(-c).min(c),
        ]
    }

    pub fn denormalize<T: Scalar>(&self, x: &[T; 3]) -> EnvState<T> {
        EnvState {
            follow_speed: x[0] * T::lit(self.speed_scale),
            spacing: x[1] * T::lit(self.spacing_scale),
            rel_speed: x[2] * T::lit(self.rel_speed_scale),
        }
    }
}
