use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Ornstein–Uhlenbeck exploration with a linearly decaying volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OuConfig {
    pub theta: f64,
    pub sigma_start: f64,
    pub sigma_end: f64,
}

impl Default for OuConfig {
    fn default() -> Self {
        Self {
            theta: 0.15,
            sigma_start: 0.2,
            sigma_end: 0.02,
        }
    }
}

impl OuConfig {
    /// Volatility for `episode` out of `episodes`.
    pub fn sigma_at(&self, episode: usize, episodes: usize) -> f64 {
        if episodes <= 1 {
            return self.sigma_start;
        }
        let frac = episode as f64 / (episodes - 1) as f64;
        self.sigma_start + (self.sigma_end - self.sigma_start) * frac.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct OuNoise {
    theta: f64,
    x: f64,
}

impl OuNoise {
    pub fn new(theta: f64) -> Self {
        Self { theta, x: 0.0 }
    }

    pub fn reset(&mut self) {
        self.x = 0.0;
    }

    /// `x ← x − θx + σ·N(0, 1)`.
    pub fn sample<R: Rng + ?Sized>(&mut self, sigma: f64, rng: &mut R) -> f64 {
        let n: f64 = rng.sample(StandardNormal);
        self.x += -self.theta * self.x + sigma * n;
        self.x
    }
}
