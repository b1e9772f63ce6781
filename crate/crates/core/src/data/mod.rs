//! Trajectory ingestion: leader–follower events, dataset splits, descriptive statistics.

mod load;
mod split;
mod stats;

pub use load::{
    load_events, read_events, write_events, ColumnMapping, Extraction, ExtractionConfig, Rejection,
};
pub use split::{split_dataset, DatasetSplit};
pub use stats::{
    descriptive_stats, fit_lognormal, fit_lognormal_headway, headway_samples, HeadwaySource,
    LognormalFit, StatsReport, Summary,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on sample-time spacing, seconds.
pub const DT_TOLERANCE: f64 = 1e-9;

/// Followers slower than this (m/s) have no defined time headway.
pub const HEADWAY_SPEED_FLOOR: f64 = 0.1;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),
    #[error("schema error: row {row}: cannot parse `{value}` in column `{column}`")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("event {event_id}: {reason}")]
    InvalidEvent { event_id: String, reason: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("fit error: {0}")]
    Fit(String),
}

/// One synchronized leader/follower observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub time: f64,
    pub lead_position: f64,
    pub lead_speed: f64,
    pub follow_position: f64,
    pub follow_speed: f64,
}

impl TrajectorySample {
    /// Net gap between the vehicles, m.
    pub fn gap(&self) -> f64 {
        self.lead_position - self.follow_position
    }

    /// Leader minus follower speed, m/s.
    pub fn rel_speed(&self) -> f64 {
        self.lead_speed - self.follow_speed
    }
}

/// A leader–follower pair sampled at a constant interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CarFollowingEvent {
    id: String,
    dt: f64,
    samples: Vec<TrajectorySample>,
}

impl CarFollowingEvent {
    /// Builds an event, checking spacing, ordering, positive gap and non-negative speeds.
    ///
    /// Sample times are kept as given; loaders re-base them to start at zero.
    pub fn new(
        id: impl Into<String>,
        dt: f64,
        samples: Vec<TrajectorySample>,
    ) -> Result<Self, DataError> {
        let id = id.into();
        let invalid = |reason: String| DataError::InvalidEvent {
            event_id: id.clone(),
            reason,
        };
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("sampling interval {dt} is not positive")));
        }
        if samples.len() < 2 {
            return Err(invalid(format!(
                "needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        let t0 = samples[0].time;
        for (k, s) in samples.iter().enumerate() {
            let fields = [
                s.time,
                s.lead_position,
                s.lead_speed,
                s.follow_position,
                s.follow_speed,
            ];
            if fields.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("non-finite value at sample {k}")));
            }
            if s.lead_speed < 0.0 || s.follow_speed < 0.0 {
                return Err(invalid(format!("negative speed at t={}", s.time)));
            }
            if s.gap() <= 0.0 {
                return Err(invalid(format!(
                    "leader not ahead of follower at t={}",
                    s.time
                )));
            }
            let expected = t0 + k as f64 * dt;
            if (s.time - expected).abs() > DT_TOLERANCE * (k as f64).max(1.0) {
                return Err(invalid(format!(
                    "non-uniform timestep at sample {k}: t={} expected {expected}",
                    s.time
                )));
            }
        }
        Ok(Self { id, dt, samples })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    /// Recorded follower accelerations by forward difference; one per step (len − 1).
    pub fn follower_accels(&self) -> Vec<f64> {
        self.samples
            .windows(2)
            .map(|w| (w[1].follow_speed - w[0].follow_speed) / self.dt)
            .collect()
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, xl: f64, vl: f64, xf: f64, vf: f64) -> TrajectorySample {
        TrajectorySample {
            time: t,
            lead_position: xl,
            lead_speed: vl,
            follow_position: xf,
            follow_speed: vf,
        }
    }

    #[test]
    fn rejects_single_sample() {
        let err =
            CarFollowingEvent::new("a", 0.1, vec![sample(0.0, 10.0, 1.0, 0.0, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("at least 2"));
    }

    #[test]
    fn rejects_leader_behind() {
        let s = vec![
            sample(0.0, 10.0, 1.0, 0.0, 1.0),
            sample(0.1, 0.0, 1.0, 0.1, 1.0),
        ];
        assert!(CarFollowingEvent::new("a", 0.1, s).is_err());
    }

    #[test]
    fn rejects_negative_speed_and_names_event() {
        let s = vec![
            sample(0.0, 10.0, 1.0, 0.0, 1.0),
            sample(0.1, 10.1, -1.0, 0.1, 1.0),
        ];
        let err = CarFollowingEvent::new("ev7", 0.1, s).unwrap_err();
        assert!(err.to_string().contains("ev7"));
    }

    #[test]
    fn recorded_accels_are_forward_differences() {
        let s = vec![
            sample(0.0, 10.0, 1.0, 0.0, 1.0),
            sample(0.1, 10.1, 1.0, 0.1, 1.2),
            sample(0.2, 10.2, 1.0, 0.2, 1.1),
        ];
        let ev = CarFollowingEvent::new("a", 0.1, s).unwrap();
        let acc = ev.follower_accels();
        assert_eq!(acc.len(), 2);
        assert!((acc[0] - 2.0).abs() < 1e-12);
        assert!((acc[1] + 1.0).abs() < 1e-12);
    }
}
