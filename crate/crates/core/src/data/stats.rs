use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::histogram::Histogram;
use crate::objectives::{time_headway, ttc_signed};

use super::{CarFollowingEvent, DataError};

/// Mean, extremes and count of one quantity, pooled over steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let (min, max, sum) = values.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, 0.0),
            |(lo, hi, s), &v| (lo.min(v), hi.max(v), s + v),
        );
        Some(Self {
            count: values.len(),
            mean: sum / values.len() as f64,
            min,
            max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub events: usize,
    pub samples: usize,
    pub lead_speed: Summary,
    pub follow_speed: Summary,
    pub gap: Summary,
    pub ttc: Option<Summary>,
    pub jerk: Option<Summary>,
    pub headway: Option<Summary>,
    /// Absolute-value cap applied to signed TTC before summarizing.
    pub ttc_cap: f64,
    #[serde(skip)]
    pub histograms: BTreeMap<String, Histogram>,
}

/// Pooled descriptive statistics plus `bins`-bin histograms of speed, gap, TTC, jerk and headway.
///
/// Signed TTC values with magnitude above `ttc_cap` are left out. Jerk is the
/// second difference of recorded follower speed.
pub fn descriptive_stats(
    events: &[CarFollowingEvent],
    bins: usize,
    ttc_cap: f64,
) -> Result<StatsReport, DataError> {
    if events.is_empty() {
        return Err(DataError::Argument(
            "descriptive statistics need at least one event".into(),
        ));
    }
    if bins == 0 {
        return Err(DataError::Argument(
            "histogram bin count must be positive".into(),
        ));
    }
    let mut series: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for ev in events {
        for s in ev.samples() {
            series.entry("lead_speed").or_default().push(s.lead_speed);
            series
                .entry("follow_speed")
                .or_default()
                .push(s.follow_speed);
            series.entry("gap").or_default().push(s.gap());
            if let Some(t) = ttc_signed(s.gap(), s.rel_speed()).filter(|t| t.abs() <= ttc_cap) {
                series.entry("ttc").or_default().push(t);
            }
            if let Some(h) = time_headway(s.gap(), s.follow_speed) {
                series.entry("headway").or_default().push(h);
            }
        }
        let accel = ev.follower_accels();
        series
            .entry("jerk")
            .or_default()
            .extend(accel.windows(2).map(|w| (w[1] - w[0]) / ev.dt()));
    }
    let summary = |k: &str| series.get(k).and_then(|v| Summary::of(v));
    let histograms = series
        .iter()
        .filter_map(|(k, v)| Histogram::from_values(v, bins).map(|h| (k.to_string(), h)))
        .collect();
    Ok(StatsReport {
        events: events.len(),
        samples: events.iter().map(CarFollowingEvent::len).sum(),
        lead_speed: summary("lead_speed").expect("events are non-empty"),
        follow_speed: summary("follow_speed").expect("events are non-empty"),
        gap: summary("gap").expect("events are non-empty"),
        ttc: summary("ttc"),
        jerk: summary("jerk"),
        headway: summary("headway"),
        ttc_cap,
        histograms,
    })
}

/// Every defined per-step time headway across the events.
pub fn headway_samples(events: &[CarFollowingEvent]) -> Vec<f64> {
    events
        .iter()
        .flat_map(|ev| {
            ev.samples()
                .iter()
                .filter_map(|s| time_headway(s.gap(), s.follow_speed))
        })
        .collect()
}

/// Which events feed the headway fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadwaySource {
    #[default]
    All,
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub samples: usize,
}

/// Maximum-likelihood lognormal fit: mean and population standard deviation of `ln h`.
pub fn fit_lognormal_headway(events: &[CarFollowingEvent]) -> Result<LognormalFit, DataError> {
    fit_lognormal(&headway_samples(events))
}

/// Lognormal fit of arbitrary positive samples; non-positive values are skipped.
pub fn fit_lognormal(values: &[f64]) -> Result<LognormalFit, DataError> {
    let logs: Vec<f64> = values
        .iter()
        .filter(|&&h| h > 0.0)
        .map(|h| h.ln())
        .collect();
    if logs.len() < 2 {
        return Err(DataError::Fit(format!(
            "need at least 2 positive headway samples, got {}",
            logs.len()
        )));
    }
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / n;
    Ok(LognormalFit {
        mu,
        sigma: var.sqrt(),
        samples: logs.len(),
    })
}
