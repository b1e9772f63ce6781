//! Controller evaluation over test events and tabular comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::CarFollowingEvent;
use crate::env::{rollout, Controller, EnvConfig, SimulatedTrace};
use crate::fuel::FuelModel;
use crate::histogram::Histogram;
use crate::objectives::{time_headway, ttc, ttc_signed};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("all {0} events failed")]
    AllFailed(usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Aggregation conventions, echoed into reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndicatorConfig {
    /// Closing-gap TTC values are capped here before averaging, and signed TTC
    /// beyond ±cap is left out of distributions. Seconds.
    pub ttc_cap: f64,
    /// Average per-event means instead of pooling steps.
    pub per_event_means: bool,
    pub bins: usize,
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        Self {
            ttc_cap: 50.0,
            per_event_means: false,
            bins: 50,
        }
    }
}

/// Per-step indicator values of one or more traces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepIndicators {
    /// Closing-gap TTC, capped.
    pub ttc: Vec<f64>,
    /// Signed TTC within ±cap.
    pub ttc_signed: Vec<f64>,
    /// Jerk from the second step on.
    pub jerk: Vec<f64>,
    pub headway: Vec<f64>,
    pub fuel_rate: Vec<f64>,
}

impl StepIndicators {
    fn extend(&mut self, other: &StepIndicators) {
        self.ttc.extend_from_slice(&other.ttc);
        self.ttc_signed.extend_from_slice(&other.ttc_signed);
        self.jerk.extend_from_slice(&other.jerk);
        self.headway.extend_from_slice(&other.headway);
        self.fuel_rate.extend_from_slice(&other.fuel_rate);
    }

    /// Indicator name → values, in the report's column order.
    pub fn series(&self) -> [(&'static str, &[f64]); 4] {
        [
            ("ttc", &self.ttc_signed),
            ("jerk", &self.jerk),
            ("headway", &self.headway),
            ("fuel_rate", &self.fuel_rate),
        ]
    }
}

/// Indicators from per-step (spacing, rel_speed, speed, accel) rows.
fn indicators_from_rows(
    spacing: &[f64],
    rel_speed: &[f64],
    speed: &[f64],
    accel: &[f64],
    dt: f64,
    fuel: &FuelModel,
    cfg: &IndicatorConfig,
) -> StepIndicators {
    let mut out = StepIndicators::default();
    for k in 0..spacing.len() {
        if let Some(t) = ttc(spacing[k], rel_speed[k]) {
            out.ttc.push(t.min(cfg.ttc_cap));
        }
        if let Some(t) = ttc_signed(spacing[k], rel_speed[k]).filter(|t| t.abs() <= cfg.ttc_cap) {
            out.ttc_signed.push(t);
        }
        if let Some(h) = time_headway(spacing[k], speed[k]) {
            out.headway.push(h);
        }
        out.fuel_rate.push(fuel.rate(speed[k], accel[k]));
        if k > 0 {
            out.jerk.push((accel[k] - accel[k - 1]) / dt);
        }
    }
    out
}

pub fn trace_indicators(
    trace: &SimulatedTrace,
    fuel: &FuelModel,
    cfg: &IndicatorConfig,
) -> StepIndicators {
    indicators_from_rows(
        &trace.spacing,
        &trace.rel_speed,
        &trace.v_follow,
        &trace.accel,
        trace.dt,
        fuel,
        cfg,
    )
}

/// Indicators read straight off the recording (no simulation); steps 0..len−1.
pub fn recorded_indicators(
    event: &CarFollowingEvent,
    fuel: &FuelModel,
    cfg: &IndicatorConfig,
) -> StepIndicators {
    let n = event.len() - 1;
    let s = &event.samples()[..n];
    let spacing: Vec<f64> = s.iter().map(|x| x.gap()).collect();
    let rel: Vec<f64> = s.iter().map(|x| x.rel_speed()).collect();
    let speed: Vec<f64> = s.iter().map(|x| x.follow_speed).collect();
    indicators_from_rows(
        &spacing,
        &rel,
        &speed,
        &event.follower_accels(),
        event.dt(),
        fuel,
        cfg,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSummary {
    pub controller: String,
    /// s; `None` when no step had a closing gap.
    pub mean_ttc: Option<f64>,
    /// m/s³
    pub mean_abs_jerk: Option<f64>,
    pub rms_jerk: Option<f64>,
    /// s
    pub mean_headway: Option<f64>,
    /// mL/s
    pub mean_fuel_rate: f64,
    pub events_evaluated: usize,
    pub collisions: usize,
    pub failed_events: usize,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn mean_of(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.collect();
    mean(&v)
}

/// Aggregates per-event indicators (already ordered by event id).
pub fn summarize(
    controller: &str,
    per_event: &[StepIndicators],
    collisions: usize,
    failed: usize,
    cfg: &IndicatorConfig,
) -> Result<IndicatorSummary, EvalError> {
    if per_event.is_empty() {
        return Err(EvalError::AllFailed(failed));
    }
    let abs_jerk = |e: &StepIndicators| e.jerk.iter().map(|j| j.abs()).collect::<Vec<_>>();
    let sq_jerk = |e: &StepIndicators| e.jerk.iter().map(|j| j * j).collect::<Vec<_>>();
    let (mean_ttc, mean_abs_jerk, rms_jerk, mean_headway, fuel) = if cfg.per_event_means {
        (
            mean_of(per_event.iter().filter_map(|e| mean(&e.ttc))),
            mean_of(per_event.iter().filter_map(|e| mean(&abs_jerk(e)))),
            mean_of(
                per_event
                    .iter()
                    .filter_map(|e| mean(&sq_jerk(e)).map(f64::sqrt)),
            ),
            mean_of(per_event.iter().filter_map(|e| mean(&e.headway))),
            mean_of(per_event.iter().filter_map(|e| mean(&e.fuel_rate))),
        )
    } else {
        let mut pooled = StepIndicators::default();
        per_event.iter().for_each(|e| pooled.extend(e));
        (
            mean(&pooled.ttc),
            mean(&abs_jerk(&pooled)),
            mean(&sq_jerk(&pooled)).map(f64::sqrt),
            mean(&pooled.headway),
            // Equal dt across steps: total fuel over total time is the mean rate.
            mean(&pooled.fuel_rate),
        )
    };
    Ok(IndicatorSummary {
        controller: controller.to_string(),
        mean_ttc,
        mean_abs_jerk,
        rms_jerk,
        mean_headway,
        mean_fuel_rate: fuel.ok_or_else(|| EvalError::Argument("no evaluated steps".into()))?,
        events_evaluated: per_event.len(),
        collisions,
        failed_events: failed,
    })
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub summary: IndicatorSummary,
    /// Successful traces, sorted by event id.
    pub traces: Vec<SimulatedTrace>,
    /// `(event_id, error)` for events the controller could not complete.
    pub failures: Vec<(String, String)>,
    /// Pooled per-step indicators for distribution export.
    pub steps: StepIndicators,
}

/// Rolls `controller` over every event (in parallel) and aggregates indicators.
///
/// A failing event is recorded and excluded; it never aborts the batch.
pub fn evaluate_controller(
    controller: &dyn Controller,
    events: &[CarFollowingEvent],
    env: &EnvConfig,
    fuel: &FuelModel,
    cfg: &IndicatorConfig,
) -> Result<Evaluation, EvalError> {
    if events.is_empty() {
        return Err(EvalError::Argument("test set is empty".into()));
    }
    let mut results: Vec<(String, Result<SimulatedTrace, String>)> = events
        .par_iter()
        .map(|ev| {
            (
                ev.id().to_string(),
                rollout(ev, controller, env).map_err(|e| e.to_string()),
            )
        })
        .collect();
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (id, r) in results {
        match r {
            Ok(t) if !t.is_empty() => traces.push(t),
            Ok(_) => failures.push((id, "no steps to evaluate".to_string())),
            Err(e) => failures.push((id, e)),
        }
    }
    let per_event: Vec<StepIndicators> = traces
        .iter()
        .map(|t| trace_indicators(t, fuel, cfg))
        .collect();
    let collisions = traces.iter().filter(|t| t.collided).count();
    let summary = summarize(
        controller.name(),
        &per_event,
        collisions,
        failures.len(),
        cfg,
    )?;
    let mut steps = StepIndicators::default();
    per_event.iter().for_each(|e| steps.extend(e));
    Ok(Evaluation {
        summary,
        traces,
        failures,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorValues {
    pub ttc: Option<f64>,
    pub jerk: Option<f64>,
    pub rms_jerk: Option<f64>,
    pub headway: Option<f64>,
    pub fuel_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerRow {
    pub name: String,
    pub indicators: IndicatorValues,
    /// Controller minus baseline, per indicator.
    pub deltas: IndicatorValues,
    pub collisions: usize,
    pub events: usize,
    pub failed_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub controllers: Vec<ControllerRow>,
    pub baseline: String,
    /// `100·(1 − fuel / fuel_baseline)` per controller.
    pub fuel_saving_pct: BTreeMap<String, f64>,
    pub config_echo: serde_json::Value,
}

pub fn fuel_saving_pct(controller_fuel: f64, baseline_fuel: f64) -> f64 {
    100.0 * (1.0 - controller_fuel / baseline_fuel)
}

fn values(s: &IndicatorSummary) -> IndicatorValues {
    IndicatorValues {
        ttc: s.mean_ttc,
        jerk: s.mean_abs_jerk,
        rms_jerk: s.rms_jerk,
        headway: s.mean_headway,
        fuel_rate: s.mean_fuel_rate,
    }
}

/// Builds the comparison against the summary named `baseline`.
pub fn compare(
    summaries: &[IndicatorSummary],
    baseline: &str,
    config_echo: serde_json::Value,
) -> Result<ComparisonReport, EvalError> {
    let base = summaries
        .iter()
        .find(|s| s.controller == baseline)
        .ok_or_else(|| {
            EvalError::Argument(format!("baseline `{baseline}` not among the summaries"))
        })?;
    if !(base.mean_fuel_rate > 0.0) {
        return Err(EvalError::Argument(
            "baseline fuel rate must be positive".into(),
        ));
    }
    let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a - b);
    let controllers = summaries
        .iter()
        .map(|s| ControllerRow {
            name: s.controller.clone(),
            indicators: values(s),
            deltas: IndicatorValues {
                ttc: diff(s.mean_ttc, base.mean_ttc),
                jerk: diff(s.mean_abs_jerk, base.mean_abs_jerk),
                rms_jerk: diff(s.rms_jerk, base.rms_jerk),
                headway: diff(s.mean_headway, base.mean_headway),
                fuel_rate: s.mean_fuel_rate - base.mean_fuel_rate,
            },
            collisions: s.collisions,
            events: s.events_evaluated,
            failed_events: s.failed_events,
        })
        .collect();
    let fuel_saving_pct = summaries
        .iter()
        .map(|s| {
            (
                s.controller.clone(),
                fuel_saving_pct(s.mean_fuel_rate, base.mean_fuel_rate),
            )
        })
        .collect();
    Ok(ComparisonReport {
        controllers,
        baseline: baseline.to_string(),
        fuel_saving_pct,
        config_echo,
    })
}

impl ComparisonReport {
    /// Aligned text table: TTC, jerk, time headway, fuel.
    pub fn render_table(&self) -> String {
        let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        let header = [
            "Model",
            "TTC (s)",
            "Jerk (m/s^3)",
            "Time Headway (s)",
            "Fuel Consumption (mL/s)",
            "Fuel saving (%)",
        ];
        let rows: Vec<[String; 6]> = self
            .controllers
            .iter()
            .map(|r| {
                [
                    r.name.clone(),
                    fmt(r.indicators.ttc),
                    fmt(r.indicators.jerk),
                    fmt(r.indicators.headway),
                    format!("{:.3}", r.indicators.fuel_rate),
                    format!(
                        "{:.2}",
                        self.fuel_saving_pct
                            .get(&r.name)
                            .copied()
                            .unwrap_or(f64::NAN)
                    ),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |cells: &[&str], out: &mut String| {
            let parts: Vec<String> = cells
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(k, (c, w))| {
                    if k == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", parts.join(" | ").trim_end());
        };
        line(&header, &mut out);
        let _ = writeln!(
            out,
            "{}",
            widths
                .iter()
                .map(|&w| "-".repeat(w))
                .collect::<Vec<_>>()
                .join("-+-")
        );
        for r in &rows {
            line(&r.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
        }
        out
    }
}

/// Histograms per indicator with bin edges shared by all controllers.
pub fn distributions(
    inputs: &[(&str, &StepIndicators)],
    bins: usize,
) -> BTreeMap<&'static str, Vec<(String, Histogram)>> {
    let mut out = BTreeMap::new();
    for (k, name) in ["ttc", "jerk", "headway", "fuel_rate"]
        .into_iter()
        .enumerate()
    {
        let range = Histogram::range_of(inputs.iter().flat_map(|(_, s)| s.series()[k].1.iter()));
        let Some((lo, hi)) = range else { continue };
        let hists = inputs
            .iter()
            .map(|(c, s)| {
                let mut h = Histogram::with_range(lo, hi, bins);
                h.extend(s.series()[k].1.iter().copied());
                (c.to_string(), h)
            })
            .collect();
        out.insert(name, hists);
    }
    out
}

/// Writes `dist_<indicator>.csv` files with header `controller,bin_left,bin_right,count`.
pub fn export_distributions(
    inputs: &[(&str, &StepIndicators)],
    bins: usize,
    dir: &Path,
) -> Result<Vec<std::path::PathBuf>, EvalError> {
    let mut written = Vec::new();
    for (name, hists) in distributions(inputs, bins) {
        let path = dir.join(format!("dist_{name}.csv"));
        let mut w = csv::Writer::from_writer(std::fs::File::create(&path)?);
        w.write_record(["controller", "bin_left", "bin_right", "count"])?;
        for (c, h) in &hists {
            for (k, n) in h.counts.iter().enumerate() {
                let (l, r) = h.edges(k);
                w.write_record([c.clone(), l.to_string(), r.to_string(), n.to_string()])?;
            }
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

/// Writes each trace as `<event_id>.csv` under `dir`.
pub fn write_traces(traces: &[SimulatedTrace], dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir)?;
    for t in traces {
        let safe: String = t
            .event_id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        let mut f = std::fs::File::create(dir.join(format!("{safe}.csv")))?;
        t.write_csv(&mut f)?;
        f.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::fixtures::constant_event;
    use crate::env::{ConstantController, ReplayController};
    use crate::fuel::{FuelUnits, Regime, VtMicroCoefficients};
    use crate::idm::{IdmController, IdmParams};

    fn unit_fuel() -> FuelModel {
        FuelModel::single_table(
            VtMicroCoefficients::zeros(Regime::Acceleration),
            FuelUnits::default(),
        )
    }

    fn summary(name: &str, fuel: f64) -> IndicatorSummary {
        IndicatorSummary {
            controller: name.into(),
            mean_ttc: Some(5.0),
            mean_abs_jerk: Some(0.5),
            rms_jerk: Some(0.7),
            mean_headway: Some(1.4),
            mean_fuel_rate: fuel,
            events_evaluated: 3,
            collisions: 0,
            failed_events: 0,
        }
    }

    #[test]
    fn fuel_saving_examples() {
        let r = compare(
            &[summary("eco", 0.86), summary("ground_truth", 0.96)],
            "ground_truth",
            serde_json::Value::Null,
        )
        .unwrap();
        assert!((r.fuel_saving_pct["eco"] - 10.4167).abs() < 1e-3);
        assert_eq!(r.fuel_saving_pct["ground_truth"], 0.0);
        let r = compare(
            &[summary("x", 1.2), summary("ground_truth", 0.96)],
            "ground_truth",
            serde_json::Value::Null,
        )
        .unwrap();
        assert!((r.fuel_saving_pct["x"] + 25.0).abs() < 1e-9);
        assert!(compare(
            &[summary("x", 1.2)],
            "ground_truth",
            serde_json::Value::Null
        )
        .is_err());
    }

    #[test]
    fn fuel_saving_is_scale_invariant() {
        for c in [0.001, 0.5, 3.0, 1e4] {
            assert!(
                (fuel_saving_pct(0.86 * c, 0.96 * c) - fuel_saving_pct(0.86, 0.96)).abs() < 1e-9
            );
        }
    }

    #[test]
    fn table_has_three_rows_in_order() {
        let r = compare(
            &[
                summary("ecofollower", 0.86),
                summary("idm", 0.87),
                summary("ground_truth", 0.96),
            ],
            "ground_truth",
            serde_json::Value::Null,
        )
        .unwrap();
        let t = r.render_table();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("Model"));
        let cols: Vec<usize> = ["TTC", "Jerk", "Time Headway", "Fuel Consumption"]
            .iter()
            .map(|c| lines[0].find(c).unwrap())
            .collect();
        assert!(cols.windows(2).all(|w| w[0] < w[1]));
        assert!(lines[2].starts_with("ecofollower"));
    }

    #[test]
    fn constant_speed_event_has_zero_jerk() {
        let ev = constant_event("a", 8.0, 20.0, 100, 0.1);
        let e = evaluate_controller(
            &IdmController::new(IdmParams {
                v_desired: 8.0,
                ..IdmParams::default()
            }),
            std::slice::from_ref(&ev),
            &EnvConfig::default(),
            &unit_fuel(),
            &IndicatorConfig::default(),
        )
        .unwrap();
        let cst = evaluate_controller(
            &ConstantController(0.0),
            &[ev],
            &EnvConfig::default(),
            &unit_fuel(),
            &IndicatorConfig::default(),
        )
        .unwrap();
        assert_eq!(cst.summary.mean_abs_jerk, Some(0.0));
        assert!(e.summary.mean_abs_jerk.unwrap().is_finite());
    }

    #[test]
    fn failed_events_are_isolated() {
        struct FailsOn(&'static str);
        impl Controller for FailsOn {
            fn name(&self) -> &str {
                "flaky"
            }
            fn accel(
                &self,
                ctx: &crate::env::StepContext<'_>,
            ) -> Result<f64, crate::env::ControllerError> {
                if ctx.event.id() == self.0 {
                    Err(crate::env::ControllerError("nope".into()))
                } else {
                    Ok(0.0)
                }
            }
        }
        let evs = vec![
            constant_event("a", 8.0, 20.0, 10, 0.1),
            constant_event("b", 8.0, 20.0, 10, 0.1),
        ];
        let e = evaluate_controller(
            &FailsOn("a"),
            &evs,
            &EnvConfig::default(),
            &unit_fuel(),
            &IndicatorConfig::default(),
        )
        .unwrap();
        assert_eq!(e.summary.events_evaluated, 1);
        assert_eq!(e.summary.failed_events, 1);
        assert_eq!(e.failures[0].0, "a");
    }

    #[test]
    fn replay_matches_recorded_on_constant_event() {
        let ev = constant_event("a", 8.0, 20.0, 50, 0.1);
        let e = evaluate_controller(
            &ReplayController,
            std::slice::from_ref(&ev),
            &EnvConfig::unbounded(),
            &unit_fuel(),
            &IndicatorConfig::default(),
        )
        .unwrap();
        let r = recorded_indicators(&ev, &unit_fuel(), &IndicatorConfig::default());
        for ((_, a), (_, b)) in e.steps.series().into_iter().zip(r.series()) {
            assert_eq!(a.len(), b.len());
            assert!(a
                .iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= 1e-9 * y.abs().max(1.0)));
        }
    }

    #[test]
    fn histogram_mass_is_conserved() {
        let a = StepIndicators {
            jerk: vec![-0.4, 0.0, 0.1, 0.4],
            fuel_rate: vec![1.0; 4],
            ..Default::default()
        };
        let b = StepIndicators {
            jerk: vec![-0.2, 0.3],
            fuel_rate: vec![1.0, 1.0],
            ..Default::default()
        };
        let d = distributions(&[("a", &a), ("b", &b)], 8);
        let jerk = &d["jerk"];
        assert_eq!(jerk[0].1.total(), 4);
        assert_eq!(jerk[1].1.total(), 2);
        assert_eq!((jerk[0].1.lo, jerk[0].1.hi), (-0.4, 0.4));
        assert_eq!(jerk[0].1.lo, jerk[1].1.lo);
        let fuel = &d["fuel_rate"];
        assert_eq!(fuel[0].1.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert!(!d.contains_key("ttc"));
    }
}
