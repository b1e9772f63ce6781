use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CarFollowingEvent, DataError, TrajectorySample, DT_TOLERANCE};

/// Maps source CSV headers onto the six canonical fields, with unit scale factors.
///
/// Scales multiply the raw values, e.g. `0.3048` converts feet to meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    pub event_id: String,
    pub t: String,
    pub x_lead: String,
    pub v_lead: String,
    pub x_follow: String,
    pub v_follow: String,
    pub time_scale: f64,
    pub position_scale: f64,
    pub speed_scale: f64,
}

impl Default for ColumnMapping {
    /// The normalized event file layout, SI units.
    fn default() -> Self {
        Self {
            event_id: "event_id".into(),
            t: "t".into(),
            x_lead: "x_lead".into(),
            v_lead: "v_lead".into(),
            x_follow: "x_follow".into(),
            v_follow: "v_follow".into(),
            time_scale: 1.0,
            position_scale: 1.0,
            speed_scale: 1.0,
        }
    }
}

impl ColumnMapping {
    pub fn from_json(text: &str) -> Result<Self, DataError> {
        serde_json::from_str(text).map_err(|e| DataError::Argument(format!("column mapping: {e}")))
    }

    fn columns(&self) -> [&str; 6] {
        [
            &self.event_id,
            &self.t,
            &self.x_lead,
            &self.v_lead,
            &self.x_follow,
            &self.v_follow,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    /// Events shorter than this (seconds) are rejected.
    pub min_duration: f64,
    /// When set, every event's inferred interval must match it.
    pub expected_dt: Option<f64>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            min_duration: 15.0,
            expected_dt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub event_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub events: Vec<CarFollowingEvent>,
    pub rejected: Vec<Rejection>,
}

/// Loads and validates events from a CSV file.
pub fn load_events(
    path: impl AsRef<Path>,
    mapping: &ColumnMapping,
    config: &ExtractionConfig,
) -> Result<Extraction, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_events(file, mapping, config)
}

/// Like [`load_events`] but from any reader.
pub fn read_events<R: Read>(
    reader: R,
    mapping: &ColumnMapping,
    config: &ExtractionConfig,
) -> Result<Extraction, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(mapping.columns()) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))?;
    }

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<TrajectorySample>> = HashMap::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let field = |c: usize| record.get(idx[c]).unwrap_or("");
        let num = |c: usize, scale: f64| -> Result<f64, DataError> {
            let raw = field(c);
            raw.parse::<f64>()
                .map(|v| v * scale)
                .map_err(|_| DataError::Parse {
                    row: row + 1,
                    column: mapping.columns()[c].to_string(),
                    value: raw.to_string(),
                })
        };
        let sample = TrajectorySample {
            time: num(1, mapping.time_scale)?,
            lead_position: num(2, mapping.position_scale)?,
            lead_speed: num(3, mapping.speed_scale)?,
            follow_position: num(4, mapping.position_scale)?,
            follow_speed: num(5, mapping.speed_scale)?,
        };
        let id = field(0).to_string();
        groups
            .entry(id.clone())
            .or_insert_with(|| {
                order.push(id);
                Vec::new()
            })
            .push(sample);
    }

    let mut out = Extraction::default();
    for id in order {
        let samples = groups.remove(&id).unwrap_or_default();
        if samples.len() < 2 {
            out.rejected.push(Rejection {
                event_id: id,
                reason: format!("only {} sample(s)", samples.len()),
            });
            continue;
        }
        let dt = infer_dt(&id, &samples)?;
        if let Some(expected) = config.expected_dt {
            if (dt - expected).abs() > DT_TOLERANCE {
                return Err(DataError::InvalidEvent {
                    event_id: id,
                    reason: format!("sampling interval {dt} s differs from expected {expected} s"),
                });
            }
        }
        let duration = (samples.len() - 1) as f64 * dt;
        if duration + DT_TOLERANCE < config.min_duration {
            out.rejected.push(Rejection {
                event_id: id,
                reason: format!(
                    "duration {duration:.3} s below minimum {} s",
                    config.min_duration
                ),
            });
            continue;
        }
        let t0 = samples[0].time;
        let rebased = samples
            .into_iter()
            .map(|s| TrajectorySample {
                time: s.time - t0,
                ..s
            })
            .collect();
        out.events.push(CarFollowingEvent::new(id, dt, rebased)?);
    }
    Ok(out)
}

/// Median of successive time deltas; every delta must agree with it.
fn infer_dt(id: &str, samples: &[TrajectorySample]) -> Result<f64, DataError> {
    let mut deltas: Vec<f64> = samples.windows(2).map(|w| w[1].time - w[0].time).collect();
    let mut sorted = deltas.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    // Differences of rounded timestamps carry ~1e-15 noise; snap to the tolerance grid.
    let median = (median / DT_TOLERANCE).round() * DT_TOLERANCE;
    if !(median.is_finite() && median > 0.0) {
        return Err(DataError::InvalidEvent {
            event_id: id.to_string(),
            reason: format!("cannot infer timestep (median delta {median})"),
        });
    }
    for (k, d) in deltas.drain(..).enumerate() {
        if (d - median).abs() > DT_TOLERANCE {
            return Err(DataError::InvalidEvent {
                event_id: id.to_string(),
                reason: format!(
                    "non-uniform timestep between samples {k} and {}: {d} s vs {median} s",
                    k + 1
                ),
            });
        }
    }
    Ok(median)
}

/// Writes events in the normalized layout `event_id,t,x_lead,v_lead,x_follow,v_follow`.
pub fn write_events<W: Write>(writer: W, events: &[CarFollowingEvent]) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["event_id", "t", "x_lead", "v_lead", "x_follow", "v_follow"])?;
    for ev in events {
        for s in ev.samples() {
            w.write_record([
                ev.id().to_string(),
                s.time.to_string(),
                s.lead_position.to_string(),
                s.lead_speed.to_string(),
                s.follow_position.to_string(),
                s.follow_speed.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|source| DataError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::fixtures::constant_event;
    use proptest::prelude::*;

    fn normalized_csv(rows: &[(&str, f64, f64, f64, f64, f64)]) -> String {
        let mut s = String::from("event_id,t,x_lead,v_lead,x_follow,v_follow\n");
        for r in rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.0, r.1, r.2, r.3, r.4, r.5
            ));
        }
        s
    }

    fn pair_rows(id: &str, seconds: f64, dt: f64) -> Vec<(&str, f64, f64, f64, f64, f64)> {
        let n = (seconds / dt).round() as usize + 1;
        (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                (id, t, 20.0 + 8.0 * t, 8.0, 8.0 * t, 8.0)
            })
            .collect()
    }

    #[test]
    fn twenty_second_pair_at_ten_hz() {
        let csv = normalized_csv(&pair_rows("p1", 20.0, 0.1));
        let out = read_events(
            csv.as_bytes(),
            &ColumnMapping::default(),
            &ExtractionConfig::default(),
        )
        .unwrap();
        assert_eq!(out.events.len(), 1);
        assert_eq!(out.events[0].len(), 201);
        assert!((out.events[0].dt() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn short_pair_is_rejected_with_reason() {
        let csv = normalized_csv(&pair_rows("p1", 10.0, 0.1));
        let out = read_events(
            csv.as_bytes(),
            &ColumnMapping::default(),
            &ExtractionConfig::default(),
        )
        .unwrap();
        assert!(out.events.is_empty());
        assert_eq!(out.rejected.len(), 1);
        assert!(out.rejected[0].reason.contains("below minimum"));
    }

    #[test]
    fn missing_column_is_schema_error() {
        let csv = "event_id,t,x_lead,v_lead,x_follow\n1,0,10,1,0\n";
        let err = read_events(
            csv.as_bytes(),
            &ColumnMapping::default(),
            &ExtractionConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::MissingColumn(ref c) if c == "v_follow"));
    }

    #[test]
    fn non_uniform_step_names_event() {
        let mut rows = pair_rows("bad", 20.0, 0.1);
        rows[50].1 += 0.03;
        let err = read_events(
            normalized_csv(&rows).as_bytes(),
            &ColumnMapping::default(),
            &ExtractionConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("bad"), "{err}");
    }

    #[test]
    fn negative_speed_is_data_error() {
        let mut rows = pair_rows("neg", 20.0, 0.1);
        rows[3].5 = -0.5;
        let err = read_events(
            normalized_csv(&rows).as_bytes(),
            &ColumnMapping::default(),
            &ExtractionConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, DataError::InvalidEvent { .. }));
    }

    #[test]
    fn raw_mapping_converts_feet_and_rebases_time() {
        let mut csv = String::from("pair,Global_Time,lx,lv,fx,fv\n");
        for k in 0..=160 {
            let t = 1000.0 + k as f64 * 0.1;
            csv.push_str(&format!("9,{t},{},{},{},{}\n", 100.0, 10.0, 50.0, 10.0));
        }
        let mapping = ColumnMapping {
            event_id: "pair".into(),
            t: "Global_Time".into(),
            x_lead: "lx".into(),
            v_lead: "lv".into(),
            x_follow: "fx".into(),
            v_follow: "fv".into(),
            position_scale: 0.3048,
            speed_scale: 0.3048,
            ..ColumnMapping::default()
        };
        let out = read_events(csv.as_bytes(), &mapping, &ExtractionConfig::default()).unwrap();
        let ev = &out.events[0];
        assert_eq!(ev.samples()[0].time, 0.0);
        assert!((ev.samples()[0].gap() - 50.0 * 0.3048).abs() < 1e-12);
        assert!((ev.samples()[0].follow_speed - 3.048).abs() < 1e-12);
    }

    #[test]
    fn expected_dt_mismatch_is_error() {
        let csv = normalized_csv(&pair_rows("p", 20.0, 0.2));
        let cfg = ExtractionConfig {
            expected_dt: Some(0.1),
            ..ExtractionConfig::default()
        };
        assert!(read_events(csv.as_bytes(), &ColumnMapping::default(), &cfg).is_err());
    }

    #[test]
    fn write_then_read_is_bit_identical() {
        let mut events = vec![
            constant_event("a", 8.0, 12.0, 160, 0.1),
            constant_event("b", 1.0 / 3.0, 7.25, 170, 0.1),
        ];
        // Perturb to non-representable decimals.
        let s: Vec<_> = events[1]
            .samples()
            .iter()
            .map(|s| TrajectorySample {
                follow_speed: s.follow_speed + 1e-7 * s.time.sin(),
                ..*s
            })
            .collect();
        events[1] = CarFollowingEvent::new("b", 0.1, s).unwrap();
        let mut buf = Vec::new();
        write_events(&mut buf, &events).unwrap();
        let back = read_events(
            buf.as_slice(),
            &ColumnMapping::default(),
            &ExtractionConfig::default(),
        )
        .unwrap();
        assert_eq!(back.events.len(), 2);
        for (a, b) in events.iter().zip(&back.events) {
            assert_eq!(a.id(), b.id());
            for (x, y) in a.samples().iter().zip(b.samples()) {
                assert_eq!(x.lead_position.to_bits(), y.lead_position.to_bits());
                assert_eq!(x.follow_speed.to_bits(), y.follow_speed.to_bits());
                assert_eq!(x.time.to_bits(), y.time.to_bits());
            }
        }
    }

    proptest! {
        #[test]
        fn loaded_events_always_satisfy_invariants(
            rows in proptest::collection::vec(
                (0u8..4, 0u16..400, -5.0f64..80.0, -1.0f64..20.0, -5.0f64..80.0, -1.0f64..20.0, any::<bool>()),
                0..400,
            )
        ) {
            let mut csv = String::from("event_id,t,x_lead,v_lead,x_follow,v_follow\n");
            for (id, k, xl, vl, xf, vf, jitter) in rows {
                let t = k as f64 * 0.1 + if jitter { 0.013 } else { 0.0 };
                csv.push_str(&format!("{id},{t},{xl},{vl},{xf},{vf}\n"));
            }
            let cfg = ExtractionConfig { min_duration: 0.5, expected_dt: None };
            if let Ok(out) = read_events(csv.as_bytes(), &ColumnMapping::default(), &cfg) {
                for ev in out.events {
                    prop_assert!(ev.len() >= 2);
                    prop_assert!(ev.duration() + 1e-9 >= 0.5);
                    prop_assert_eq!(ev.samples()[0].time, 0.0);
                    for (k, s) in ev.samples().iter().enumerate() {
                        prop_assert!(s.gap() > 0.0);
                        prop_assert!(s.lead_speed >= 0.0 && s.follow_speed >= 0.0);
                        prop_assert!((s.time - k as f64 * ev.dt()).abs() <= 1e-9 * (k as f64).max(1.0));
                    }
                }
            }
        }
    }
}
