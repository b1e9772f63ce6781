use std::io::Write;

use serde::{Deserialize, Serialize};

/// Fixed-edge histogram with equal-width bins over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn with_range(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(bins > 0, "histogram needs at least one bin");
        assert!(
            lo.is_finite() && hi.is_finite() && hi > lo,
            "invalid histogram range [{lo}, {hi}]"
        );
        Self {
            lo,
            hi,
            counts: vec![0; bins],
        }
    }

    /// Range spanning the finite values; a degenerate range is widened by ±0.5.
    pub fn range_of<'a>(values: impl IntoIterator<Item = &'a f64>) -> Option<(f64, f64)> {
        let (lo, hi) = values
            .into_iter()
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if lo > hi {
            return None;
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
            Some((lo - 0.5, hi + 0.5))
        } else {
            Some((lo, hi))
        }
    }

    pub fn from_values(values: &[f64], bins: usize) -> Option<Self> {
        let (lo, hi) = Self::range_of(values)?;
        let mut h = Self::with_range(lo, hi, bins);
        h.extend(values.iter().copied());
        Some(h)
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = self.width();
        let right = if bin + 1 == self.bins() {
            self.hi
        } else {
            self.lo + (bin + 1) as f64 * w
        };
        (self.lo + bin as f64 * w, right)
    }

    /// Counts `x`; returns false when it falls outside the range (or is NaN).
    pub fn add(&mut self, x: f64) -> bool {
        if !(x >= self.lo && x <= self.hi) {
            return false;
        }
        let k = (((x - self.lo) / (self.hi - self.lo)) * self.bins() as f64).floor() as usize;
        let k = k.min(self.bins() - 1);
        self.counts[k] += 1;
        true
    }

    pub fn extend(&mut self, xs: impl IntoIterator<Item = f64>) {
        for x in xs {
            self.add(x);
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// CSV with header `bin_left,bin_right,count`.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bin_left", "bin_right", "count"])?;
        for (k, c) in self.counts.iter().enumerate() {
            let (l, r) = self.edges(k);
            w.write_record([l.to_string(), r.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
