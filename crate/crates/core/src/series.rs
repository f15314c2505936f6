use serde::{Deserialize, Serialize};

use crate::integrator::StepStats;

/// Ordered `(time, record)` samples produced by every solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<R> {
    pub times: Vec<f64>,
    pub records: Vec<R>,
    /// Integrator statistics; all zero for closed-form tiers.
    pub stats: StepStats,
}

impl<R> Default for TimeSeries<R> {
    fn default() -> Self {
        Self {
            times: Vec::new(),
            records: Vec::new(),
            stats: StepStats::default(),
        }
    }
}

impl<R> TimeSeries<R> {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            records: Vec::with_capacity(n),
            stats: StepStats::default(),
        }
    }

    pub fn push(&mut self, t: f64, record: R) {
        self.times.push(t);
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &R)> {
        self.times.iter().copied().zip(self.records.iter())
    }

    /// Projects every record onto a scalar.
    pub fn map<S>(&self, f: impl Fn(&R) -> S) -> TimeSeries<S> {
        TimeSeries {
            times: self.times.clone(),
            records: self.records.iter().map(f).collect(),
            stats: self.stats,
        }
    }
}

impl TimeSeries<f64> {
    pub fn values(&self) -> &[f64] {
        &self.records
    }

    /// Largest absolute pointwise difference to another series on the same grid.
    pub fn max_abs_diff(&self, other: &TimeSeries<f64>) -> f64 {
        assert_eq!(self.times, other.times, "series sampled on different grids");
        self.records
            .iter()
            .zip(&other.records)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
