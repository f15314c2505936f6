//! Post-processing of sampled series: envelopes of local maxima, collapse times,
//! revival peaks and photon-distribution differences.

use crate::error::{Error, Result};
use crate::fock::FockWindow;
use crate::series::TimeSeries;

/// Default minimum prominence of an envelope point.
pub const DEFAULT_PROMINENCE: f64 = 1e-3;

/// Successive local maxima of a scalar series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Envelope {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Sample indices of the maxima in the source series.
    pub indices: Vec<usize>,
    pub prominences: Vec<f64>,
}

impl Envelope {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Envelope points with `t0 <= t <= t1`.
    pub fn between(&self, t0: f64, t1: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.values)
            .filter(move |(t, _)| **t >= t0 && **t <= t1)
            .map(|(t, v)| (*t, *v))
    }
}

/// Indices of interior local maxima; a flat top counts once, at its middle sample.
fn peak_candidates(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i - 1] < values[i] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                peaks.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Height of a peak above the higher of the two lowest points reachable on each
/// side before the series climbs above the peak or ends.
fn prominence(values: &[f64], peak: usize) -> f64 {
    let top = values[peak];
    let mut left_min = top;
    for &v in values[..peak].iter().rev() {
        if v > top {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = top;
    for &v in &values[peak + 1..] {
        if v > top {
            break;
        }
        right_min = right_min.min(v);
    }
    top - left_min.max(right_min)
}

/// Local maxima whose prominence exceeds `min_prominence`. Endpoints are never maxima.
pub fn extract_envelope(times: &[f64], values: &[f64], min_prominence: f64) -> Result<Envelope> {
    if times.len() != values.len() {
        return Err(Error::Input(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if values.len() < 3 {
        return Err(Error::Input(format!(
            "an envelope needs at least 3 samples, got {}",
            values.len()
        )));
    }
    let mut env = Envelope::default();
    for i in peak_candidates(values) {
        let p = prominence(values, i);
        if p > min_prominence {
            env.times.push(times[i]);
            env.values.push(values[i]);
            env.indices.push(i);
            env.prominences.push(p);
        }
    }
    Ok(env)
}

pub fn envelope_of(series: &TimeSeries<f64>, min_prominence: f64) -> Result<Envelope> {
    extract_envelope(&series.times, &series.records, min_prominence)
}

/// Local minima with prominence above `min_prominence`; the envelope holds the minimum values.
pub fn extract_minima(times: &[f64], values: &[f64], min_prominence: f64) -> Result<Envelope> {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    let mut env = extract_envelope(times, &negated, min_prominence)?;
    env.values.iter_mut().for_each(|v| *v = -*v);
    Ok(env)
}

/// Revival peaks: prominent local maxima of the envelope itself.
pub fn revival_peaks(env: &Envelope, min_prominence: f64) -> Result<Envelope> {
    extract_envelope(&env.times, &env.values, min_prominence)
}

/// First time the envelope falls from at or above `threshold` to below it,
/// interpolated linearly between the two bracketing envelope points.
/// `None` means the envelope never collapsed through the threshold.
pub fn collapse_time(env: &Envelope, threshold: f64) -> Option<f64> {
    env.values.windows(2).enumerate().find_map(|(i, pair)| {
        let (a, b) = (pair[0], pair[1]);
        if a >= threshold && b < threshold {
            let (t0, t1) = (env.times[i], env.times[i + 1]);
            Some(t0 + (a - threshold) / (a - b) * (t1 - t0))
        } else {
            None
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    pub window: FockWindow,
    /// `p_n` for `n = n1 ..= n2`.
    pub probabilities: Vec<f64>,
}

impl PhotonDistribution {
    pub fn new(window: FockWindow, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != window.width() {
            return Err(Error::Input(format!(
                "window {window} has width {} but {} probabilities were given",
                window.width(),
                probabilities.len()
            )));
        }
        Ok(Self {
            window,
            probabilities,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDelta {
    pub window: FockWindow,
    pub reference: Vec<f64>,
    pub current: Vec<f64>,
    /// `current − reference`
    pub delta: Vec<f64>,
}

impl PhotonDelta {
    pub fn sum(&self) -> f64 {
        self.delta.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.delta.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// `(n, Δp_n)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.window.photon_numbers().zip(self.delta.iter().copied())
    }
}

pub fn photon_delta(
    reference: &PhotonDistribution,
    current: &PhotonDistribution,
) -> Result<PhotonDelta> {
    if reference.window != current.window {
        return Err(Error::Input(format!(
            "photon distributions on different windows {} and {}",
            reference.window, current.window
        )));
    }
    let delta = current
        .probabilities
        .iter()
        .zip(&reference.probabilities)
        .map(|(c, r)| c - r)
        .collect();
    Ok(PhotonDelta {
        window: reference.window,
        reference: reference.probabilities.clone(),
        current: current.probabilities.clone(),
        delta,
    })
}
