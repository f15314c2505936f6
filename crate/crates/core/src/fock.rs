//! Fock-space truncation around a coherent state and the joint qubit–field state layout.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Amplitude cutoff used for every quantum run unless stated otherwise.
pub const DEFAULT_CUTOFF: f64 = 1e-10;

/// Number of Fock indices on each window edge watched for leakage.
pub const EDGE_WIDTH: usize = 5;

/// Contiguous range of retained Fock indices `[n1, n2]`, both inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockWindow {
    pub n1: usize,
    pub n2: usize,
}

impl FockWindow {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 > n2 {
            return Err(Error::InvalidParameter(format!(
                "Fock window requires n1 <= n2, got [{n1}, {n2}]"
            )));
        }
        Ok(Self { n1, n2 })
    }

    /// Window for `alpha` at the default amplitude cutoff.
    pub fn for_alpha(alpha: f64) -> Result<Self> {
        build_window(alpha, DEFAULT_CUTOFF)
    }

    pub fn width(&self) -> usize {
        self.n2 - self.n1 + 1
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.n1..=self.n2).contains(&n)
    }

    pub fn photon_numbers(&self) -> std::ops::RangeInclusive<usize> {
        self.n1..=self.n2
    }

    /// The same window grown by `extra` indices on each side (clamped at zero).
    pub fn widened(&self, extra: usize) -> Self {
        Self {
            n1: self.n1.saturating_sub(extra),
            n2: self.n2 + extra,
        }
    }
}

impl fmt::Display for FockWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.n1, self.n2)
    }
}

/// `ln n!`, exact summation for small `n` and the Stirling series above.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 24 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series =
        inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + series
}

/// `ln |⟨n|α⟩|` for real `alpha > 0`.
fn ln_coherent_amplitude(alpha: f64, n: usize) -> f64 {
    -0.5 * alpha * alpha + n as f64 * alpha.ln() - 0.5 * ln_factorial(n)
}

/// Smallest contiguous window around `round(α²)` whose two outside neighbours
/// both have coherent amplitude below `cutoff`.
pub fn build_window(alpha: f64, cutoff: f64) -> Result<FockWindow> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoff must lie in (0, 1), got {cutoff}"
        )));
    }
    if alpha == 0.0 {
        return Ok(FockWindow { n1: 0, n2: 0 });
    }
    let ln_cut = cutoff.ln();
    let center = (alpha * alpha).round() as usize;
    let mut n1 = center;
    while n1 > 0 && ln_coherent_amplitude(alpha, n1 - 1) >= ln_cut {
        n1 -= 1;
    }
    let mut n2 = center;
    while ln_coherent_amplitude(alpha, n2 + 1) >= ln_cut {
        n2 += 1;
    }
    Ok(FockWindow { n1, n2 })
}

/// Coherent-state amplitudes restricted to a window and renormalized there.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentRestriction {
    pub window: FockWindow,
    /// `⟨n|α⟩` for `n` in the window; real and positive because α is real.
    pub amplitudes: Vec<f64>,
    /// Poissonian probability mass outside the window before renormalization.
    pub discarded_mass: f64,
}

impl CoherentRestriction {
    pub fn amplitude(&self, n: usize) -> f64 {
        if self.window.contains(n) {
            self.amplitudes[n - self.window.n1]
        } else {
            0.0
        }
    }
}

/// Poisson probability mass of `|α⟩` outside `window`.
fn tail_mass(alpha: f64, window: FockWindow) -> f64 {
    let p = |n: usize| (2.0 * ln_coherent_amplitude(alpha, n)).exp();
    let lower: f64 = (0..window.n1).map(p).sum();
    let mut upper = 0.0;
    let mut n = window.n2 + 1;
    loop {
        let term = p(n);
        upper += term;
        // past the mode the terms decrease monotonically
        if n as f64 > alpha * alpha && (term == 0.0 || term < 1e-18 * upper) {
            break;
        }
        n += 1;
    }
    lower + upper
}

/// `e^{−α²/2} αⁿ/√(n!)` over the window, evaluated in log space and renormalized.
pub fn coherent_amplitudes(alpha: f64, window: FockWindow) -> Result<CoherentRestriction> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    let mut amplitudes: Vec<f64> = if alpha == 0.0 {
        window
            .photon_numbers()
            .map(|n| if n == 0 { 1.0 } else { 0.0 })
            .collect()
    } else {
        window
            .photon_numbers()
            .map(|n| ln_coherent_amplitude(alpha, n).exp())
            .collect()
    };
    let kept: f64 = amplitudes.iter().map(|a| a * a).sum();
    if !(kept > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window {window} holds no coherent-state weight for alpha = {alpha}"
        )));
    }
    let discarded_mass = if alpha == 0.0 {
        if window.n1 == 0 {
            0.0
        } else {
            1.0
        }
    } else {
        tail_mass(alpha, window)
    };
    let scale = kept.sqrt().recip();
    amplitudes.iter_mut().for_each(|a| *a *= scale);
    Ok(CoherentRestriction {
        window,
        amplitudes,
        discarded_mass,
    })
}

/// Pure joint state of the qubit ladder and the truncated cavity field, in the rotating frame.
///
/// Amplitudes are stored level-major: `index = level * width + (n − n1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub window: FockWindow,
    /// 2 for one qubit, N + 1 symmetric levels for N identical qubits.
    pub n_levels: usize,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl JointState {
    pub fn zeros(window: FockWindow, n_levels: usize) -> Self {
        Self {
            window,
            n_levels,
            amplitudes: vec![Complex64::new(0.0, 0.0); n_levels * window.width()],
            time: 0.0,
        }
    }

    pub fn width(&self) -> usize {
        self.window.width()
    }

    pub fn index(&self, level: usize, n: usize) -> usize {
        debug_assert!(level < self.n_levels && self.window.contains(n));
        level * self.width() + (n - self.window.n1)
    }

    pub fn amplitude(&self, level: usize, n: usize) -> Complex64 {
        self.amplitudes[self.index(level, n)]
    }

    pub fn set(&mut self, level: usize, n: usize, value: Complex64) {
        let i = self.index(level, n);
        self.amplitudes[i] = value;
    }

    /// Amplitudes of one qubit level across the Fock window.
    pub fn level(&self, level: usize) -> &[Complex64] {
        let w = self.width();
        &self.amplitudes[level * w..(level + 1) * w]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Population on the [`EDGE_WIDTH`] lowest and highest Fock indices of the window.
    pub fn boundary_population(&self) -> f64 {
        boundary_population(self.window, self.n_levels, |i| {
            self.amplitudes[i].norm_sqr()
        })
    }
}

/// Sum of `population(index)` over the edge Fock indices of a level-major layout.
pub(crate) fn boundary_population(
    window: FockWindow,
    n_levels: usize,
    population: impl Fn(usize) -> f64,
) -> f64 {
    let w = window.width();
    // a window of width 1 at n = 0 is the vacuum: nothing can leak below it
    if window.n1 == 0 && w == 1 {
        return 0.0;
    }
    let edge = EDGE_WIDTH.min(w);
    let mut offsets: Vec<usize> = (0..edge).collect();
    offsets.extend((w - edge..w).filter(|m| *m >= edge));
    if window.n1 == 0 {
        // nothing leaks below the vacuum
        offsets.retain(|m| *m >= edge);
    }
    let mut total = 0.0;
    for level in 0..n_levels {
        for &m in &offsets {
            total += population(level * w + m);
        }
    }
    total
}

/// All qubits in the collective ground level, field in the windowed coherent state.
pub fn initial_joint_state(params: &ModelParams, window: FockWindow) -> Result<JointState> {
    params.validate()?;
    let coherent = coherent_amplitudes(params.alpha, window)?;
    let mut state = JointState::zeros(window, params.n_qubits + 1);
    for (slot, a) in state.amplitudes.iter_mut().zip(&coherent.amplitudes) {
        *slot = Complex64::new(*a, 0.0);
    }
    Ok(state)
}
