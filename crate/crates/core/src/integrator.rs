//! Adaptive embedded Runge–Kutta propagation of complex first-order systems.
//!
//! The scheme is Verner's efficient 6(5) pair (9 stages, first-same-as-last).
//! Steps land exactly on every requested sample time; there is no interpolant.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Butcher tableau of Verner's RKV65 "efficient" pair.
pub(crate) mod tableau {
    pub const STAGES: usize = 9;

    pub const C: [f64; STAGES] = [
        0.0,
        0.6e-1,
        9.593_333_333_333_333e-2,
        0.1439,
        0.4973,
        0.9725,
        0.9995,
        1.0,
        1.0,
    ];

    pub const A: [[f64; STAGES]; STAGES] = [
        [0.0; STAGES],
        [0.6e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [
            1.923_996_296_296_296_2e-2,
            7.669_337_037_037_037e-2,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [0.35975e-1, 0.0, 0.107925, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [
            1.318_683_415_233_148_4,
            0.0,
            -5.042_058_063_628_562,
            4.220_674_648_395_414,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            -41.872_591_664_327_516,
            0.0,
            159.432_562_163_137_5,
            -122.119_213_565_010_03,
            5.531_743_066_200_054,
            0.0,
            0.0,
            0.0,
            0.0,
        ],
        [
            -54.430_156_935_316_504,
            0.0,
            207.067_251_365_018_48,
            -158.610_813_784_59,
            6.991_816_585_950_242,
            -1.859_723_106_220_323_4e-2,
            0.0,
            0.0,
            0.0,
        ],
        [
            -54.663_741_787_281_98,
            0.0,
            207.952_806_255_389_36,
            -159.288_957_474_499_5,
            7.018_743_740_796_944,
            -1.833_878_590_504_572_2e-2,
            -5.119_484_997_882_099e-4,
            0.0,
            0.0,
        ],
        [
            3.438_957_868_357_036e-2,
            0.0,
            0.0,
            0.258_262_455_563_350_3,
            0.420_937_118_967_353_7,
            4.405_396_469_669_31,
            -176.483_119_024_298_65,
            172.364_133_401_415_07,
            0.0,
        ],
    ];

    /// Sixth-order weights (propagated solution).
    pub const B_HIGH: [f64; STAGES] = [
        3.438_957_868_357_036e-2,
        0.0,
        0.0,
        0.258_262_455_563_350_3,
        0.420_937_118_967_353_7,
        4.405_396_469_669_31,
        -176.483_119_024_298_65,
        172.364_133_401_415_07,
        0.0,
    ];

    /// Embedded fifth-order weights (error estimate only).
    pub const B_LOW: [f64; STAGES] = [
        4.909_967_648_382_49e-2,
        0.0,
        0.0,
        0.225_111_222_951_652_42,
        0.469_468_225_302_956_2,
        0.806_579_224_998_886_8,
        0.0,
        -0.607_119_489_177_796,
        5.686_113_944_047_569_6e-2,
    ];

    /// Order of the embedded (lower) solution, which sets the controller exponent.
    pub const ERROR_ORDER: i32 = 5;
}

/// A complex first-order system `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn dimension(&self) -> usize;

    /// Writes `f(t, y)` into `dy`. Must be deterministic in `(t, y)`.
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]);

    /// Small projection applied after every accepted step (for example restoring a symmetry).
    fn after_step(&self, _t: f64, _y: &mut [Complex64]) {}
}

/// Wraps a closure as an [`OdeSystem`].
pub struct FnSystem<F> {
    dimension: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        (self.f)(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        let tol = Self { rtol, atol };
        tol.validate()?;
        Ok(tol)
    }

    /// The looser setting used for tolerance-independence checks.
    pub fn loose() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) || !self.rtol.is_finite() || !self.atol.is_finite()
        {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive and finite, got rtol={} atol={}",
                self.rtol, self.atol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Largest normalized error estimate among accepted steps (≤ 1).
    pub max_error_estimate: f64,
}

impl StepStats {
    pub fn merge(&mut self, other: &StepStats) {
        self.accepted_steps += other.accepted_steps;
        self.rejected_steps += other.rejected_steps;
        self.rhs_evaluations += other.rhs_evaluations;
        self.max_error_estimate = self.max_error_estimate.max(other.max_error_estimate);
    }
}

impl fmt::Display for StepStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "accepted={} rejected={} rhs_evaluations={} max_error_estimate={:.3e}",
            self.accepted_steps, self.rejected_steps, self.rhs_evaluations, self.max_error_estimate
        )
    }
}

/// Step-size controller settings and limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub tolerances: Tolerances,
    pub max_steps: usize,
    /// Upper bound on the step size, if any.
    pub max_step: Option<f64>,
    safety: f64,
    fac_min: f64,
    fac_max: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(Tolerances::default())
    }
}

/// `out = base + Σ_j coefs[j] k[j]` with real coefficients, in cache-sized chunks so
/// that every input vector is streamed once.
fn combine(base: Option<&[Complex64]>, coefs: &[f64], k: &[Vec<Complex64>], out: &mut [Complex64]) {
    const CHUNK: usize = 256;
    let terms: Vec<(f64, &[Complex64])> = coefs
        .iter()
        .zip(k)
        .filter(|(c, _)| **c != 0.0)
        .map(|(c, kj)| (*c, kj.as_slice()))
        .collect();
    let dim = out.len();
    let mut start = 0;
    while start < dim {
        let end = (start + CHUNK).min(dim);
        let dst = &mut out[start..end];
        match base {
            Some(b) => dst.copy_from_slice(&b[start..end]),
            None => dst.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0)),
        }
        for &(c, kj) in &terms {
            for (o, x) in dst.iter_mut().zip(&kj[start..end]) {
                o.re += c * x.re;
                o.im += c * x.im;
            }
        }
        start = end;
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl Integrator {
    pub fn new(tolerances: Tolerances) -> Self {
        Self {
            tolerances,
            max_steps: 50_000_000,
            max_step: None,
            safety: 0.9,
            fac_min: 0.2,
            fac_max: 5.0,
        }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    fn scale(&self, y_norm: f64) -> f64 {
        self.tolerances.atol + self.tolerances.rtol * y_norm
    }

    fn initial_step<S: OdeSystem>(
        &self,
        system: &S,
        t0: f64,
        y0: &[Complex64],
        f0: &[Complex64],
        span: f64,
        stats: &mut StepStats,
    ) -> f64 {
        let sc = self.scale(norm2(y0));
        let d0 = norm2(y0) / sc;
        let d1 = norm2(f0) / sc;
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span);
        let y1: Vec<Complex64> = y0.iter().zip(f0).map(|(y, f)| y + f * h0).collect();
        let mut f1 = vec![Complex64::new(0.0, 0.0); y0.len()];
        system.rhs(t0 + h0, &y1, &mut f1);
        stats.rhs_evaluations += 1;
        let diff: f64 = f1
            .iter()
            .zip(f0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let d2 = diff / sc / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(1.0 / f64::from(tableau::ERROR_ORDER + 1))
        };
        let mut h = (100.0 * h0).min(h1).min(span);
        if let Some(hm) = self.max_step {
            h = h.min(hm);
        }
        h
    }

    /// Propagates `y0` from `t0` through every sample time, calling `observe(t, y)` at each.
    ///
    /// Sample times must be finite, sorted, and not before `t0`. The observer may abort the run
    /// by returning an error.
    pub fn integrate_observed<S, F>(
        &self,
        system: &S,
        t0: f64,
        y0: &[Complex64],
        sample_times: &[f64],
        mut observe: F,
    ) -> Result<StepStats>
    where
        S: OdeSystem,
        F: FnMut(f64, &[Complex64]) -> Result<()>,
    {
        use tableau::*;

        self.tolerances.validate()?;
        let dim = system.dimension();
        if y0.len() != dim {
            return Err(Error::Input(format!(
                "initial state has length {} but the system dimension is {dim}",
                y0.len()
            )));
        }
        validate_samples(t0, sample_times)?;
        let mut stats = StepStats::default();
        let Some(&t_end) = sample_times.last() else {
            return Ok(stats);
        };
        let span = t_end - t0;
        let h_min = 1e-12 * span.max(f64::MIN_POSITIVE);

        let zero = Complex64::new(0.0, 0.0);
        let mut y = y0.to_vec();
        let mut k: Vec<Vec<Complex64>> = (0..STAGES).map(|_| vec![zero; dim]).collect();
        let mut stage = vec![zero; dim];
        let mut y_new = vec![zero; dim];
        let mut t = t0;

        let mut samples = sample_times.iter().copied().peekable();
        while let Some(&ts) = samples.peek() {
            if ts > t0 {
                break;
            }
            observe(ts, &y)?;
            samples.next();
        }
        if samples.peek().is_none() {
            return Ok(stats);
        }

        system.rhs(t, &y, &mut k[0]);
        stats.rhs_evaluations += 1;
        let mut h = self.initial_step(system, t, &y, &k[0], span, &mut stats);
        let mut last_rejected = false;

        while let Some(&target) = samples.peek() {
            if stats.accepted_steps + stats.rejected_steps >= self.max_steps {
                return Err(Error::TooManySteps {
                    t,
                    limit: self.max_steps,
                    stats,
                });
            }
            if let Some(hm) = self.max_step {
                h = h.min(hm);
            }
            let h_proposed = h;
            let landing = t + h * 1.001 >= target;
            if landing {
                h = target - t;
            }
            if h < h_min {
                return Err(Error::StepSizeUnderflow { t, h, stats });
            }

            for s in 1..STAGES {
                let coefs: Vec<f64> = A[s][..s].iter().map(|a| h * a).collect();
                combine(Some(&y), &coefs, &k, &mut stage);
                if s == STAGES - 1 {
                    y_new.copy_from_slice(&stage);
                }
                system.rhs(t + C[s] * h, &stage, &mut k[s]);
            }
            stats.rhs_evaluations += STAGES - 1;

            // the stage buffer is free again and holds the error vector
            let coefs: Vec<f64> = (0..STAGES).map(|j| h * (B_HIGH[j] - B_LOW[j])).collect();
            combine(None, &coefs, &k, &mut stage);
            let err_sq: f64 = stage.iter().map(|e| e.norm_sqr()).sum();
            let sc = self.scale(norm2(&y).max(norm2(&y_new)));
            let err = err_sq.sqrt() / sc;

            if !err.is_finite() {
                return Err(Error::NonFinite { t, stats });
            }

            let exponent = -1.0 / f64::from(ERROR_ORDER + 1);
            if err <= 1.0 {
                stats.accepted_steps += 1;
                stats.max_error_estimate = stats.max_error_estimate.max(err);
                t = if landing { target } else { t + h };
                std::mem::swap(&mut y, &mut y_new);
                system.after_step(t, &mut y);
                // first same as last
                k.swap(0, STAGES - 1);

                let mut fac = if err == 0.0 {
                    self.fac_max
                } else {
                    (self.safety * err.powf(exponent)).clamp(self.fac_min, self.fac_max)
                };
                if last_rejected {
                    fac = fac.min(1.0);
                }
                last_rejected = false;
                h *= fac;
                if landing {
                    h = h.max(h_proposed);
                }

                while let Some(&ts) = samples.peek() {
                    if ts > t {
                        break;
                    }
                    observe(ts, &y)?;
                    samples.next();
                }
            } else {
                stats.rejected_steps += 1;
                last_rejected = true;
                let fac = (self.safety * err.powf(exponent)).clamp(self.fac_min, 1.0);
                h *= fac;
            }
        }
        Ok(stats)
    }

    /// Propagates `y0` and returns the state at every sample time.
    pub fn integrate<S: OdeSystem>(
        &self,
        system: &S,
        t0: f64,
        y0: &[Complex64],
        sample_times: &[f64],
    ) -> Result<(Vec<Vec<Complex64>>, StepStats)> {
        let mut out = Vec::with_capacity(sample_times.len());
        let stats = self.integrate_observed(system, t0, y0, sample_times, |_, y| {
            out.push(y.to_vec());
            Ok(())
        })?;
        Ok((out, stats))
    }
}

fn validate_samples(t0: f64, times: &[f64]) -> Result<()> {
    let mut prev = t0;
    for &t in times {
        if !t.is_finite() {
            return Err(Error::Input(format!("sample time {t} is not finite")));
        }
        if t < prev {
            return Err(Error::Input(format!(
                "sample times must be sorted and >= t0 = {t0}; got {t} after {prev}"
            )));
        }
        prev = t;
    }
    Ok(())
}

/// Uniform grid `t0, t0 + dt, …` up to and including `t1` (the last point is `t1` exactly).
pub fn uniform_times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![t1],
        _ => {
            let dt = (t1 - t0) / (count - 1) as f64;
            let mut v: Vec<f64> = (0..count).map(|i| t0 + dt * i as f64).collect();
            v[count - 1] = t1;
            v
        }
    }
}
