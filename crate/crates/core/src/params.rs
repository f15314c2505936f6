//! Physical parameters shared by every solver.
//!
//! All frequencies and rates are expressed in units of the drive/cavity
//! frequency ω, which is therefore fixed to 1. Times are in units of 1/ω.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The cavity (or classical drive) frequency. Everything else is measured in it.
pub const OMEGA: f64 = 1.0;

/// Relative tolerance of the semiclassical correspondence `G = 2 g α`.
const CORRESPONDENCE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Detuning Δ = ω − Ω.
    #[serde(default)]
    pub detuning: f64,
    /// Semiclassical Rabi frequency G.
    #[serde(default)]
    pub rabi_frequency: f64,
    /// One-photon coupling g.
    #[serde(default)]
    pub coupling: f64,
    /// Real coherent amplitude α of the initial cavity field.
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "one_qubit")]
    pub n_qubits: usize,
    /// δ = 1 keeps the counter-rotating terms, δ = 0 is the rotating-wave limit.
    #[serde(default = "yes")]
    pub counter_rotating: bool,
    /// Qubit damping rate γ.
    #[serde(default)]
    pub gamma: f64,
    /// Qubit pure dephasing rate γ_φ.
    #[serde(default)]
    pub gamma_phi: f64,
    /// Cavity damping rate κ.
    #[serde(default)]
    pub kappa: f64,
    /// Thermal occupation of the qubit reservoir.
    #[serde(default)]
    pub n_th: f64,
    /// Thermal occupation of the cavity reservoir.
    #[serde(default)]
    pub n_c: f64,
}

fn one_qubit() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            detuning: 0.0,
            rabi_frequency: 0.0,
            coupling: 0.0,
            alpha: 0.0,
            n_qubits: 1,
            counter_rotating: true,
            gamma: 0.0,
            gamma_phi: 0.0,
            kappa: 0.0,
            n_th: 0.0,
            n_c: 0.0,
        }
    }
}

/// Rabi frequency G = π / T_π for a π-pulse of duration `omega_t_pi` (in 1/ω).
pub fn rabi_frequency_for_pi_pulse(omega_t_pi: f64) -> f64 {
    PI / omega_t_pi
}

impl ModelParams {
    /// Resonant semiclassical drive with Rabi frequency `g_rabi`.
    pub fn semiclassical(g_rabi: f64) -> Self {
        Self {
            rabi_frequency: g_rabi,
            ..Self::default()
        }
    }

    /// Resonant semiclassical drive parametrised by the π-pulse duration.
    pub fn semiclassical_pi_pulse(omega_t_pi: f64) -> Self {
        Self::semiclassical(rabi_frequency_for_pi_pulse(omega_t_pi))
    }

    /// Quantum model with coherent amplitude `alpha` and one-photon coupling `g`.
    /// The semiclassical Rabi frequency is set to `2 g α`.
    pub fn quantum(alpha: f64, g: f64) -> Self {
        Self {
            alpha,
            coupling: g,
            rabi_frequency: 2.0 * g * alpha,
            ..Self::default()
        }
    }

    /// Quantum model with `g α` chosen so that the semiclassical π-pulse lasts `omega_t_pi`.
    /// Requires `alpha > 0`.
    pub fn quantum_pi_pulse(alpha: f64, omega_t_pi: f64) -> Self {
        let g_rabi = rabi_frequency_for_pi_pulse(omega_t_pi);
        Self {
            alpha,
            coupling: g_rabi / (2.0 * alpha),
            rabi_frequency: g_rabi,
            ..Self::default()
        }
    }

    pub fn with_qubits(mut self, n: usize) -> Self {
        self.n_qubits = n;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_counter_rotating(mut self, on: bool) -> Self {
        self.counter_rotating = on;
        self
    }

    /// Qubit damping, dephasing and reservoir occupation.
    pub fn with_qubit_bath(mut self, gamma: f64, gamma_phi: f64, n_th: f64) -> Self {
        self.gamma = gamma;
        self.gamma_phi = gamma_phi;
        self.n_th = n_th;
        self
    }

    pub fn with_cavity_bath(mut self, kappa: f64, n_c: f64) -> Self {
        self.kappa = kappa;
        self.n_c = n_c;
        self
    }

    /// Qubit transition frequency Ω = ω − Δ.
    pub fn qubit_frequency(&self) -> f64 {
        OMEGA - self.detuning
    }

    /// The dichotomous parameter δ as a number.
    pub fn delta_factor(&self) -> f64 {
        if self.counter_rotating {
            1.0
        } else {
            0.0
        }
    }

    /// π-pulse duration π/G of the semiclassical drive.
    pub fn pi_pulse(&self) -> f64 {
        PI / self.rabi_frequency
    }

    pub fn has_dissipation(&self) -> bool {
        self.gamma > 0.0 || self.gamma_phi > 0.0 || self.kappa > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("detuning", self.detuning),
            ("rabi_frequency", self.rabi_frequency),
            ("coupling", self.coupling),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("gamma_phi", self.gamma_phi),
            ("kappa", self.kappa),
            ("n_th", self.n_th),
            ("n_c", self.n_c),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if self.alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("gamma_phi", self.gamma_phi),
            ("kappa", self.kappa),
            ("n_th", self.n_th),
            ("n_c", self.n_c),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        if !(1..=3).contains(&self.n_qubits) {
            return Err(Error::InvalidParameter(format!(
                "n_qubits must be 1, 2 or 3, got {}",
                self.n_qubits
            )));
        }
        if self.coupling != 0.0 && self.alpha > 0.0 {
            let expected = 2.0 * self.coupling * self.alpha;
            let scale = expected.abs().max(self.rabi_frequency.abs());
            if (self.rabi_frequency - expected).abs() > CORRESPONDENCE_RTOL * scale {
                return Err(Error::InvalidParameter(format!(
                    "rabi_frequency {} inconsistent with 2*coupling*alpha = {}",
                    self.rabi_frequency, expected
                )));
            }
        }
        Ok(())
    }
}

/// Pure single-qubit state `c_g |g⟩ + c_e |e⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitAmplitudes {
    pub c_g: Complex64,
    pub c_e: Complex64,
}

impl QubitAmplitudes {
    pub fn new(c_g: Complex64, c_e: Complex64) -> Result<Self> {
        let norm = c_g.norm_sqr() + c_e.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "qubit amplitudes must be normalized, |c_g|^2 + |c_e|^2 = {norm}"
            )));
        }
        Ok(Self { c_g, c_e })
    }

    /// Normalizes an arbitrary non-zero pair of amplitudes.
    pub fn normalized(c_g: Complex64, c_e: Complex64) -> Result<Self> {
        let norm = (c_g.norm_sqr() + c_e.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter(
                "zero or non-finite qubit state".into(),
            ));
        }
        Ok(Self {
            c_g: c_g / norm,
            c_e: c_e / norm,
        })
    }

    pub fn ground() -> Self {
        Self {
            c_g: Complex64::new(1.0, 0.0),
            c_e: Complex64::new(0.0, 0.0),
        }
    }

    pub fn excited() -> Self {
        Self {
            c_g: Complex64::new(0.0, 0.0),
            c_e: Complex64::new(1.0, 0.0),
        }
    }

    pub fn excited_population(&self) -> f64 {
        self.c_e.norm_sqr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantum_pi_pulse_satisfies_correspondence() {
        let p = ModelParams::quantum_pi_pulse(5000f64.sqrt(), 50.0);
        p.validate().unwrap();
        assert!((2.0 * p.coupling * p.alpha - PI / 50.0).abs() < 1e-15);
        assert!((p.coupling * p.alpha - 1e-2 * PI).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_correspondence_rejected() {
        let mut p = ModelParams::quantum(10.0, 0.01);
        p.rabi_frequency *= 1.0 + 1e-9;
        assert!(p.validate().is_err());
    }

    #[test]
    fn invalid_ranges_rejected() {
        let base = ModelParams::semiclassical(0.1);
        for p in [
            ModelParams {
                alpha: -1.0,
                ..base
            },
            ModelParams {
                gamma: -1e-3,
                ..base
            },
            ModelParams {
                n_qubits: 0,
                ..base
            },
            ModelParams {
                n_qubits: 4,
                ..base
            },
            ModelParams {
                n_c: f64::NAN,
                ..base
            },
        ] {
            assert!(matches!(p.validate(), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn qubit_amplitudes_require_normalization() {
        let half = Complex64::new(0.5, 0.0);
        assert!(QubitAmplitudes::new(half, half).is_err());
        let q = QubitAmplitudes::normalized(half, half).unwrap();
        assert!((q.excited_population() - 0.5).abs() < 1e-15);
    }
}
