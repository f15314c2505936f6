//! Semiclassical Rabi model with a Markovian qubit reservoir.
//!
//! The 2×2 density matrix is propagated in the frame rotating at ω, where the
//! dissipators are unchanged and the drive reads `(G/2)(1 + δ e^{2iωt})`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrator::{Integrator, OdeSystem, Tolerances};
use crate::params::{ModelParams, QubitAmplitudes, OMEGA};
use crate::series::TimeSeries;

/// Trace and positivity are checked against this slack at every sample.
const INTEGRITY_TOL: f64 = 1e-8;

/// Qubit density matrix over `(g, e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity {
    pub gg: f64,
    pub ee: f64,
    /// `ρ_eg = ⟨e|ρ|g⟩`
    pub eg: Complex64,
}

impl QubitDensity {
    pub fn pure(q: QubitAmplitudes) -> Self {
        Self {
            gg: q.c_g.norm_sqr(),
            ee: q.c_e.norm_sqr(),
            eg: q.c_e * q.c_g.conj(),
        }
    }

    fn from_flat(y: &[Complex64]) -> Self {
        Self {
            gg: y[0].re,
            ee: y[3].re,
            eg: y[2],
        }
    }

    fn to_flat(self) -> [Complex64; 4] {
        [
            Complex64::new(self.gg, 0.0),
            self.eg.conj(),
            self.eg,
            Complex64::new(self.ee, 0.0),
        ]
    }

    pub fn trace(&self) -> f64 {
        self.gg + self.ee
    }

    pub fn determinant(&self) -> f64 {
        self.gg * self.ee - self.eg.norm_sqr()
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        qubit_eigenvalues(self.trace(), self.determinant())
    }

    pub fn entropy(&self) -> f64 {
        let [hi, lo] = self.eigenvalues();
        von_neumann(&[hi, lo])
    }

    pub fn linear_entropy(&self) -> f64 {
        let purity = self.gg * self.gg + self.ee * self.ee + 2.0 * self.eg.norm_sqr();
        1.0 - purity
    }
}

/// Eigenvalues of a Hermitian 2×2 matrix from its trace and determinant, larger first.
pub fn qubit_eigenvalues(trace: f64, det: f64) -> [f64; 2] {
    let half = 0.5 * trace;
    let disc = (half * half - det).max(0.0).sqrt();
    [half + disc, half - disc]
}

/// `−Σ λ ln λ` with `0 ln 0 = 0`; tiny negative eigenvalues from round-off count as zero.
pub fn von_neumann(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitObservables {
    pub p_e: f64,
    pub s_q: f64,
    pub s_q_linear: f64,
}

struct DissipativeQubit {
    half_detuning: f64,
    half_g: f64,
    delta: f64,
    down: f64,
    up: f64,
    dephasing: f64,
}

impl DissipativeQubit {
    fn new(params: &ModelParams) -> Self {
        Self {
            half_detuning: 0.5 * params.detuning,
            half_g: 0.5 * params.rabi_frequency,
            delta: params.delta_factor(),
            down: params.gamma * (params.n_th + 1.0),
            up: params.gamma * params.n_th,
            dephasing: params.gamma_phi,
        }
    }
}

impl OdeSystem for DissipativeQubit {
    fn dimension(&self) -> usize {
        4
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        // ρ = [[gg, ge], [eg, ee]] stored row-major
        let coupling = self.half_g
            * (Complex64::new(1.0, 0.0) + Complex64::from_polar(self.delta, 2.0 * OMEGA * t));
        let h = [
            Complex64::new(self.half_detuning, 0.0),
            coupling.conj(),
            coupling,
            Complex64::new(-self.half_detuning, 0.0),
        ];
        let mut m = [Complex64::new(0.0, 0.0); 4];
        for i in 0..2 {
            for j in 0..2 {
                m[2 * i + j] = h[2 * i] * y[j] + h[2 * i + 1] * y[2 + j];
            }
        }
        let minus_i = Complex64::new(0.0, -1.0);
        for i in 0..2 {
            for j in 0..2 {
                dy[2 * i + j] = minus_i * (m[2 * i + j] - m[2 * j + i].conj());
            }
        }
        let (gg, ee) = (y[0].re, y[3].re);
        let flow = self.down * ee - self.up * gg;
        dy[0] += flow;
        dy[3] -= flow;
        let coherence_rate = 0.5 * (self.down + self.up) + 2.0 * self.dephasing;
        dy[1] -= coherence_rate * y[1];
        dy[2] -= coherence_rate * y[2];
    }
}

fn check_integrity(rho: &QubitDensity, t: f64) -> Result<()> {
    let trace_err = (rho.trace() - 1.0).abs();
    let [_, lo] = rho.eigenvalues();
    if trace_err > INTEGRITY_TOL || lo < -INTEGRITY_TOL {
        return Err(Error::StateIntegrity(format!(
            "qubit density matrix at t = {t}: trace error {trace_err:e}, smallest eigenvalue {lo:e}"
        )));
    }
    Ok(())
}

/// Density matrices of the dissipative semiclassical model at each requested time.
pub fn evolve_master_srm_states(
    initial: QubitDensity,
    params: &ModelParams,
    times: &[f64],
    tol: &Tolerances,
) -> Result<TimeSeries<QubitDensity>> {
    params.validate()?;
    check_integrity(&initial, 0.0)?;
    let system = DissipativeQubit::new(params);
    let mut out = TimeSeries::with_capacity(times.len());
    let stats = Integrator::new(*tol).integrate_observed(
        &system,
        0.0,
        &initial.to_flat(),
        times,
        |t, y| {
            let rho = QubitDensity::from_flat(y);
            check_integrity(&rho, t)?;
            out.push(t, rho);
            Ok(())
        },
    )?;
    out.stats = stats;
    Ok(out)
}

/// Excitation probability and qubit entropies of the dissipative semiclassical model.
pub fn evolve_master_srm(
    initial: QubitDensity,
    params: &ModelParams,
    times: &[f64],
    tol: &Tolerances,
) -> Result<TimeSeries<QubitObservables>> {
    let states = evolve_master_srm_states(initial, params, times, tol)?;
    Ok(states.map(|rho| QubitObservables {
        p_e: rho.ee.clamp(0.0, 1.0),
        s_q: rho.entropy(),
        s_q_linear: rho.linear_entropy(),
    }))
}
