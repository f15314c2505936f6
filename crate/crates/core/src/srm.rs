//! Lossless semiclassical Rabi model: RWA closed form, intermediate closed form,
//! semi-analytic reduced equations and exact reduced equations.
//!
//! The exact and semi-analytic tiers integrate the slowly varying amplitudes
//! `a±(t)` obtained from the eigenbasis amplitudes `A±(t)` of the rotating
//! Hamiltonian through `A± = exp(∓iΥ sin(2ωt)/2) a±`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrator::{Integrator, OdeSystem, Tolerances};
use crate::params::{ModelParams, QubitAmplitudes, OMEGA};
use crate::series::TimeSeries;
use crate::special_fn::j012;

/// Largest `Υ = G/2ω` for which the intermediate closed form is offered.
pub const INTERMEDIATE_MAX_UPSILON: f64 = 0.25;

/// Spectrum and eigenvectors of the time-independent rotating Hamiltonian
/// `H_r = −(Δ/2)σ_z + (G/2)(σ_+ + σ_−)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingEigensystem {
    pub rabi_frequency: f64,
    pub detuning: f64,
    /// Generalized Rabi frequency `R = √(G² + Δ²)`.
    pub r: f64,
    /// `(R + Δ)/2`
    pub r_plus: f64,
    /// `(R − Δ)/2`
    pub r_minus: f64,
    pub phi_plus: QubitAmplitudes,
    pub phi_minus: QubitAmplitudes,
    pub e_plus: f64,
    pub e_minus: f64,
}

pub fn eigensystem(params: &ModelParams) -> Result<RotatingEigensystem> {
    let g = params.rabi_frequency;
    let d = params.detuning;
    if g == 0.0 && d == 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    if !(g > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "the rotating eigensystem needs G > 0, got {g}"
        )));
    }
    let r = g.hypot(d);
    // the smaller of R ± Δ is formed from R+·R− = G²/4 to avoid cancellation
    let (r_plus, r_minus) = if d >= 0.0 {
        let rp = 0.5 * (r + d);
        (rp, g * g / (4.0 * rp))
    } else {
        let rm = 0.5 * (r - d);
        (g * g / (4.0 * rm), rm)
    };
    let c = |x: f64| Complex64::new(x, 0.0);
    let np = (r * r_plus).sqrt().recip();
    let nm = (r * r_minus).sqrt().recip();
    Ok(RotatingEigensystem {
        rabi_frequency: g,
        detuning: d,
        r,
        r_plus,
        r_minus,
        phi_plus: QubitAmplitudes {
            c_g: c(np * r_plus),
            c_e: c(np * 0.5 * g),
        },
        phi_minus: QubitAmplitudes {
            c_g: c(nm * r_minus),
            c_e: c(-nm * 0.5 * g),
        },
        e_plus: 0.5 * r,
        e_minus: -0.5 * r,
    })
}

/// Slowly varying amplitudes `a±` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedAmplitudes {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub t: f64,
}

impl ReducedAmplitudes {
    pub fn norm_sqr(&self) -> f64 {
        self.a_plus.norm_sqr() + self.a_minus.norm_sqr()
    }
}

/// `A±(0) = (R± c_g ± (G/2) c_e)/√(R R±)`; at `t = 0` the amplitudes `a±` coincide with `A±`.
pub fn initial_reduced_amplitudes(
    qubit: QubitAmplitudes,
    eig: &RotatingEigensystem,
) -> ReducedAmplitudes {
    let half_g = 0.5 * eig.rabi_frequency;
    let a_plus = (qubit.c_g * eig.r_plus + qubit.c_e * half_g) / (eig.r * eig.r_plus).sqrt();
    let a_minus = (qubit.c_g * eig.r_minus - qubit.c_e * half_g) / (eig.r * eig.r_minus).sqrt();
    ReducedAmplitudes {
        a_plus,
        a_minus,
        t: 0.0,
    }
}

/// Textbook resonant RWA excitation probability
/// `sin²(Gt/2) + |c_e|² cos(Gt) − Im(c_e c_g*) sin(Gt)`.
pub fn pe_rwa(qubit: QubitAmplitudes, g_rabi: f64, t: f64) -> f64 {
    let phase = g_rabi * t;
    let p = (0.5 * phase).sin().powi(2) + qubit.c_e.norm_sqr() * phase.cos()
        - (qubit.c_e * qubit.c_g.conj()).im * phase.sin();
    p.clamp(0.0, 1.0)
}

fn require_resonant_full(params: &ModelParams, tier: &str) -> Result<()> {
    params.validate()?;
    if params.detuning != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "the {tier} solution is resonant-only, got detuning {}",
            params.detuning
        )));
    }
    if !params.counter_rotating {
        return Err(Error::InvalidParameter(format!(
            "the {tier} solution approximates the counter-rotating problem; use the RWA tier instead"
        )));
    }
    if !(params.rabi_frequency > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "the {tier} solution needs G > 0, got {}",
            params.rabi_frequency
        )));
    }
    Ok(())
}

/// Resonant excitation probability from the reduced amplitudes:
/// `P_e = ½ |exp(−i[Υ sin 2ωt + Gt]) a+ − a−|²`.
fn resonant_pe(upsilon: f64, g_rabi: f64, t: f64, a_plus: Complex64, a_minus: Complex64) -> f64 {
    let phase = Complex64::from_polar(1.0, -(upsilon * (2.0 * OMEGA * t).sin() + g_rabi * t));
    (0.5 * (phase * a_plus - a_minus).norm_sqr()).clamp(0.0, 1.0)
}

/// Closed-form amplitudes of the intermediate solution.
#[derive(Debug, Clone, Copy)]
pub struct IntermediateSolution {
    g_rabi: f64,
    upsilon: f64,
    j1: f64,
    s: f64,
    b1: Complex64,
    b2: Complex64,
}

impl IntermediateSolution {
    pub fn new(qubit: QubitAmplitudes, params: &ModelParams) -> Result<Self> {
        require_resonant_full(params, "intermediate")?;
        let g_rabi = params.rabi_frequency;
        let upsilon = g_rabi / (2.0 * OMEGA);
        if upsilon > INTERMEDIATE_MAX_UPSILON {
            return Err(Error::InvalidParameter(format!(
                "intermediate solution valid for Υ = G/2ω <= {INTERMEDIATE_MAX_UPSILON}, got {upsilon}"
            )));
        }
        let [_, j1, _] = j012(upsilon)?;
        let s = (1.0 + j1 * j1).sqrt();
        let denom = 2.0 * std::f64::consts::SQRT_2 * s;
        let b1 = (qubit.c_g * (s - 1.0 + j1) + qubit.c_e * (s - 1.0 - j1)) / denom;
        let b2 = (qubit.c_g * (s + 1.0 - j1) + qubit.c_e * (s + 1.0 + j1)) / denom;
        Ok(Self {
            g_rabi,
            upsilon,
            j1,
            s,
            b1,
            b2,
        })
    }

    pub fn amplitudes(&self, t: f64) -> ReducedAmplitudes {
        let gt = self.g_rabi * t;
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let fwd = e(0.5 * gt * self.s);
        let bwd = e(-0.5 * gt * self.s);
        let a_plus = e(0.5 * gt) * (self.b1 * fwd + self.b2 * bwd);
        let a_minus = e(-0.5 * gt) / self.j1
            * (self.b1 * (1.0 + self.s) * fwd + self.b2 * (1.0 - self.s) * bwd);
        ReducedAmplitudes { a_plus, a_minus, t }
    }

    pub fn pe(&self, t: f64) -> f64 {
        let a = self.amplitudes(t);
        resonant_pe(self.upsilon, self.g_rabi, t, a.a_plus, a.a_minus)
    }

    pub fn j1(&self) -> f64 {
        self.j1
    }
}

/// Excitation probability of the intermediate closed-form solution at time `t`.
pub fn pe_intermediate(qubit: QubitAmplitudes, params: &ModelParams, t: f64) -> Result<f64> {
    Ok(IntermediateSolution::new(qubit, params)?.pe(t))
}

/// RWA closed form sampled on a grid.
pub fn series_rwa(
    qubit: QubitAmplitudes,
    params: &ModelParams,
    times: &[f64],
) -> Result<TimeSeries<f64>> {
    params.validate()?;
    if params.detuning != 0.0 {
        return Err(Error::InvalidParameter(
            "the RWA closed form is resonant-only".into(),
        ));
    }
    let mut out = TimeSeries::with_capacity(times.len());
    for &t in times {
        out.push(t, pe_rwa(qubit, params.rabi_frequency, t));
    }
    Ok(out)
}

/// Intermediate closed form sampled on a grid.
pub fn series_intermediate(
    qubit: QubitAmplitudes,
    params: &ModelParams,
    times: &[f64],
) -> Result<TimeSeries<f64>> {
    let sol = IntermediateSolution::new(qubit, params)?;
    let mut out = TimeSeries::with_capacity(times.len());
    for &t in times {
        out.push(t, sol.pe(t));
    }
    Ok(out)
}

/// `ȧ+ = −iQ a−`, `ȧ− = −iQ* a+` for a given drive `Q(t)`.
struct ReducedSystem<Q> {
    q: Q,
}

impl<Q: Fn(f64) -> Complex64> OdeSystem for ReducedSystem<Q> {
    fn dimension(&self) -> usize {
        2
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let q = (self.q)(t);
        let minus_i = Complex64::new(0.0, -1.0);
        dy[0] = minus_i * q * y[1];
        dy[1] = minus_i * q.conj() * y[0];
    }
}

fn integrate_reduced<Q: Fn(f64) -> Complex64>(
    q: Q,
    start: ReducedAmplitudes,
    times: &[f64],
    tol: &Tolerances,
) -> Result<TimeSeries<ReducedAmplitudes>> {
    let system = ReducedSystem { q };
    let mut out = TimeSeries::with_capacity(times.len());
    let stats = Integrator::new(*tol).integrate_observed(
        &system,
        0.0,
        &[start.a_plus, start.a_minus],
        times,
        |t, y| {
            out.push(
                t,
                ReducedAmplitudes {
                    a_plus: y[0],
                    a_minus: y[1],
                    t,
                },
            );
            Ok(())
        },
    )?;
    out.stats = stats;
    Ok(out)
}

/// Reduced amplitudes of the semi-analytic model, where the drive keeps only `J₀, J₁, J₂`:
/// `Q ≈ i(G/2)[(J₀ − J₂) sin 2ωt + iJ₁] e^{iGt}`.
pub fn semianalytic_amplitudes(
    qubit: QubitAmplitudes,
    params: &ModelParams,
    times: &[f64],
    tol: &Tolerances,
) -> Result<TimeSeries<ReducedAmplitudes>> {
    require_resonant_full(params, "semi-analytic")?;
    let g_rabi = params.rabi_frequency;
    let upsilon = g_rabi / (2.0 * OMEGA);
    let [j0, j1, j2] = j012(upsilon)?;
    let eig = eigensystem(params)?;
    let start = initial_reduced_amplitudes(qubit, &eig);
    let q = move |t: f64| {
        let envelope = Complex64::new((j0 - j2) * (2.0 * OMEGA * t).sin(), j1);
        Complex64::new(0.0, 0.5 * g_rabi) * envelope * Complex64::from_polar(1.0, g_rabi * t)
    };
    integrate_reduced(q, start, times, tol)
}

/// Excitation probability of the semi-analytic tier.
pub fn evolve_semianalytic(
    qubit: QubitAmplitudes,
    params: &ModelParams,
    times: &[f64],
    tol: &Tolerances,
) -> Result<TimeSeries<f64>> {
    let amps = semianalytic_amplitudes(qubit, params, times, tol)?;
    let g_rabi = params.rabi_frequency;
    let upsilon = g_rabi / (2.0 * OMEGA);
    Ok(amps.map(|a| resonant_pe(upsilon, g_rabi, a.t, a.a_plus, a.a_minus)))
}

/// Exact reduced amplitudes for arbitrary detuning, with
/// `Q = δ (G/2R) e^{i[δΥ sin 2ωt + Rt]} (R− e^{2iωt} − R+ e^{−2iωt})` and `Υ = G²/(2ωR)`.
pub fn exact_amplitudes(
    qubit: QubitAmplitudes,
    params: &ModelParams,
    times: &[f64],
    tol: &Tolerances,
) -> Result<TimeSeries<ReducedAmplitudes>> {
    params.validate()?;
    let eig = eigensystem(params)?;
    let start = initial_reduced_amplitudes(qubit, &eig);
    let delta = params.delta_factor();
    let upsilon = delta * exact_upsilon(&eig);
    let RotatingEigensystem {
        rabi_frequency: g_rabi,
        r,
        r_plus,
        r_minus,
        ..
    } = eig;
    let q = move |t: f64| {
        if delta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let w = 2.0 * OMEGA * t;
        let bracket = Complex64::from_polar(r_minus, w) - Complex64::from_polar(r_plus, -w);
        Complex64::from_polar(delta * g_rabi / (2.0 * r), upsilon * w.sin() + r * t) * bracket
    };
    integrate_reduced(q, start, times, tol)
}

fn exact_upsilon(eig: &RotatingEigensystem) -> f64 {
    eig.rabi_frequency * eig.rabi_frequency / (2.0 * OMEGA * eig.r)
}

/// `P_e` from reduced amplitudes through the eigenstate expansion, valid for any detuning.
pub fn exact_pe(eig: &RotatingEigensystem, upsilon: f64, amps: &ReducedAmplitudes) -> f64 {
    let t = amps.t;
    let half = 0.5 * upsilon * (2.0 * OMEGA * t).sin();
    let big_plus = Complex64::from_polar(1.0, -half) * amps.a_plus;
    let big_minus = Complex64::from_polar(1.0, half) * amps.a_minus;
    let half_g = 0.5 * eig.rabi_frequency;
    let amp_e = big_plus * Complex64::from_polar(half_g / (eig.r * eig.r_plus).sqrt(), -eig.r * t)
        - big_minus * (half_g / (eig.r * eig.r_minus).sqrt());
    amp_e.norm_sqr().clamp(0.0, 1.0)
}

/// Exact excitation probability of the lossless semiclassical model.
pub fn evolve_exact(
    qubit: QubitAmplitudes,
    params: &ModelParams,
    times: &[f64],
    tol: &Tolerances,
) -> Result<TimeSeries<f64>> {
    let amps = exact_amplitudes(qubit, params, times, tol)?;
    let eig = eigensystem(params)?;
    let upsilon = params.delta_factor() * exact_upsilon(&eig);
    Ok(amps.map(|a| exact_pe(&eig, upsilon, a)))
}
