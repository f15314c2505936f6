//! Lindblad master equation of the single-qubit quantum Rabi model.
//!
//! The density matrix is dense over the truncated joint basis and propagated in
//! the same rotating frame as the pure-state engine, where every dissipator keeps
//! its form. Field operators are truncated to the window consistently, so that
//! `L†L` is the product of the truncated `L†` and `L` and the trace is conserved.

use std::cell::RefCell;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{boundary_population, initial_joint_state, FockWindow};
use crate::integrator::{Integrator, OdeSystem};
use crate::params::ModelParams;
use crate::qrm::{
    linear_entropy, qubit_entropies, suggest_wider, FieldReference, QrmHamiltonian, QrmObservables,
    QrmOptions, QrmRun,
};
use crate::series::TimeSeries;

/// Largest `α²` accepted by the dense engine.
pub const MAX_ALPHA_SQUARED: f64 = 200.0;

const TRACE_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-9;
const POSITIVITY_TOL: f64 = 1e-7;

/// Samples between two eigenvalue checks of the density matrix.
const POSITIVITY_STRIDE: usize = 64;

/// Dense density matrix over `(level, n)` with the same ordering as the pure joint state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    pub window: FockWindow,
    pub n_levels: usize,
    /// Row-major `d × d` with `d = n_levels · width`.
    pub rho: Vec<Complex64>,
    pub t: f64,
}

impl DensityState {
    pub fn dimension(&self) -> usize {
        self.n_levels * self.window.width()
    }

    pub fn trace(&self) -> f64 {
        let d = self.dimension();
        (0..d).map(|i| self.rho[i * d + i].re).sum()
    }

    /// Largest `|ρ − ρ†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dimension();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.rho[r * d + c] - self.rho[c * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dimension();
        let m = DMatrix::from_row_slice(d, d, &self.rho);
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    fn population(&self, i: usize) -> f64 {
        self.rho[i * self.dimension() + i].re
    }

    pub fn boundary_population(&self) -> f64 {
        boundary_population(self.window, self.n_levels, |i| self.population(i))
    }
}

struct Rates {
    /// `γ(n_th + 1)`, `γ n_th`, `γ_φ`, `κ(n_c + 1)`, `κ n_c`
    down: f64,
    up: f64,
    dephasing: f64,
    loss: f64,
    gain: f64,
}

/// Length of the packed upper triangle of a `d × d` matrix.
fn packed_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Start of row `r` in the packed upper triangle; the row holds columns `r..d`.
fn row_offset(d: usize, r: usize) -> usize {
    r * d - r * r.saturating_sub(1) / 2
}

fn pack(full: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut packed = Vec::with_capacity(packed_len(d));
    for r in 0..d {
        packed.extend_from_slice(&full[r * d + r..(r + 1) * d]);
    }
    packed
}

fn unpack(packed: &[Complex64], d: usize, full: &mut [Complex64]) {
    const TILE: usize = 32;
    for bi in (0..d).step_by(TILE) {
        for bj in (bi..d).step_by(TILE) {
            for r in bi..(bi + TILE).min(d) {
                let row = &packed[row_offset(d, r)..];
                for c in r.max(bj)..(bj + TILE).min(d) {
                    let v = row[c - r];
                    full[r * d + c] = v;
                    full[c * d + r] = v.conj();
                }
            }
        }
    }
}

/// `coef[i] = H[i, i + offset]`
struct Band {
    offset: isize,
    coef: Vec<Complex64>,
}

struct Scratch {
    full: Vec<Complex64>,
    acc: Vec<Complex64>,
}

/// Lindblad generator acting on the packed upper triangle of ρ.
struct MasterSystem {
    h: QrmHamiltonian,
    rates: Rates,
    /// `½ Σ_L rate_L (L†L)` on the diagonal of the joint basis.
    half_decay: Vec<f64>,
    /// `√n` for `n = n1 ..= n2 + 1`.
    sqrt_n: Vec<f64>,
    scratch: RefCell<Scratch>,
}

impl MasterSystem {
    fn new(params: &ModelParams, window: FockWindow) -> Self {
        let h = QrmHamiltonian::new(params, window);
        let rates = Rates {
            down: params.gamma * (params.n_th + 1.0),
            up: params.gamma * params.n_th,
            dephasing: params.gamma_phi,
            loss: params.kappa * (params.n_c + 1.0),
            gain: params.kappa * params.n_c,
        };
        let w = window.width();
        let mut half_decay = Vec::with_capacity(2 * w);
        for k in 0..2 {
            let qubit = if k == 1 { rates.down } else { rates.up };
            for m in 0..w {
                let n = (window.n1 + m) as f64;
                let a_dag_a = if m > 0 { n } else { 0.0 };
                let a_a_dag = if m + 1 < w { n + 1.0 } else { 0.0 };
                half_decay.push(0.5 * (qubit + rates.loss * a_dag_a + rates.gain * a_a_dag));
            }
        }
        let sqrt_n = (window.n1..=window.n2 + 1)
            .map(|n| (n as f64).sqrt())
            .collect();
        let d = h.dimension();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            h,
            rates,
            half_decay,
            sqrt_n,
            scratch: RefCell::new(Scratch {
                full: vec![zero; d * d],
                acc: vec![zero; d],
            }),
        }
    }

    fn bands(&self, t: f64) -> Vec<Band> {
        let d = self.h.dimension();
        let mut bands: Vec<Band> = Vec::new();
        for (r, s, v) in self.h.entries(t) {
            let offset = s as isize - r as isize;
            let i = match bands.iter().position(|b| b.offset == offset) {
                Some(i) => i,
                None => {
                    bands.push(Band {
                        offset,
                        coef: vec![Complex64::new(0.0, 0.0); d],
                    });
                    bands.len() - 1
                }
            };
            bands[i].coef[r] = v;
        }
        bands
    }
}

impl OdeSystem for MasterSystem {
    fn dimension(&self) -> usize {
        packed_len(self.h.dimension())
    }

    fn rhs(&self, t: f64, packed: &[Complex64], out: &mut [Complex64]) {
        let d = self.h.dimension();
        let w = self.h.window.width();
        let zero = Complex64::new(0.0, 0.0);
        let mut scratch = self.scratch.borrow_mut();
        let Scratch { full, acc } = &mut *scratch;
        unpack(packed, d, full);
        let f = &full[..];
        let bands = self.bands(t);
        let Rates {
            down,
            up,
            dephasing,
            loss,
            gain,
        } = self.rates;
        let sq = &self.sqrt_n;

        for r in 0..d {
            let (kr, mr) = (r / w, r % w);
            let fr = &f[r * d..(r + 1) * d];

            // [H, ρ] on columns r..d
            let acc = &mut acc[..d - r];
            acc.fill(zero);
            for b in &bands {
                let s = r as isize + b.offset;
                if (0..d as isize).contains(&s) && b.coef[r] != zero {
                    let (h, s) = (b.coef[r], s as usize);
                    for (a, x) in acc.iter_mut().zip(&f[s * d + r..(s + 1) * d]) {
                        *a += h * x;
                    }
                }
                // (ρH)[r, c] = ρ[r, c − o] H[c − o, c]
                let lo = (r as isize).max(b.offset) as usize;
                let hi = (d as isize).min(d as isize + b.offset) as usize;
                if lo < hi {
                    let shift = (lo as isize - b.offset) as usize;
                    let span = hi - lo;
                    for ((a, x), h) in acc[lo - r..hi - r]
                        .iter_mut()
                        .zip(&fr[shift..shift + span])
                        .zip(&b.coef[shift..shift + span])
                    {
                        *a -= x * h;
                    }
                }
            }

            let row = &mut out[row_offset(d, r)..row_offset(d, r) + d - r];
            let x = &fr[r..];
            let hr = self.half_decay[r];
            for ((o, a), (v, hc)) in row
                .iter_mut()
                .zip(acc.iter())
                .zip(x.iter().zip(&self.half_decay[r..]))
            {
                *o = Complex64::new(a.im, -a.re) - v * (hr + hc);
            }
            if kr == 0 {
                // dephasing of the coherence block, and σ₋ρσ₊ from the excited block
                if dephasing != 0.0 {
                    for (o, v) in row[w - r..].iter_mut().zip(&x[w - r..]) {
                        *o -= v * (2.0 * dephasing);
                    }
                }
                if down != 0.0 {
                    let src = &f[(r + w) * d + r + w..(r + w) * d + d];
                    for (o, v) in row[..w - r].iter_mut().zip(src) {
                        *o += v * down;
                    }
                }
            } else if up != 0.0 {
                let src = &f[(r - w) * d + r - w..(r - w) * d + w];
                for (o, v) in row.iter_mut().zip(src) {
                    *o += v * up;
                }
            }
            // a ρ a† and a† ρ a stay inside each (level, level') block
            for kc in kr..2 {
                let base = kc * w;
                let start = if kc == kr { mr } else { 0 };
                if loss != 0.0 && mr + 1 < w {
                    let coef = loss * sq[mr + 1];
                    let src = &f[(r + 1) * d..(r + 2) * d];
                    for mc in start..w - 1 {
                        row[base + mc - r] += src[base + mc + 1] * (coef * sq[mc + 1]);
                    }
                }
                if gain != 0.0 && mr > 0 {
                    let coef = gain * sq[mr];
                    let src = &f[(r - 1) * d..r * d];
                    for mc in start.max(1)..w {
                        row[base + mc - r] += src[base + mc - 1] * (coef * sq[mc]);
                    }
                }
            }
            row[0].im = 0.0;
        }
    }
}

/// Observables of a mixed joint state of one qubit and the field.
pub fn density_observables(state: &DensityState, reference: &FieldReference) -> QrmObservables {
    let d = state.dimension();
    let w = state.window.width();
    let at = |r: usize, c: usize| state.rho[r * d + c];
    let mut photon_dist = vec![0.0; w];
    let mut rho_q = [Complex64::new(0.0, 0.0); 4];
    let mut rho_f = vec![Complex64::new(0.0, 0.0); w * w];
    let mut survival = 0.0;
    for k in 0..2 {
        for m in 0..w {
            photon_dist[m] += at(k * w + m, k * w + m).re;
            for mp in 0..w {
                let v = at(k * w + m, k * w + mp);
                rho_f[m * w + mp] += v;
                survival +=
                    (v * (reference.coherent.amplitudes[m] * reference.coherent.amplitudes[mp])).re;
            }
        }
    }
    for k in 0..2 {
        for kp in 0..2 {
            rho_q[2 * k + kp] = (0..w).map(|m| at(k * w + m, kp * w + m)).sum();
        }
    }
    let mean: f64 = state
        .window
        .photon_numbers()
        .zip(&photon_dist)
        .map(|(n, p)| n as f64 * p)
        .sum();
    let (gg, ee, eg) = (rho_q[0].re, rho_q[3].re, rho_q[2]);
    let (s_q, s_q_linear) = qubit_entropies(gg, ee, eg);
    QrmObservables {
        p_e: ee.clamp(0.0, 1.0),
        delta_n: mean - reference.initial_mean,
        s_q,
        s_q_linear,
        s_f_linear: linear_entropy(&rho_f),
        p_alpha_survival: survival.clamp(0.0, 1.0),
        photon_dist,
    }
}

fn check_integrity(state: &DensityState, check_positivity: bool) -> Result<f64> {
    let trace_err = (state.trace() - 1.0).abs();
    if trace_err > TRACE_TOL {
        return Err(Error::StateIntegrity(format!(
            "trace error {trace_err:e} at t = {}",
            state.t
        )));
    }
    let herm = state.hermiticity_error();
    if herm > HERMITICITY_TOL {
        return Err(Error::StateIntegrity(format!(
            "hermiticity error {herm:e} at t = {}",
            state.t
        )));
    }
    if check_positivity {
        let lo = state.min_eigenvalue();
        if lo < -POSITIVITY_TOL {
            return Err(Error::StateIntegrity(format!(
                "smallest eigenvalue {lo:e} at t = {}",
                state.t
            )));
        }
        return Ok(lo);
    }
    Ok(f64::INFINITY)
}

fn require_supported(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.n_qubits != 1 {
        return Err(Error::InvalidParameter(format!(
            "the dissipative quantum engine supports a single qubit, got n_qubits = {}",
            params.n_qubits
        )));
    }
    let alpha_sq = params.alpha * params.alpha;
    if alpha_sq > MAX_ALPHA_SQUARED {
        return Err(Error::InvalidParameter(format!(
            "alpha^2 = {alpha_sq} exceeds the dense density-matrix limit {MAX_ALPHA_SQUARED}"
        )));
    }
    Ok(())
}

/// Mixed-state run; `observe` sees every sampled density matrix.
///
/// `QrmRun::max_norm_drift` holds the largest trace error, and positivity is
/// checked on every 64th sample and on the last one.
pub fn evolve_master_qrm_observed<F>(
    params: &ModelParams,
    times: &[f64],
    options: &QrmOptions,
    mut observe: F,
) -> Result<(QrmRun, f64)>
where
    F: FnMut(&DensityState, &QrmObservables) -> Result<()>,
{
    require_supported(params)?;
    let window = options.resolve_window(params)?;
    let psi = initial_joint_state(params, window)?;
    let reference = FieldReference::new(params.alpha, window)?;
    let d = psi.amplitudes.len();
    let mut rho0 = vec![Complex64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            rho0[r * d + c] = psi.amplitudes[r] * psi.amplitudes[c].conj();
        }
    }
    let system = MasterSystem::new(params, window);
    let packed0 = pack(&rho0, d);
    let mut state = DensityState {
        window,
        n_levels: 2,
        rho: rho0,
        t: 0.0,
    };
    let mut series = TimeSeries::with_capacity(times.len());
    let mut max_boundary = 0.0f64;
    let mut max_drift = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let last = times.len().saturating_sub(1);
    let stats = Integrator::new(options.tolerances).integrate_observed(
        &system,
        0.0,
        &packed0,
        times,
        |t, y| {
            unpack(y, d, &mut state.rho);
            state.t = t;
            let leakage = state.boundary_population();
            if leakage > options.leakage_limit {
                return Err(Error::WindowOverflow {
                    window,
                    suggested: suggest_wider(window),
                    leakage,
                    t,
                });
            }
            max_boundary = max_boundary.max(leakage);
            let index = series.len();
            let positivity = index % POSITIVITY_STRIDE == 0 || index == last;
            min_eig = min_eig.min(check_integrity(&state, positivity)?);
            max_drift = max_drift.max((state.trace() - 1.0).abs());
            let obs = density_observables(&state, &reference);
            observe(&state, &obs)?;
            series.push(t, obs);
            Ok(())
        },
    )?;
    series.stats = stats;
    Ok((
        QrmRun {
            window,
            discarded_mass: reference.coherent.discarded_mass,
            series,
            max_boundary_population: max_boundary,
            max_norm_drift: max_drift,
        },
        min_eig,
    ))
}

/// Mixed-state trajectory of the dissipative single-qubit QRM.
pub fn evolve_master_qrm(
    params: &ModelParams,
    times: &[f64],
    options: &QrmOptions,
) -> Result<QrmRun> {
    Ok(evolve_master_qrm_observed(params, times, options, |_, _| Ok(()))?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{uniform_times, Tolerances};
    use crate::qrm::evolve_qrm;

    #[test]
    fn lossless_limit_matches_pure_engine() {
        let params = ModelParams::quantum_pi_pulse(2.0, 20.0);
        let times = uniform_times(0.0, 300.0, 61);
        let options = QrmOptions::default();
        let pure = evolve_qrm(&params, &times, &options).unwrap();
        let mixed = evolve_master_qrm(&params, &times, &options).unwrap();
        for ((_, a), (_, b)) in pure.series.iter().zip(mixed.series.iter()) {
            assert!((a.p_e - b.p_e).abs() < 1e-8);
            assert!((a.delta_n - b.delta_n).abs() < 1e-8);
            assert!((a.s_q_linear - b.s_q_linear).abs() < 1e-8);
            assert!((a.s_f_linear - b.s_f_linear).abs() < 1e-8);
            assert!((a.p_alpha_survival - b.p_alpha_survival).abs() < 1e-8);
        }
    }

    #[test]
    fn generator_matches_dense_lindblad() {
        let params = ModelParams::quantum_pi_pulse(1.5, 10.0)
            .with_qubit_bath(0.03, 0.02, 0.2)
            .with_cavity_bath(0.05, 0.4);
        let window = FockWindow::new(1, 7).unwrap();
        let system = MasterSystem::new(&params, window);
        let (w, d) = (window.width(), system.h.dimension());
        let c = |re: f64| Complex64::new(re, 0.0);
        let t = 0.37;

        let mut h = DMatrix::zeros(d, d);
        for (r, s, v) in system.h.entries(t) {
            h[(r, s)] = v;
        }
        let mut lower = DMatrix::zeros(d, d);
        let mut dephase = DMatrix::zeros(d, d);
        let mut a = DMatrix::zeros(d, d);
        for m in 0..w {
            lower[(m, w + m)] = c(1.0);
            dephase[(m, m)] = c(-1.0);
            dephase[(w + m, w + m)] = c(1.0);
            for k in 0..2 {
                if m > 0 {
                    a[(k * w + m - 1, k * w + m)] = c(((window.n1 + m) as f64).sqrt());
                }
            }
        }
        let raise = lower.adjoint();
        let a_dag = a.adjoint();
        let jumps = [
            (lower, system.rates.down),
            (raise, system.rates.up),
            (dephase, system.rates.dephasing),
            (a, system.rates.loss),
            (a_dag, system.rates.gain),
        ];

        let x = DMatrix::from_fn(d, d, |r, s| {
            Complex64::new(
                ((r * 7 + s * 3) % 11) as f64 - 5.0,
                ((r * 5 + s * 13) % 9) as f64 - 4.0,
            )
        });
        let rho = &x * x.adjoint();
        let rho = &rho / rho.trace();
        let i = Complex64::new(0.0, 1.0);
        let mut want = (&h * &rho - &rho * &h) * (-i);
        for (l, rate) in &jumps {
            let ld = l.adjoint();
            let ll = &ld * l;
            want += (l * &rho * &ld - (&ll * &rho + &rho * &ll) * c(0.5)) * c(*rate);
        }

        let full: Vec<Complex64> = (0..d * d).map(|k| rho[(k / d, k % d)]).collect();
        let mut out = vec![c(0.0); packed_len(d)];
        system.rhs(t, &pack(&full, d), &mut out);
        let mut got = vec![c(0.0); d * d];
        unpack(&out, d, &mut got);
        for r in 0..d {
            for s in 0..d {
                assert!((got[r * d + s] - want[(r, s)]).norm() < 1e-12, "({r}, {s})");
            }
        }
    }

    #[test]
    fn cavity_decay_of_mean_photon_number() {
        let alpha: f64 = 2.0;
        let kappa = 0.01;
        let params = ModelParams::quantum(alpha, 0.0).with_cavity_bath(kappa, 0.0);
        let options = QrmOptions {
            window: Some(FockWindow::new(0, 30).unwrap()),
            ..QrmOptions::default()
        };
        let times = uniform_times(0.0, 100.0, 11);
        let run = evolve_master_qrm(&params, &times, &options).unwrap();
        for (t, o) in run.series.iter() {
            let mean = alpha * alpha + o.delta_n;
            let want = alpha * alpha * (-kappa * t).exp();
            assert!(
                ((mean - want) / want).abs() < 1e-8,
                "t={t} {mean} vs {want}"
            );
        }
    }

    #[test]
    fn thermal_cavity_relaxes_toward_n_c() {
        let (kappa, n_c) = (0.05, 0.3);
        let params = ModelParams::quantum(0.0, 0.0).with_cavity_bath(kappa, n_c);
        let options = QrmOptions {
            window: Some(FockWindow::new(0, 25).unwrap()),
            ..QrmOptions::default()
        };
        let times = uniform_times(0.0, 60.0, 7);
        let run = evolve_master_qrm(&params, &times, &options).unwrap();
        for (t, o) in run.series.iter() {
            let want = n_c * (1.0 - (-kappa * t).exp());
            assert!((o.delta_n - want).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_and_positivity_hold_with_all_channels() {
        let params = ModelParams::quantum_pi_pulse(3.0, 20.0)
            .with_qubit_bath(0.01, 0.005, 0.05)
            .with_cavity_bath(0.002, 0.05);
        let times = uniform_times(0.0, 200.0, 41);
        let (run, min_eig) =
            evolve_master_qrm_observed(&params, &times, &QrmOptions::default(), |rho, _| {
                assert!(rho.hermiticity_error() == 0.0);
                Ok(())
            })
            .unwrap();
        assert!(run.max_norm_drift < 1e-10);
        assert!(min_eig > -1e-9);
    }

    #[test]
    fn qubit_relaxation_steady_state() {
        let n_th = 0.05;
        let params = ModelParams::quantum(0.0, 0.0).with_qubit_bath(0.1, 0.0, n_th);
        let options = QrmOptions {
            tolerances: Tolerances::loose(),
            ..QrmOptions::default()
        };
        let run = evolve_master_qrm(&params, &[0.0, 200.0], &options).unwrap();
        let p = run.series.records[1].p_e;
        assert!((p - n_th / (2.0 * n_th + 1.0)).abs() < 1e-7);
    }

    #[test]
    fn guards() {
        let too_big = ModelParams::quantum(15.0, 0.001);
        assert!(matches!(
            evolve_master_qrm(&too_big, &[0.0], &QrmOptions::default()),
            Err(Error::InvalidParameter(_))
        ));
        let two = ModelParams::quantum(2.0, 0.01).with_qubits(2);
        assert!(matches!(
            evolve_master_qrm(&two, &[0.0], &QrmOptions::default()),
            Err(Error::InvalidParameter(_))
        ));
    }
}
