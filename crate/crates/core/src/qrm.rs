//! Unitary quantum Rabi model for 1 to 3 identical qubits and a truncated cavity mode.
//!
//! The state lives in the frame rotating at ω for both the field and the qubits,
//! where the generator is
//! `−(Δ/2)Σσ_z + g(a J₊ + a† J₋) + δ g(a J₋ e^{−2iωt} + a† J₊ e^{2iωt})`.
//! Identical qubits starting in `|g…g⟩` stay in the symmetric subspace, so the
//! qubit side is the `N + 1` level Dicke ladder with `J₊|k⟩ = √((N−k)(k+1)) |k+1⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    build_window, coherent_amplitudes, initial_joint_state, CoherentRestriction, FockWindow,
    JointState, DEFAULT_CUTOFF,
};
use crate::integrator::{Integrator, OdeSystem, Tolerances};
use crate::params::{ModelParams, OMEGA};
use crate::series::TimeSeries;
use crate::srm_dissipative::{qubit_eigenvalues, von_neumann};

/// Boundary population above which a run is aborted with a window overflow.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

const NORM_INTEGRITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct QrmObservables {
    /// Excitation probability of any single qubit.
    pub p_e: f64,
    /// `⟨n̂⟩(t) − ⟨n̂⟩(0)`
    pub delta_n: f64,
    pub s_q: f64,
    pub s_q_linear: f64,
    pub s_f_linear: f64,
    pub p_alpha_survival: f64,
    /// `p_n` over the window, starting at `n1`.
    pub photon_dist: Vec<f64>,
}

/// Collective raising coefficients `c_k = √((N−k)(k+1))`, `k = 0..N`.
pub(crate) fn dicke_coefficients(n_qubits: usize) -> Vec<f64> {
    (0..n_qubits)
        .map(|k| (((n_qubits - k) * (k + 1)) as f64).sqrt())
        .collect()
}

/// The banded rotating-frame generator.
pub(crate) struct QrmHamiltonian {
    pub(crate) window: FockWindow,
    pub(crate) n_levels: usize,
    g: f64,
    delta: f64,
    /// `−(Δ/2)(2k − N)` for every level.
    diagonal: Vec<f64>,
    dicke: Vec<f64>,
    /// `√n` for `n = n1 ..= n2 + 1`.
    sqrt_n: Vec<f64>,
}

impl QrmHamiltonian {
    pub(crate) fn new(params: &ModelParams, window: FockWindow) -> Self {
        let n = params.n_qubits;
        let diagonal = (0..=n)
            .map(|k| -0.5 * params.detuning * (2.0 * k as f64 - n as f64))
            .collect();
        let sqrt_n = (window.n1..=window.n2 + 1)
            .map(|m| (m as f64).sqrt())
            .collect();
        Self {
            window,
            n_levels: n + 1,
            g: params.coupling,
            delta: params.delta_factor(),
            diagonal,
            dicke: dicke_coefficients(n),
            sqrt_n,
        }
    }

    pub(crate) fn dimension(&self) -> usize {
        self.n_levels * self.window.width()
    }

    /// `out = H(t) ψ`.
    pub(crate) fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let w = self.window.width();
        let at = |k: usize, m: usize| k * w + m;
        let cr_up = Complex64::from_polar(self.g * self.delta, 2.0 * OMEGA * t);
        let cr_down = cr_up.conj();
        for k in 0..self.n_levels {
            let diag = self.diagonal[k];
            for m in 0..w {
                // sqrt_n[m] = √n, sqrt_n[m + 1] = √(n+1) with n = n1 + m
                let mut acc = psi[at(k, m)] * diag;
                if k > 0 {
                    let c = self.dicke[k - 1];
                    if m + 1 < w {
                        acc += psi[at(k - 1, m + 1)] * (self.g * c * self.sqrt_n[m + 1]);
                    }
                    if m > 0 {
                        acc += psi[at(k - 1, m - 1)] * cr_up * (c * self.sqrt_n[m]);
                    }
                }
                if k + 1 < self.n_levels {
                    let c = self.dicke[k];
                    if m > 0 {
                        acc += psi[at(k + 1, m - 1)] * (self.g * c * self.sqrt_n[m]);
                    }
                    if m + 1 < w {
                        acc += psi[at(k + 1, m + 1)] * cr_down * (c * self.sqrt_n[m + 1]);
                    }
                }
                out[at(k, m)] = acc;
            }
        }
    }

    /// Nonzero entries `(row, column, H[row, column])` of `H(t)`.
    pub(crate) fn entries(&self, t: f64) -> Vec<(usize, usize, Complex64)> {
        let w = self.window.width();
        let at = |k: usize, m: usize| k * w + m;
        let cr_up = Complex64::from_polar(self.g * self.delta, 2.0 * OMEGA * t);
        let real = |x: f64| Complex64::new(x, 0.0);
        let mut out = Vec::with_capacity(5 * self.dimension());
        for k in 0..self.n_levels {
            for m in 0..w {
                let row = at(k, m);
                if self.diagonal[k] != 0.0 {
                    out.push((row, row, real(self.diagonal[k])));
                }
                if k > 0 {
                    let c = self.dicke[k - 1];
                    if m + 1 < w {
                        out.push((row, at(k - 1, m + 1), real(self.g * c * self.sqrt_n[m + 1])));
                    }
                    if m > 0 {
                        out.push((row, at(k - 1, m - 1), cr_up * (c * self.sqrt_n[m])));
                    }
                }
                if k + 1 < self.n_levels {
                    let c = self.dicke[k];
                    if m > 0 {
                        out.push((row, at(k + 1, m - 1), real(self.g * c * self.sqrt_n[m])));
                    }
                    if m + 1 < w {
                        out.push((
                            row,
                            at(k + 1, m + 1),
                            cr_up.conj() * (c * self.sqrt_n[m + 1]),
                        ));
                    }
                }
            }
        }
        out
    }
}

impl OdeSystem for QrmHamiltonian {
    fn dimension(&self) -> usize {
        QrmHamiltonian::dimension(self)
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        self.apply(t, y, dy);
        for v in dy.iter_mut() {
            *v = Complex64::new(v.im, -v.re);
        }
    }
}

/// `−i H_frame(t) ψ` for the given state.
pub fn apply_hamiltonian(state: &JointState, params: &ModelParams, t: f64) -> Vec<Complex64> {
    let h = QrmHamiltonian::new(params, state.window);
    let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    h.rhs(t, &state.amplitudes, &mut out);
    out
}

/// Single-qubit excitation probability `Σ_k (k/N) Σ_n |ψ(k, n)|²`.
pub fn excitation_probability(state: &JointState) -> f64 {
    let n_qubits = (state.n_levels - 1) as f64;
    let p: f64 = (1..state.n_levels)
        .map(|k| k as f64 / n_qubits * state.level(k).iter().map(|a| a.norm_sqr()).sum::<f64>())
        .sum();
    p.clamp(0.0, 1.0)
}

/// Reference data for the field observables: the initial windowed coherent state.
#[derive(Debug, Clone)]
pub struct FieldReference {
    pub coherent: CoherentRestriction,
    pub initial_mean: f64,
}

impl FieldReference {
    pub fn new(alpha: f64, window: FockWindow) -> Result<Self> {
        let coherent = coherent_amplitudes(alpha, window)?;
        let initial_mean = window
            .photon_numbers()
            .zip(&coherent.amplitudes)
            .map(|(n, a)| n as f64 * a * a)
            .sum();
        Ok(Self {
            coherent,
            initial_mean,
        })
    }
}

pub fn photon_distribution(state: &JointState) -> Vec<f64> {
    let w = state.width();
    let mut dist = vec![0.0; w];
    for k in 0..state.n_levels {
        for (p, a) in dist.iter_mut().zip(state.level(k)) {
            *p += a.norm_sqr();
        }
    }
    dist
}

fn field_observables_with(state: &JointState, reference: &FieldReference) -> (f64, Vec<f64>, f64) {
    let dist = photon_distribution(state);
    let mean: f64 = state
        .window
        .photon_numbers()
        .zip(&dist)
        .map(|(n, p)| n as f64 * p)
        .sum();
    let survival: f64 = (0..state.n_levels)
        .map(|k| {
            state
                .level(k)
                .iter()
                .zip(&reference.coherent.amplitudes)
                .map(|(a, c)| a * *c)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    (
        mean - reference.initial_mean,
        dist,
        survival.clamp(0.0, 1.0),
    )
}

/// `(Δn, p_n, P_|α⟩)`; the survival target is the fixed `|α⟩` of the rotating frame.
pub fn field_observables(state: &JointState, params: &ModelParams) -> Result<(f64, Vec<f64>, f64)> {
    let reference = FieldReference::new(params.alpha, state.window)?;
    Ok(field_observables_with(state, &reference))
}

/// Qubit-side reduced density matrix `ρ_Q[k][k'] = Σ_n ψ(k,n) ψ*(k',n)`, row-major.
pub fn qubit_reduced_density(state: &JointState) -> Vec<Complex64> {
    let l = state.n_levels;
    let mut rho = vec![Complex64::new(0.0, 0.0); l * l];
    for k in 0..l {
        for kp in k..l {
            let v: Complex64 = state
                .level(k)
                .iter()
                .zip(state.level(kp))
                .map(|(a, b)| a * b.conj())
                .sum();
            rho[k * l + kp] = v;
            rho[kp * l + k] = v.conj();
        }
    }
    rho
}

/// One-qubit reduction of a symmetric `N`-qubit density matrix on the Dicke ladder.
/// Returns `(ρ_gg, ρ_ee, ρ_eg)`.
pub fn single_qubit_reduction(rho_q: &[Complex64], n_levels: usize) -> (f64, f64, Complex64) {
    let n = (n_levels - 1) as f64;
    let dicke = dicke_coefficients(n_levels - 1);
    let mut gg = 0.0;
    let mut ee = 0.0;
    let mut eg = Complex64::new(0.0, 0.0);
    for k in 0..n_levels {
        let pop = rho_q[k * n_levels + k].re;
        ee += k as f64 / n * pop;
        gg += (n - k as f64) / n * pop;
        if k + 1 < n_levels {
            eg += rho_q[(k + 1) * n_levels + k] * (dicke[k] / n);
        }
    }
    (gg, ee, eg)
}

/// `(S_q, S_q^(L))` of a single-qubit density matrix.
pub(crate) fn qubit_entropies(gg: f64, ee: f64, eg: Complex64) -> (f64, f64) {
    let [hi, lo] = qubit_eigenvalues(gg + ee, gg * ee - eg.norm_sqr());
    let linear = 1.0 - (gg * gg + ee * ee + 2.0 * eg.norm_sqr());
    (von_neumann(&[hi, lo]), linear)
}

/// `1 − Tr ρ²` of a Hermitian matrix stored row-major.
pub(crate) fn linear_entropy(rho: &[Complex64]) -> f64 {
    1.0 - rho.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// `(S_q, S_q^(L), S_f^(L))` of a pure joint state.
///
/// `S_f^(L)` is obtained from the qubit side, which carries the same Schmidt spectrum.
pub fn entanglement_entropies(state: &JointState) -> Result<(f64, f64, f64)> {
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > NORM_INTEGRITY_TOL {
        return Err(Error::StateIntegrity(format!(
            "joint state norm {norm} deviates from 1 at t = {}",
            state.time
        )));
    }
    let rho_q = qubit_reduced_density(state);
    let (gg, ee, eg) = single_qubit_reduction(&rho_q, state.n_levels);
    let (s_q, s_q_linear) = qubit_entropies(gg, ee, eg);
    Ok((s_q, s_q_linear, linear_entropy(&rho_q)))
}

pub(crate) fn suggest_wider(window: FockWindow) -> FockWindow {
    window.widened((window.width() / 2).max(10))
}

/// Run settings shared by the pure and the mixed-state engines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrmOptions {
    /// Explicit window; built from `alpha` and `cutoff` when absent.
    pub window: Option<FockWindow>,
    pub cutoff: f64,
    pub tolerances: Tolerances,
    pub leakage_limit: f64,
}

impl Default for QrmOptions {
    fn default() -> Self {
        Self {
            window: None,
            cutoff: DEFAULT_CUTOFF,
            tolerances: Tolerances::default(),
            leakage_limit: LEAKAGE_LIMIT,
        }
    }
}

impl QrmOptions {
    pub fn with_tolerances(tolerances: Tolerances) -> Self {
        Self {
            tolerances,
            ..Self::default()
        }
    }

    pub fn resolve_window(&self, params: &ModelParams) -> Result<FockWindow> {
        match self.window {
            Some(w) => Ok(w),
            None => build_window(params.alpha, self.cutoff),
        }
    }
}

/// A QRM trajectory and its run diagnostics.
#[derive(Debug, Clone)]
pub struct QrmRun {
    pub window: FockWindow,
    /// Poisson mass dropped when restricting `|α⟩` to the window.
    pub discarded_mass: f64,
    pub series: TimeSeries<QrmObservables>,
    pub max_boundary_population: f64,
    /// Largest `|‖ψ‖² − 1|` (or `|Tr ρ − 1|`) over the samples.
    pub max_norm_drift: f64,
}

impl QrmRun {
    pub fn p_e(&self) -> TimeSeries<f64> {
        self.series.map(|o| o.p_e)
    }
}

/// Integrates the pure QRM, handing every sampled state to `observe` along with its observables.
pub fn evolve_qrm_observed<F>(
    params: &ModelParams,
    times: &[f64],
    options: &QrmOptions,
    mut observe: F,
) -> Result<QrmRun>
where
    F: FnMut(&JointState, &QrmObservables) -> Result<()>,
{
    params.validate()?;
    let window = options.resolve_window(params)?;
    let initial = initial_joint_state(params, window)?;
    let reference = FieldReference::new(params.alpha, window)?;
    let h = QrmHamiltonian::new(params, window);
    let mut series = TimeSeries::with_capacity(times.len());
    let mut max_boundary = 0.0f64;
    let mut max_drift = 0.0f64;
    let mut state = initial.clone();
    let stats = Integrator::new(options.tolerances).integrate_observed(
        &h,
        0.0,
        &initial.amplitudes,
        times,
        |t, y| {
            state.amplitudes.copy_from_slice(y);
            state.time = t;
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
            max_drift = max_drift.max((state.norm_sqr() - 1.0).abs());
            let obs = observables(&state, &reference)?;
            observe(&state, &obs)?;
            series.push(t, obs);
            Ok(())
        },
    )?;
    series.stats = stats;
    Ok(QrmRun {
        window,
        discarded_mass: reference.coherent.discarded_mass,
        series,
        max_boundary_population: max_boundary,
        max_norm_drift: max_drift,
    })
}

pub fn evolve_qrm(params: &ModelParams, times: &[f64], options: &QrmOptions) -> Result<QrmRun> {
    evolve_qrm_observed(params, times, options, |_, _| Ok(()))
}

fn observables(state: &JointState, reference: &FieldReference) -> Result<QrmObservables> {
    let (s_q, s_q_linear, s_f_linear) = entanglement_entropies(state)?;
    let (delta_n, photon_dist, p_alpha_survival) = field_observables_with(state, reference);
    Ok(QrmObservables {
        p_e: excitation_probability(state),
        delta_n,
        s_q,
        s_q_linear,
        s_f_linear,
        p_alpha_survival,
        photon_dist,
    })
}
