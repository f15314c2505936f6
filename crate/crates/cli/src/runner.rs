//! Dispatches a scenario to its solver and collects the sampled columns.

use rabi_core::analysis::{photon_delta, PhotonDistribution};
use rabi_core::qrm::{evolve_qrm, QrmOptions, QrmRun};
use rabi_core::qrm_dissipative::evolve_master_qrm_observed;
use rabi_core::srm::{evolve_exact, evolve_semianalytic, series_intermediate, series_rwa};
use rabi_core::srm_dissipative::{evolve_master_srm, QubitDensity};
use rabi_core::{FockWindow, StepStats, TimeSeries};
use serde::Serialize;

use crate::config::{Model, Scenario};
use crate::error::CliError;

pub const SRM_COLUMNS: &[&str] = &["t", "p_e"];
pub const SRM_MASTER_COLUMNS: &[&str] = &["t", "p_e", "s_q", "s_q_linear"];
pub const QRM_COLUMNS: &[&str] = &[
    "t",
    "p_e",
    "delta_n",
    "s_q",
    "s_q_linear",
    "s_f_linear",
    "p_alpha_survival",
];

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub window: FockWindow,
    pub probabilities: Vec<f64>,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub stats: StepStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discarded_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_boundary_population: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_norm_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Diagnostics,
}

fn scalar_outcome(series: TimeSeries<f64>) -> Outcome {
    Outcome {
        columns: SRM_COLUMNS,
        rows: series.iter().map(|(t, p)| vec![t, *p]).collect(),
        snapshots: Vec::new(),
        diagnostics: Diagnostics {
            stats: series.stats,
            ..Diagnostics::default()
        },
    }
}

fn quantum_outcome(
    s: &Scenario,
    run: QrmRun,
    min_eigenvalue: Option<f64>,
) -> Result<Outcome, CliError> {
    let series = &run.series;
    let rows = series
        .iter()
        .map(|(t, o)| {
            vec![
                t,
                o.p_e,
                o.delta_n,
                o.s_q,
                o.s_q_linear,
                o.s_f_linear,
                o.p_alpha_survival,
            ]
        })
        .collect();
    let initial = PhotonDistribution::new(run.window, series.records[0].photon_dist.clone())?;
    let mut snapshots = Vec::with_capacity(s.snapshot_times.len());
    for &t in &s.snapshot_times {
        let i = series
            .times
            .iter()
            .position(|&x| x == t)
            .expect("snapshot times are part of the sample grid");
        let current = PhotonDistribution::new(run.window, series.records[i].photon_dist.clone())?;
        let d = photon_delta(&initial, &current)?;
        snapshots.push(Snapshot {
            t,
            window: run.window,
            probabilities: d.current,
            delta: d.delta,
        });
    }
    Ok(Outcome {
        columns: QRM_COLUMNS,
        rows,
        snapshots,
        diagnostics: Diagnostics {
            stats: series.stats,
            window: Some([run.window.n1, run.window.n2]),
            discarded_mass: Some(run.discarded_mass),
            max_boundary_population: Some(run.max_boundary_population),
            max_norm_drift: Some(run.max_norm_drift),
            min_eigenvalue,
        },
    })
}

pub fn qrm_options(s: &Scenario) -> QrmOptions {
    QrmOptions {
        window: s.window,
        ..QrmOptions::with_tolerances(s.tolerances)
    }
}

pub fn run(s: &Scenario) -> Result<Outcome, CliError> {
    let q = s.initial.amplitudes();
    let (p, times, tol) = (&s.params, s.times.as_slice(), &s.tolerances);
    match s.model {
        Model::SrmRwa => Ok(scalar_outcome(series_rwa(q, p, times)?)),
        Model::SrmIntermediate => Ok(scalar_outcome(series_intermediate(q, p, times)?)),
        Model::SrmSemianalytic => Ok(scalar_outcome(evolve_semianalytic(q, p, times, tol)?)),
        Model::SrmExact => Ok(scalar_outcome(evolve_exact(q, p, times, tol)?)),
        Model::SrmMaster => {
            let series = evolve_master_srm(QubitDensity::pure(q), p, times, tol)?;
            Ok(Outcome {
                columns: SRM_MASTER_COLUMNS,
                rows: series
                    .iter()
                    .map(|(t, o)| vec![t, o.p_e, o.s_q, o.s_q_linear])
                    .collect(),
                snapshots: Vec::new(),
                diagnostics: Diagnostics {
                    stats: series.stats,
                    ..Diagnostics::default()
                },
            })
        }
        Model::Qrm => quantum_outcome(s, evolve_qrm(p, times, &qrm_options(s))?, None),
        Model::QrmMaster => {
            let (run, min_eig) =
                evolve_master_qrm_observed(p, times, &qrm_options(s), |_, _| Ok(()))?;
            quantum_outcome(s, run, Some(min_eig))
        }
    }
}
