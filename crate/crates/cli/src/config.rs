//! Scenario files: a list of `[[scenario]]` tables, each naming a model, its
//! parameters (in units of ω) and the sampling of the run.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use rabi_core::integrator::uniform_times;
use rabi_core::{FockWindow, ModelParams, QubitAmplitudes, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

const DEFAULT_SAMPLES_PER_PI_PULSE: usize = 8;
const MIN_SAMPLES_PER_PI_PULSE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    SrmRwa,
    SrmIntermediate,
    SrmSemianalytic,
    SrmExact,
    SrmMaster,
    Qrm,
    QrmMaster,
}

impl Model {
    pub fn is_quantum(self) -> bool {
        matches!(self, Model::Qrm | Model::QrmMaster)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::SrmRwa => "srm_rwa",
            Model::SrmIntermediate => "srm_intermediate",
            Model::SrmSemianalytic => "srm_semianalytic",
            Model::SrmExact => "srm_exact",
            Model::SrmMaster => "srm_master",
            Model::Qrm => "qrm",
            Model::QrmMaster => "qrm_master",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialQubit {
    #[default]
    Ground,
    Excited,
}

impl InitialQubit {
    pub fn name(self) -> &'static str {
        match self {
            InitialQubit::Ground => "ground",
            InitialQubit::Excited => "excited",
        }
    }

    pub fn amplitudes(self) -> QubitAmplitudes {
        match self {
            InitialQubit::Ground => QubitAmplitudes::ground(),
            InitialQubit::Excited => QubitAmplitudes::excited(),
        }
    }
}

/// Physical parameters as written in a scenario. The drive strength is given
/// by exactly one of `omega_t_pi`, `rabi_frequency` or (quantum models only)
/// `coupling`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub omega_t_pi: Option<f64>,
    pub rabi_frequency: Option<f64>,
    pub coupling: Option<f64>,
    pub alpha: Option<f64>,
    /// Alternative to `alpha` for the mean photon number `α²`.
    pub alpha_squared: Option<f64>,
    #[serde(default)]
    pub detuning: f64,
    #[serde(default = "one")]
    pub n_qubits: usize,
    #[serde(default = "yes")]
    pub counter_rotating: bool,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub gamma_phi: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub n_th: f64,
    #[serde(default)]
    pub n_c: f64,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub model: Model,
    pub horizon: f64,
    #[serde(default = "default_samples")]
    pub samples_per_pi_pulse: usize,
    /// Fixed sample spacing; overrides `samples_per_pi_pulse`.
    pub sample_interval: Option<f64>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Time-series file, relative to the output directory. Defaults to `<name>.tsv`.
    pub output: Option<PathBuf>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub window: Option<[usize; 2]>,
    pub initial: Option<InitialQubit>,
    pub params: ParamSpec,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES_PER_PI_PULSE
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "scenario", default)]
    pub scenarios: Vec<ScenarioSpec>,
}

/// Command-line tolerance overrides, applied on top of every scenario.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
}

/// A validated scenario with every derived quantity resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub model: Model,
    pub params: ModelParams,
    pub horizon: f64,
    pub samples_per_pi_pulse: usize,
    pub sample_interval: f64,
    /// Sample grid, snapshot times included.
    pub times: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    pub output: PathBuf,
    pub tolerances: Tolerances,
    pub window: Option<FockWindow>,
    pub initial: InitialQubit,
}

fn invalid(scenario: &str, field: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("scenario `{scenario}`: {field}: {msg}"))
}

pub fn parse(text: &str, overrides: Overrides) -> Result<Vec<Scenario>, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if file.scenarios.is_empty() {
        return Err(CliError::Config("no [[scenario]] tables found".into()));
    }
    let mut out: Vec<Scenario> = Vec::with_capacity(file.scenarios.len());
    for spec in &file.scenarios {
        let s = resolve(spec, overrides)?;
        if out.iter().any(|o| o.output == s.output) {
            return Err(invalid(
                &s.name,
                "output",
                format!("{} is written twice", s.output.display()),
            ));
        }
        out.push(s);
    }
    Ok(out)
}

pub fn load(path: &Path, overrides: Overrides) -> Result<Vec<Scenario>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse(&text, overrides).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn positive(name: &str, field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(
            name,
            field,
            format!("must be a positive number, got {v}"),
        ))
    }
}

fn resolve_params(name: &str, model: Model, p: &ParamSpec) -> Result<ModelParams, CliError> {
    let drive_fields = [
        ("params.omega_t_pi", p.omega_t_pi.is_some()),
        ("params.rabi_frequency", p.rabi_frequency.is_some()),
        ("params.coupling", p.coupling.is_some()),
    ];
    let given: Vec<&str> = drive_fields
        .iter()
        .filter(|(_, set)| *set)
        .map(|(f, _)| *f)
        .collect();
    if given.len() > 1 {
        return Err(invalid(
            name,
            given[1],
            format!("conflicts with {}", given[0]),
        ));
    }

    let mut params = if model.is_quantum() {
        let alpha = match (p.alpha, p.alpha_squared) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    name,
                    "params.alpha_squared",
                    "conflicts with params.alpha",
                ))
            }
            (Some(a), None) => a,
            (None, Some(a2)) if a2 >= 0.0 => a2.sqrt(),
            (None, Some(a2)) => {
                return Err(invalid(
                    name,
                    "params.alpha_squared",
                    format!("must be >= 0, got {a2}"),
                ))
            }
            (None, None) => {
                return Err(invalid(
                    name,
                    "params.alpha",
                    format!("required by model {model}"),
                ))
            }
        };
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid(
                name,
                "params.alpha",
                format!("must be >= 0, got {alpha}"),
            ));
        }
        if given.is_empty() {
            return Err(invalid(
                name,
                "params.coupling",
                "one of coupling, omega_t_pi or rabi_frequency is required",
            ));
        }
        if p.coupling.is_none() && alpha == 0.0 {
            return Err(invalid(
                name,
                "params.alpha",
                "must be > 0 unless the drive is given as a coupling",
            ));
        }
        let g = match (p.omega_t_pi, p.rabi_frequency, p.coupling) {
            (_, _, Some(g)) => g,
            (Some(tp), _, _) => PI / positive(name, "params.omega_t_pi", tp)? / (2.0 * alpha),
            (_, Some(rabi), _) => rabi / (2.0 * alpha),
            (None, None, None) => unreachable!(),
        };
        ModelParams::quantum(alpha, g)
    } else {
        let unused = [
            ("params.alpha", p.alpha.is_some()),
            ("params.alpha_squared", p.alpha_squared.is_some()),
            ("params.coupling", p.coupling.is_some()),
        ];
        if let Some((field, _)) = unused.iter().find(|(_, set)| *set) {
            return Err(invalid(name, field, format!("not used by model {model}")));
        }
        let rabi = match (p.omega_t_pi, p.rabi_frequency) {
            (Some(tp), _) => PI / positive(name, "params.omega_t_pi", tp)?,
            (_, Some(rabi)) => rabi,
            _ => {
                return Err(invalid(
                    name,
                    "params.rabi_frequency",
                    "one of rabi_frequency or omega_t_pi is required",
                ))
            }
        };
        ModelParams::semiclassical(rabi)
    };
    params = params
        .with_detuning(p.detuning)
        .with_qubits(p.n_qubits)
        .with_counter_rotating(p.counter_rotating)
        .with_qubit_bath(p.gamma, p.gamma_phi, p.n_th)
        .with_cavity_bath(p.kappa, p.n_c);
    params.validate().map_err(|e| invalid(name, "params", e))?;
    if !model.is_quantum() && params.n_qubits != 1 {
        return Err(invalid(
            name,
            "params.n_qubits",
            format!("model {model} has a single qubit"),
        ));
    }
    let dissipative = matches!(model, Model::SrmMaster | Model::QrmMaster);
    if !dissipative && params.has_dissipation() {
        let field = if params.gamma > 0.0 {
            "params.gamma"
        } else if params.gamma_phi > 0.0 {
            "params.gamma_phi"
        } else {
            "params.kappa"
        };
        return Err(invalid(name, field, format!("model {model} is lossless")));
    }
    if !matches!(model, Model::QrmMaster) && params.kappa > 0.0 {
        return Err(invalid(
            name,
            "params.kappa",
            format!("model {model} has no cavity"),
        ));
    }
    Ok(params)
}

fn resolve(spec: &ScenarioSpec, overrides: Overrides) -> Result<Scenario, CliError> {
    let name = spec.name.as_str();
    if name.is_empty() {
        return Err(CliError::Config("scenario with an empty name".into()));
    }
    let model = spec.model;
    let params = resolve_params(name, model, &spec.params)?;
    let horizon = positive(name, "horizon", spec.horizon)?;
    if spec.samples_per_pi_pulse < MIN_SAMPLES_PER_PI_PULSE {
        return Err(invalid(
            name,
            "samples_per_pi_pulse",
            format!(
                "must be at least {MIN_SAMPLES_PER_PI_PULSE}, got {}",
                spec.samples_per_pi_pulse
            ),
        ));
    }
    let sample_interval = match spec.sample_interval {
        Some(dt) => positive(name, "sample_interval", dt)?,
        None if params.rabi_frequency > 0.0 => params.pi_pulse() / spec.samples_per_pi_pulse as f64,
        None => {
            return Err(invalid(
                name,
                "sample_interval",
                "required when the Rabi frequency is zero",
            ))
        }
    };
    let count = (horizon / sample_interval * (1.0 - 1e-12)).ceil() as usize + 1;
    let mut times = uniform_times(0.0, horizon, count.max(2));

    let mut snapshot_times = spec.snapshot_times.clone();
    if !snapshot_times.is_empty() && !model.is_quantum() {
        return Err(invalid(
            name,
            "snapshot_times",
            format!("model {model} has no photon distribution"),
        ));
    }
    for &t in &snapshot_times {
        if !(0.0..=horizon).contains(&t) {
            return Err(invalid(
                name,
                "snapshot_times",
                format!("{t} lies outside [0, {horizon}]"),
            ));
        }
    }
    snapshot_times.sort_by(f64::total_cmp);
    snapshot_times.dedup();
    times.extend_from_slice(&snapshot_times);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let defaults = Tolerances::default();
    let rtol = overrides.rtol.or(spec.rtol).unwrap_or(defaults.rtol);
    let atol = overrides.atol.or(spec.atol).unwrap_or(defaults.atol);
    let tolerances = Tolerances::new(rtol, atol).map_err(|e| invalid(name, "rtol/atol", e))?;

    let window = match spec.window {
        None => None,
        Some(_) if !model.is_quantum() => {
            return Err(invalid(
                name,
                "window",
                format!("model {model} has no cavity"),
            ))
        }
        Some([n1, n2]) => Some(FockWindow::new(n1, n2).map_err(|e| invalid(name, "window", e))?),
    };
    let initial = match spec.initial {
        Some(InitialQubit::Excited) if model.is_quantum() => {
            return Err(invalid(
                name,
                "initial",
                "quantum models start with every qubit in the ground state",
            ))
        }
        Some(i) => i,
        None => InitialQubit::Ground,
    };
    let output = spec
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{name}.tsv")));
    if output.is_absolute()
        || output
            .components()
            .any(|c| matches!(c, std::path::Component::ParentDir))
    {
        return Err(invalid(
            name,
            "output",
            "must be a relative path inside the output directory",
        ));
    }
    Ok(Scenario {
        name: name.to_owned(),
        model,
        params,
        horizon,
        samples_per_pi_pulse: spec.samples_per_pi_pulse,
        sample_interval,
        times,
        snapshot_times,
        output,
        tolerances,
        window,
        initial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_error(text: &str) -> String {
        match parse(text, Overrides::default()) {
            Err(CliError::Config(msg)) => msg,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_semiclassical_scenario() {
        let s = parse(
            r#"
            [[scenario]]
            name = "rabi"
            model = "srm_exact"
            horizon = 100.0
            params = { omega_t_pi = 50.0 }
            "#,
            Overrides::default(),
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        let s = &s[0];
        assert!((s.params.rabi_frequency - PI / 50.0).abs() < 1e-15);
        assert_eq!(s.times.len(), 17);
        assert_eq!(*s.times.last().unwrap(), 100.0);
        assert_eq!(s.output, PathBuf::from("rabi.tsv"));
        assert_eq!(s.tolerances, Tolerances::default());
    }

    #[test]
    fn quantum_drive_from_pi_pulse() {
        let s = parse(
            r#"
            [[scenario]]
            name = "q"
            model = "qrm"
            horizon = 50.0
            snapshot_times = [12.5, 3.3]
            rtol = 1e-8
            [scenario.params]
            alpha = 10.0
            omega_t_pi = 50.0
            n_qubits = 2
            "#,
            Overrides {
                atol: Some(1e-9),
                ..Overrides::default()
            },
        )
        .unwrap();
        let s = &s[0];
        assert!((s.params.coupling * 2.0 * 10.0 - PI / 50.0).abs() < 1e-15);
        assert_eq!(s.params.n_qubits, 2);
        assert!(s.times.contains(&3.3));
        assert_eq!(s.snapshot_times, vec![3.3, 12.5]);
        assert_eq!(s.tolerances, Tolerances::new(1e-8, 1e-9).unwrap());
    }

    #[test]
    fn missing_alpha_is_named() {
        let msg = config_error(
            r#"
            [[scenario]]
            name = "q"
            model = "qrm"
            horizon = 50.0
            params = { omega_t_pi = 50.0 }
            "#,
        );
        assert!(msg.contains("params.alpha"), "{msg}");
    }

    #[test]
    fn missing_horizon_reports_field_and_line() {
        let msg = config_error(
            "[[scenario]]\nname = \"x\"\nmodel = \"srm_rwa\"\nparams = { omega_t_pi = 5.0 }\n",
        );
        assert!(msg.contains("horizon"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn invariants_are_enforced() {
        let base = |extra: &str| {
            format!(
                "[[scenario]]\nname = \"x\"\nmodel = \"srm_exact\"\n{extra}\nparams = {{ omega_t_pi = 5.0 }}\n"
            )
        };
        assert!(config_error(&base("horizon = 0.0")).contains("horizon"));
        assert!(
            config_error(&base("horizon = 1.0\nsamples_per_pi_pulse = 3"))
                .contains("samples_per_pi_pulse")
        );
        assert!(
            config_error(&base("horizon = 1.0\nsnapshot_times = [0.5]")).contains("snapshot_times")
        );
        assert!(config_error(&base("horizon = 1.0\nrtol = -1.0")).contains("rtol"));
        assert!(config_error(&base("horizon = 1.0\nbogus = 1")).contains("bogus"));
    }

    #[test]
    fn lossy_parameters_need_a_master_model() {
        let msg = config_error(
            r#"
            [[scenario]]
            name = "x"
            model = "qrm"
            horizon = 1.0
            params = { alpha = 2.0, omega_t_pi = 5.0, gamma = 0.1 }
            "#,
        );
        assert!(msg.contains("params.gamma"), "{msg}");
    }

    #[test]
    fn zero_drive_needs_an_interval() {
        let text = |extra: &str| {
            format!(
                "[[scenario]]\nname = \"relax\"\nmodel = \"srm_master\"\nhorizon = 10.0\ninitial = \"excited\"\n{extra}\nparams = {{ rabi_frequency = 0.0, gamma = 0.1 }}\n"
            )
        };
        assert!(config_error(&text("")).contains("sample_interval"));
        let s = parse(&text("sample_interval = 0.5"), Overrides::default()).unwrap();
        assert_eq!(s[0].times.len(), 21);
        assert_eq!(s[0].initial, InitialQubit::Excited);
    }

    #[test]
    fn duplicate_outputs_rejected() {
        let one = "[[scenario]]\nname = \"a\"\nmodel = \"srm_rwa\"\nhorizon = 1.0\noutput = \"x.tsv\"\nparams = { omega_t_pi = 5.0 }\n";
        let msg = config_error(&format!("{one}{}", one.replace("\"a\"", "\"b\"")));
        assert!(msg.contains("output"), "{msg}");
    }
}
