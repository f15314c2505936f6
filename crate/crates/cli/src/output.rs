//! Tab-separated tables with a `#` metadata block, plus a TOML run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rabi_core::fock::DEFAULT_CUTOFF;
use rabi_core::qrm::LEAKAGE_LIMIT;
use rabi_core::{ModelParams, Tolerances};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{InitialQubit, Model, Scenario};
use crate::error::CliError;
use crate::runner::{Diagnostics, Outcome, Snapshot};

/// Everything that determines the numbers in the output files.
#[derive(Debug, Serialize)]
pub struct RunInputs {
    pub name: String,
    pub model: Model,
    pub horizon: f64,
    pub samples_per_pi_pulse: usize,
    pub sample_interval: f64,
    pub sample_count: usize,
    pub snapshot_times: Vec<f64>,
    pub initial: InitialQubit,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage_limit: Option<f64>,
    pub params: ModelParams,
}

impl RunInputs {
    pub fn new(s: &Scenario) -> Self {
        let quantum = s.model.is_quantum();
        Self {
            name: s.name.clone(),
            model: s.model,
            horizon: s.horizon,
            samples_per_pi_pulse: s.samples_per_pi_pulse,
            sample_interval: s.sample_interval,
            sample_count: s.times.len(),
            snapshot_times: s.snapshot_times.clone(),
            initial: s.initial,
            tolerances: s.tolerances,
            window: s.window.map(|w| [w.n1, w.n2]),
            window_cutoff: (quantum && s.window.is_none()).then_some(DEFAULT_CUTOFF),
            leakage_limit: quantum.then_some(LEAKAGE_LIMIT),
            params: s.params,
        }
    }
}

#[derive(Debug, Serialize)]
struct OutputFile {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    generator: String,
    input_sha256: String,
    inputs: &'a RunInputs,
    diagnostics: &'a Diagnostics,
    outputs: Vec<OutputFile>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

fn metadata(out: &mut String, s: &Scenario, d: &Diagnostics) {
    let p = &s.params;
    let _ = writeln!(out, "# scenario: {}", s.name);
    let _ = writeln!(out, "# model: {}", s.model);
    let _ = writeln!(
        out,
        "# detuning: {}  rabi_frequency: {}  coupling: {}  alpha: {}  n_qubits: {}  counter_rotating: {}",
        p.detuning, p.rabi_frequency, p.coupling, p.alpha, p.n_qubits, p.counter_rotating
    );
    let _ = writeln!(
        out,
        "# gamma: {}  gamma_phi: {}  kappa: {}  n_th: {}  n_c: {}",
        p.gamma, p.gamma_phi, p.kappa, p.n_th, p.n_c
    );
    let _ = writeln!(
        out,
        "# rtol: {:e}  atol: {:e}  initial: {}",
        s.tolerances.rtol,
        s.tolerances.atol,
        s.initial.name()
    );
    if let Some([n1, n2]) = d.window {
        let _ = writeln!(out, "# window: [{n1}, {n2}]");
    }
    let _ = writeln!(out, "# {}", d.stats);
}

fn table(s: &Scenario, o: &Outcome) -> String {
    let mut out = String::new();
    metadata(&mut out, s, &o.diagnostics);
    out.push_str(&o.columns.join("\t"));
    out.push('\n');
    for row in &o.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

fn snapshot_table(s: &Scenario, o: &Outcome, snap: &Snapshot) -> String {
    let mut out = String::new();
    metadata(&mut out, s, &o.diagnostics);
    let _ = writeln!(out, "# t: {}", snap.t);
    out.push_str("n\tp_n\tdelta_p_n\n");
    for ((n, p), d) in snap
        .window
        .photon_numbers()
        .zip(&snap.probabilities)
        .zip(&snap.delta)
    {
        let _ = writeln!(out, "{n}\t{p:e}\t{d:e}");
    }
    out
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Writes the series, the snapshots and the manifest; returns the paths written.
pub fn write_outputs(dir: &Path, s: &Scenario, o: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    let inputs = RunInputs::new(s);
    let input_toml = toml::to_string(&inputs).expect("run inputs serialize");

    let mut files = vec![(s.output.clone(), table(s, o))];
    for snap in &o.snapshots {
        files.push((
            sibling(&s.output, &format!(".snapshot-t{}.tsv", snap.t)),
            snapshot_table(s, o, snap),
        ));
    }
    let mut outputs = Vec::with_capacity(files.len());
    let mut written = Vec::with_capacity(files.len() + 1);
    for (rel, text) in &files {
        let path = dir.join(rel);
        write_file(&path, text)?;
        outputs.push(OutputFile {
            path: rel.to_string_lossy().into_owned(),
            sha256: sha256_hex(text.as_bytes()),
        });
        written.push(path);
    }

    let manifest = Manifest {
        generator: format!("rabi {}", env!("CARGO_PKG_VERSION")),
        input_sha256: sha256_hex(input_toml.as_bytes()),
        inputs: &inputs,
        diagnostics: &o.diagnostics,
        outputs,
    };
    let path = dir.join(sibling(&s.output, ".manifest.toml"));
    write_file(
        &path,
        &toml::to_string(&manifest).expect("manifest serializes"),
    )?;
    written.push(path);
    Ok(written)
}
