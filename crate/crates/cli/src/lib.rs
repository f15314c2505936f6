//! Scenario runner for the `rabi` command-line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub use config::{Overrides, Scenario};
pub use error::CliError;

/// Environment variable that relocates the default output directory.
pub const OUT_DIR_ENV: &str = "RABI_OUT_DIR";

/// `--out` wins over the environment, which wins over the working directory.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub struct Job {
    pub dir: PathBuf,
    pub scenario: Scenario,
}

pub type JobResult = Result<Vec<PathBuf>, CliError>;

/// Runs every job on up to `jobs` threads; results come back in job order.
pub fn run_jobs(list: &[Job], jobs: usize) -> Vec<JobResult> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<JobResult>>> =
        Mutex::new((0..list.len()).map(|_| None).collect());
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(job) = list.get(i) else { break };
        let r = run_one(&job.dir, &job.scenario);
        results
            .lock()
            .expect("no worker panics while holding the lock")[i] = Some(r);
    };
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, list.len().max(1)) {
            scope.spawn(worker);
        }
    });
    results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

pub fn run_one(dir: &Path, s: &Scenario) -> Result<Vec<PathBuf>, CliError> {
    let outcome = runner::run(s)?;
    output::write_outputs(dir, s, &outcome)
}
