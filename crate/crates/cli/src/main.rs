use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rabi_cli::{config, output_dir, presets, run_jobs, CliError, Job, Overrides};

#[derive(Parser)]
#[command(
    name = "rabi",
    version,
    about = "Semiclassical and quantum Rabi model simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Relative tolerance for every solver, overriding the scenario files.
    #[arg(long, global = true)]
    rtol: Option<f64>,

    /// Absolute tolerance for every solver, overriding the scenario files.
    #[arg(long, global = true)]
    atol: Option<f64>,

    /// Number of scenarios integrated concurrently.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Output directory (default: $RABI_OUT_DIR, then the working directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a TOML file.
    Run { config: PathBuf },
    /// Run bundled presets; each writes into its own subdirectory.
    Preset {
        #[arg(required = true)]
        names: Vec<String>,
    },
    /// List the bundled presets.
    ListPresets,
}

fn report(e: &CliError) -> u8 {
    eprintln!("error: {e}");
    for line in e.details() {
        eprintln!("  {line}");
    }
    e.exit_code()
}

fn collect_jobs(cli: &Cli) -> Result<Vec<Job>, CliError> {
    let overrides = Overrides {
        rtol: cli.rtol,
        atol: cli.atol,
    };
    let dir = output_dir(cli.out.clone());
    match &cli.command {
        Command::Run { config } => Ok(config::load(config, overrides)?
            .into_iter()
            .map(|scenario| Job {
                dir: dir.clone(),
                scenario,
            })
            .collect()),
        Command::Preset { names } => {
            let mut jobs = Vec::new();
            for name in names {
                let preset = presets::find(name).ok_or_else(|| {
                    CliError::Config(format!("unknown preset `{name}`; see `rabi list-presets`"))
                })?;
                for scenario in preset.scenarios(overrides)? {
                    jobs.push(Job {
                        dir: dir.join(preset.name),
                        scenario,
                    });
                }
            }
            Ok(jobs)
        }
        Command::ListPresets => Ok(Vec::new()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::ListPresets = cli.command {
        print!("{}", presets::listing());
        return ExitCode::SUCCESS;
    }
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    let jobs = match collect_jobs(&cli) {
        Ok(jobs) => jobs,
        Err(e) => return ExitCode::from(report(&e)),
    };
    let mut status = 0;
    for (job, result) in jobs.iter().zip(run_jobs(&jobs, cli.jobs)) {
        match result {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
            }
            Err(e) => {
                eprintln!("scenario `{}` failed", job.scenario.name);
                let code = report(&e);
                if status == 0 {
                    status = code;
                }
            }
        }
    }
    ExitCode::from(status)
}
