use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] rabi_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use rabi_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(E::WindowOverflow { .. }) => 4,
            CliError::Solver(E::InvalidParameter(_) | E::DegenerateSpectrum) => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    /// Extra lines printed after the error message.
    pub fn details(&self) -> Vec<String> {
        match self {
            CliError::Solver(rabi_core::Error::WindowOverflow { suggested, .. }) => vec![format!(
                "suggested window: window = [{}, {}]",
                suggested.n1, suggested.n2
            )],
            CliError::Solver(e) => match e.step_stats() {
                Some(stats) => vec![
                    format!("accepted steps: {}", stats.accepted_steps),
                    format!("rejected steps: {}", stats.rejected_steps),
                    format!("rhs evaluations: {}", stats.rhs_evaluations),
                    format!("max error estimate: {:e}", stats.max_error_estimate),
                ],
                None => Vec::new(),
            },
            _ => Vec::new(),
        }
    }
}
