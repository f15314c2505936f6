//! Bundled scenario files mirroring the figures, scaled to desktop runtimes
//! where noted.

use crate::config::{self, Overrides, Scenario};
use crate::error::CliError;

pub struct Preset {
    pub name: &'static str,
    pub figure: &'static str,
    pub description: &'static str,
    pub config: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1a",
        figure: "Fig. 1a/1d",
        description: "semiclassical tiers, omega T_pi = 500, t <= 2000",
        config: include_str!("../presets/fig1a.toml"),
    },
    Preset {
        name: "fig1b",
        figure: "Fig. 1b/1e",
        description: "semiclassical tiers, omega T_pi = 50, t <= 2000",
        config: include_str!("../presets/fig1b.toml"),
    },
    Preset {
        name: "fig1c",
        figure: "Fig. 1c/1f",
        description: "semiclassical tiers, omega T_pi = 15, t <= 2000",
        config: include_str!("../presets/fig1c.toml"),
    },
    Preset {
        name: "fig2a-desk",
        figure: "Fig. 2a",
        description: "QRM vs exact SRM for t <= 5 T_pi at the true alpha^2 = 5000 (no substitution, short horizon)",
        config: include_str!("../presets/fig2a-desk.toml"),
    },
    Preset {
        name: "fig3-desk",
        figure: "Fig. 3",
        description: "P_e collapse, alpha^2 5K-40K replaced by 100 and 400 at g alpha = 0.01 pi",
        config: include_str!("../presets/fig3-desk.toml"),
    },
    Preset {
        name: "fig4-desk",
        figure: "Fig. 4",
        description: "photon backreaction for 1-3 qubits, alpha^2 5K-20K replaced by 400",
        config: include_str!("../presets/fig4-desk.toml"),
    },
    Preset {
        name: "fig5-desk",
        figure: "Fig. 5",
        description: "entropies and coherent-state survival, alpha^2 5K-40K replaced by 100",
        config: include_str!("../presets/fig5-desk.toml"),
    },
    Preset {
        name: "fig6-desk",
        figure: "Fig. 6",
        description: "photon-distribution snapshots at multiples of T_pi, alpha^2 5K replaced by 100",
        config: include_str!("../presets/fig6-desk.toml"),
    },
    Preset {
        name: "fig9-unitary",
        figure: "Fig. 9",
        description: "lossless revivals, alpha^2 = 50, omega T_pi = 50, t <= 2e4",
        config: include_str!("../presets/fig9-unitary.toml"),
    },
    Preset {
        name: "fig9-dissipative",
        figure: "Fig. 9",
        description: "master equation at alpha^2 = 50 with two reservoir settings plus SRM envelopes, t <= 2e4 (long)",
        config: include_str!("../presets/fig9-dissipative.toml"),
    },
    Preset {
        name: "srm-relaxation",
        figure: "-",
        description: "undriven qubit relaxing into a reservoir with n_th = 0.05",
        config: include_str!("../presets/srm-relaxation.toml"),
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn scenarios(&self, overrides: Overrides) -> Result<Vec<Scenario>, CliError> {
        config::parse(self.config, overrides).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("preset {}: {msg}", self.name)),
            other => other,
        })
    }
}

pub fn listing() -> String {
    let width = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    PRESETS
        .iter()
        .map(|p| format!("{:width$}  {:10}  {}\n", p.name, p.figure, p.description))
        .collect()
}
