//! `qtr` - command-line front end for the planar ion-crystal rotor
//! simulator.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qtr_core::Seed;

use commands::{Emit, Format};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "qtr",
    version,
    about = "Trapped-ion rotor simulator: crystal modes, tunneling doublets, cyclic quantum walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file (INI-style; see configs/ for examples).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/SVG files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Equilibrium seed (chain, ring-up, ring-down) where applicable.
    #[arg(long, default_value = "ring-up")]
    seed: Seed,
}

#[derive(Subcommand)]
enum Command {
    /// Collective-mode frequencies over an anisotropy scan.
    Modes(Common),
    /// Effective rotational potential over one reduced period.
    Potential {
        #[command(flatten)]
        common: Common,
        /// Overlay the tunneling doublet's localized states.
        #[arg(long)]
        with_wavefunctions: bool,
    },
    /// Tunneling doublet and rate for the configured trap.
    Tunnel(Common),
    /// Continuous-time cyclic quantum walk site distributions.
    Walk(Common),
    /// Two-level interference traces over a set of AB phases.
    Interfere(Common),
    /// Adiabaticity of a linear anisotropy ramp.
    Adiabat(Common),
}

fn load(common: &Common) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))?;
    let cfg = RunConfig::parse(&text)?;
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<()> {
    // QTR_THREADS caps worker parallelism; all current kernels are
    // single-threaded, so any valid value is honored trivially.
    if let Ok(v) = std::env::var("QTR_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            config::ConfigError(format!("QTR_THREADS must be a positive integer, got '{v}'"))
        })?;
        if n == 0 {
            return Err(config::ConfigError("QTR_THREADS must be >= 1".into()).into());
        }
    }
    match &cli.command {
        Command::Modes(c) => {
            let cfg = load(c)?;
            commands::cmd_modes(
                &cfg,
                &c.seed,
                &Emit {
                    out_dir: &c.out,
                    format: c.format,
                },
            )
        }
        Command::Potential {
            common: c,
            with_wavefunctions,
        } => {
            let cfg = load(c)?;
            commands::cmd_potential(
                &cfg,
                &c.seed,
                *with_wavefunctions,
                &Emit {
                    out_dir: &c.out,
                    format: c.format,
                },
            )
        }
        Command::Tunnel(c) => {
            let cfg = load(c)?;
            commands::cmd_tunnel(
                &cfg,
                &Emit {
                    out_dir: &c.out,
                    format: c.format,
                },
            )
        }
        Command::Walk(c) => {
            let cfg = load(c)?;
            commands::cmd_walk(
                &cfg,
                &Emit {
                    out_dir: &c.out,
                    format: c.format,
                },
            )
        }
        Command::Interfere(c) => {
            let cfg = load(c)?;
            commands::cmd_interfere(
                &cfg,
                &Emit {
                    out_dir: &c.out,
                    format: c.format,
                },
            )
        }
        Command::Adiabat(c) => {
            let cfg = load(c)?;
            commands::cmd_adiabat(
                &cfg,
                &c.seed,
                &Emit {
                    out_dir: &c.out,
                    format: c.format,
                },
            )
        }
    }
}

/// 0 on success, 2 for configuration/usage problems, 1 for numerical
/// failures and I/O errors.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<config::ConfigError>() {
        return 2;
    }
    if let Some(core) = err.downcast_ref::<qtr_core::Error>() {
        return match core {
            qtr_core::Error::InvalidInput(_) | qtr_core::Error::RampCrossesIsotropy { .. } => 2,
            _ => 1,
        };
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
