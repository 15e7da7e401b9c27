//! Command-line driver: segmentation, meshing, leak detection, forward
//! solves, analytic references, metric sweeps, flux visualization and
//! transfer matrices.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "dgeeg", version, about = "EEG forward simulation with CG and DG finite elements on hexahedral sphere models")]
pub struct Cli {
    /// TOML run configuration (must contain a [units] table).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set solver.tolerance=1e-10`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Root for relative output directories.
    #[arg(long, env = "DGEEG_OUTPUT_ROOT", global = true)]
    pub output_root: Option<PathBuf>,
    /// Reproducible single-threaded mode for regression runs.
    #[arg(long, global = true)]
    pub golden: bool,
    /// Exit successfully even if some dipoles failed.
    #[arg(long, global = true)]
    pub allow_partial: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Voxelize the concentric-sphere model and write a SEGv1 file.
    Genseg,
    /// Build the hexahedral mesh and write it as VTK.
    Mesh {
        /// Mesh this SEGv1 file instead of generating the segmentation.
        #[arg(long)]
        seg: Option<PathBuf>,
    },
    /// Count corner points shared by skin and CSF/brain voxels.
    Leaks {
        #[arg(long)]
        seg: Option<PathBuf>,
    },
    /// Solve for one dipole and write the skin potentials.
    Forward,
    /// Write the layered-sphere reference potential at the skin points.
    Reference,
    /// RDM/lnMAG sweep over dipoles, schemes and models.
    Sweep,
    /// Current densities of both schemes and their local differences.
    Fluxvis,
    /// Transfer matrix for sensors on the skin surface.
    Transfer,
}

/// Whether every requested output was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    Complete,
    Partial,
}

pub fn run(cli: &Cli) -> anyhow::Result<Completion> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let out = cfg.output_dir(cli.output_root.as_deref());
    let ctx = commands::Context { cfg, out, golden: cli.golden };
    if cli.golden {
        log::info!("golden mode: single-threaded, fixed summation order");
    }
    match &cli.command {
        Command::Genseg => commands::genseg(&ctx),
        Command::Mesh { seg } => commands::mesh(&ctx, seg.as_deref()),
        Command::Leaks { seg } => commands::leaks(&ctx, seg.as_deref()),
        Command::Forward => commands::forward(&ctx),
        Command::Reference => commands::reference(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Fluxvis => commands::fluxvis(&ctx),
        Command::Transfer => commands::transfer(&ctx),
    }
}
