//! `squeezeqm` command-line front end.
//!
//! Exit codes: 0 success, 1 i/o, 2 config, 3 geometry, 4 solver, 5 verify.

mod commands;
mod config;
mod error;
mod output;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::config::JobConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Curvature fields and tube-validity bound on the grid.
    Geometry,
    /// Lowest eigenpairs of the surface operator.
    Spectrum2d,
    /// Lowest eigenpairs of the thin-tube operator.
    Spectrum3d,
    /// Tube spectra minus transverse energy against the surface spectrum, per epsilon.
    Squeeze,
    /// Property battery over the configured surface.
    Verify,
    /// List presets and their parameter schemas.
    Surfaces,
}

#[derive(Debug, Parser)]
#[command(name = "squeezeqm", version, about = "Effective quantum mechanics on surfaces in E3")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON job file; see docs/job.schema.json.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the assembled operator as MatrixMarket plus a JSON sidecar.
    #[arg(long)]
    dump_matrix: bool,
}

fn run(args: &Args) -> Result<(), CliError> {
    if args.command == Command::Surfaces {
        let listing = commands::surfaces();
        if let Some(dir) = &args.out {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            output::write_json(dir, "surfaces.json", &listing)?;
        }
        println!("{}", serde_json::to_string_pretty(&listing).expect("json"));
        return Ok(());
    }
    let path = args.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = JobConfig::load(path)?;
    let out = args.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    match args.command {
        Command::Geometry => commands::geometry(&cfg, &out),
        Command::Spectrum2d => commands::spectrum2d(&cfg, &out, args.dump_matrix),
        Command::Spectrum3d => commands::spectrum3d(&cfg, &out, args.dump_matrix),
        Command::Squeeze => commands::squeeze(&cfg, &out, args.dump_matrix),
        Command::Verify => verify::run(&cfg, &out),
        Command::Surfaces => unreachable!(),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("squeezeqm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
