//! `cmc-moduli`: classify, integrate, immerse and verify CMC hypersurfaces
//! with two principal curvatures from the command line.

mod commands;
mod config;
mod exit;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Output;
use crate::config::{Flags, RunConfig};
use crate::exit::{CliError, INVALID};

#[derive(Debug, Parser)]
#[command(name = "cmc-moduli", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Admissibility, solution types, thresholds and |Φ| bounds as JSON
    Classify(Flags),
    /// Profile curve as CSV
    Profile(Flags),
    /// Points and unit normals of the immersion as CSV
    Immerse(Flags),
    /// Finite-difference check of the principal curvatures as JSON
    Verify(Flags),
    /// Admissibility over an (H, C) grid as CSV
    Sweep(Flags),
}

/// `dir/stem_suffix.ext` next to `path`.
fn side_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn emit(out: &Output, target: Option<&Path>) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::invalid(format!("cannot write output: {e}"));
    match target {
        Some(path) => {
            fs::write(path, &out.body).map_err(io_err)?;
            for (suffix, text) in &out.side {
                fs::write(side_path(path, suffix), text).map_err(io_err)?;
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(out.body.as_bytes()).map_err(io_err)?;
            for (suffix, text) in &out.side {
                writeln!(stdout, "# {suffix}").map_err(io_err)?;
                stdout.write_all(text.as_bytes()).map_err(io_err)?;
            }
            stdout.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CMC_MODULI_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        CliError::invalid(format!(
            "CMC_MODULI_THREADS must be a non-negative integer, got {raw:?}"
        ))
    })?;
    // zero lets rayon pick
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::invalid(e.to_string()))
}

type Handler = fn(&RunConfig) -> Result<Output, CliError>;

fn run(cli: Cli) -> Result<u8, CliError> {
    init_threads()?;
    let (flags, cmd): (&Flags, Handler) = match &cli.command {
        Command::Classify(f) => (f, commands::cmd_classify),
        Command::Profile(f) => (f, commands::cmd_profile),
        Command::Immerse(f) => (f, commands::cmd_immerse),
        Command::Verify(f) => (f, commands::cmd_verify),
        Command::Sweep(f) => (f, commands::cmd_sweep),
    };
    let cfg = RunConfig::load(flags)?;
    let out = cmd(&cfg)?;
    emit(&out, cfg.out.as_deref())?;
    Ok(out.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("cmc-moduli: {e}");
            ExitCode::from(e.code)
        }
    }
}
