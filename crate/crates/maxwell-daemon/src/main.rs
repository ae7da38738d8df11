use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use maxwell_daemon::{presets, run_text, RunError, Subcommand};

#[derive(Parser)]
#[command(name = "maxwell-daemon", version, about = "Momentum-selective daemon simulations")]
enum Cli {
    /// Lattice evolution: entropy, lateral splits, <V> and density carpet.
    LatticeRun(RunArgs),
    /// Container Green's function on a grid, plus its pole table.
    Greens(RunArgs),
    /// Classical phase-space ensemble with the momentum-selective wall.
    Classical(RunArgs),
    /// Permittivity profiles that emulate the daemon.
    Epsilon(RunArgs),
    /// Bilayer cavity modes and field reconstruction.
    Em(RunArgs),
    /// List the shipped presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Name of a shipped preset (see `presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(sub: Subcommand, args: &RunArgs) -> Result<(), RunError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(RunError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Config(e.to_string()))?;
    }
    let (text, origin) = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
            (text, path.display().to_string())
        }
        (None, Some(name)) => {
            let p = presets::find(name).ok_or_else(|| RunError::Config(format!("unknown preset '{name}'")))?;
            if p.subcommand != sub {
                return Err(RunError::Config(format!(
                    "preset '{name}' belongs to `{}`, not `{}`",
                    p.subcommand.name(),
                    sub.name()
                )));
            }
            (p.text.to_string(), format!("preset {name}"))
        }
        (None, None) => return Err(RunError::Config("need --config or --preset".into())),
    };
    let report = run_text(sub, &text, &origin, &args.out)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = std::io::stdout().lock();
    for line in &report.summary {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "wrote {} files to {}", report.manifest.outputs.len() + 1, args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let (sub, args) = match Cli::parse() {
        Cli::LatticeRun(a) => (Subcommand::LatticeRun, a),
        Cli::Greens(a) => (Subcommand::Greens, a),
        Cli::Classical(a) => (Subcommand::Classical, a),
        Cli::Epsilon(a) => (Subcommand::Epsilon, a),
        Cli::Em(a) => (Subcommand::Em, a),
        Cli::Presets => {
            let mut out = std::io::stdout().lock();
            for p in presets::PRESETS {
                // A closed pipe (`| head`) is not an error.
                if writeln!(out, "{:<12} {}", p.subcommand.name(), p.name).is_err() {
                    break;
                }
            }
            return ExitCode::SUCCESS;
        }
    };
    match execute(sub, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
