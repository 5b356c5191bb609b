use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gapinn::pde::ProblemKind;
use gapinn::train::Mode;
use gapinn_harness::config::init_text;
use gapinn_harness::export::{export, ExportKind};
use gapinn_harness::report::report;
use gapinn_harness::run::{run_experiment, RunOptions};
use gapinn_harness::{Failure, Outcome};

/// Train and compare physics-informed networks on the benchmark problems.
///
/// Reference datasets for burgers and schrodinger are looked up under
/// $GAPINN_DATA.
#[derive(Parser)]
#[command(name = "gapinn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the preset experiment config for a problem and mode.
    Init {
        /// burgers, poisson, helmholtz, schrodinger, hd_poisson or heat
        problem: String,
        /// pinn, pinn_pw, gapinn, gapinn_pw or dgm
        mode: String,
        /// Defaults to <problem>-<mode>.toml
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Replace an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Train every run of a config. Exits 2 on invalid input, 3 on divergence.
    Run {
        config: PathBuf,
        /// Use the built-in reference solvers when dataset files are missing.
        #[arg(long)]
        fallback_reference: bool,
        /// Start over instead of resuming earlier results.
        #[arg(long)]
        fresh: bool,
    },
    /// Tabulate epochs and test errors of a results directory.
    Report { dir: PathBuf },
    /// Write curves.csv or heatmap.csv into each run directory.
    Export {
        dir: PathBuf,
        kind: Kind,
        /// Record columns for curves.
        #[arg(long, value_delimiter = ',', default_value = "l_pinn")]
        columns: Vec<String>,
        /// Grid points per axis for heat maps.
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        /// Use the built-in reference solvers when dataset files are missing.
        #[arg(long)]
        fallback_reference: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Curves,
    Heatmap,
}

fn execute(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Init { problem, mode, output, force } => {
            let problem = ProblemKind::from_name(&problem)?;
            let mode = Mode::from_name(&mode)?;
            let path = output.unwrap_or_else(|| PathBuf::from(format!("{problem}-{mode}.toml")));
            if path.exists() && !force {
                return Err(Failure::Usage(format!("{} exists; pass --force to replace it", path.display())));
            }
            std::fs::write(&path, init_text(problem, mode)?)?;
            println!("wrote {}", path.display());
        }
        Command::Run { config, fallback_reference, fresh } => {
            let opts = RunOptions { fallback_reference, fresh };
            run_experiment(&config, &opts, &mut |line| println!("{line}"))?;
        }
        Command::Report { dir } => print!("{}", report(&dir)?),
        Command::Export { dir, kind, columns, resolution, fallback_reference } => {
            let kind = match kind {
                Kind::Curves => ExportKind::Curves { columns },
                Kind::Heatmap => ExportKind::Heatmap { resolution, fallback_reference },
            };
            for path in export(&dir, &kind)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
