use clap::{Parser, Subcommand};
use jump_spectra_cli::config::{self, Overrides, DEFAULT_CUTOFF, DEFAULT_THRESHOLDS};
use jump_spectra_cli::tasks::{self, ensure_dir};
use jump_spectra_cli::{verify, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectra of diffusions that jump back into the domain from its boundary.
#[derive(Parser)]
#[command(name = "jump-spectra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks listed in a config and write summary.json, CSVs and SVGs.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cutoff: Option<f64>,
    },
    /// Print the pass/fail matrix of the resolvent checks.
    Verify {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Matryoshka curves for the unit disk.
    Figure1 {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS)]
        thresholds: Vec<f64>,
        #[arg(long, default_value = "figure1")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: f64,
    },
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, out, seed, cutoff } => {
            let over = Overrides {
                output_dir: out,
                seed,
                cutoff,
            };
            let resolved = config::load(&config)?.resolve(&over)?;
            let summary = tasks::run(&resolved)?;
            let i = &summary.integrity;
            println!("{:<16} {:<13} {}", "integrity", i.status.as_str().to_uppercase(), i.value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| i.note.clone()));
            for t in &summary.tasks {
                println!("{:<16} {:<13} {}", t.task.name(), t.status.as_str().to_uppercase(), t.note);
            }
            println!("summary: {}", resolved.output_dir.join("summary.json").display());
            Ok(summary.exit_code)
        }
        Command::Verify { config, seed } => {
            let over = Overrides {
                seed,
                ..Overrides::default()
            };
            let resolved = config::load(&config)?.resolve(&over)?;
            let report = verify::verify(&resolved)?;
            print!("{}", report.matrix());
            Ok(report.exit_code())
        }
        Command::Figure1 { thresholds, out, cutoff } => {
            if thresholds.is_empty() || thresholds.iter().any(|t| !(*t >= 0.0)) {
                return Err(CliError::Config("thresholds must be nonnegative".into()));
            }
            ensure_dir(&out)?;
            let basis = tasks::figure1_basis(cutoff)?;
            let outcome = tasks::figure1(&basis, &thresholds, &out)?;
            println!("figure1 {} {}", outcome.status.as_str().to_uppercase(), outcome.note);
            for f in &outcome.files {
                println!("wrote {}", out.join(f).display());
            }
            Ok(outcome.status.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
