use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use opcqkd_cli::{
    check_output, fresh_seed, run_session_command, run_sweep_command, run_verify, summary_table, SweepAxis,
    UsageError, VerifyArgs, VerifyMode,
};

#[derive(Parser)]
#[command(name = "opcqkd", version, about = "Autocompensating HD-QKD simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that random channels cancel after a conjugated round trip.
    Verify {
        /// Number of modes 2N (even).
        #[arg(long)]
        dim: usize,
        /// Segments per channel.
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "symmetric")]
        mode: VerifyMode,
        #[arg(long, default_value_t = 1.0)]
        kappa_scale: f64,
        /// Also write a JSON manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a protocol session from a JSON config.
    Session {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeat a session over values of one parameter; writes CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: SweepAxis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Verify { dim, q, trials, seed, mode, kappa_scale, out } => {
            let args = VerifyArgs {
                dim,
                q,
                trials,
                seed: seed.unwrap_or_else(fresh_seed),
                mode,
                kappa_scale,
            };
            if let Some(p) = &out {
                check_output(p)?;
            }
            let report = run_verify(&args, out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Session { config, out } => {
            check_output(&out)?;
            let manifest = run_session_command(&config, &out)?;
            println!("seed {}", manifest.seed);
            print!("{}", summary_table(&manifest.results));
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, axis, values, out } => {
            check_output(&out)?;
            let rows = run_sweep_command(&config, axis, &values, &out)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
