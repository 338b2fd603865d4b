use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mann_rates::cli::{exit_code, run_experiment, run_moduli_report, Overrides};

#[derive(Parser)]
#[command(name = "mann-rates", version, about = "Run and certify Mann iteration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for output files (overrides `output.dir`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for every sampled quantity (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance for validations and certificates.
    #[arg(long, global = true)]
    strict_tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate, certify rates and write trajectory/certificates/report files.
    Run { config: PathBuf },
    /// Write the sampled moduli report of the configured space.
    Moduli { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        out_dir: cli.out_dir,
        seed: cli.seed,
        strict_tolerance: cli.strict_tolerance,
    };
    let result = match &cli.command {
        Command::Run { config } => run_experiment(config, &overrides),
        Command::Moduli { config } => run_moduli_report(config, &overrides),
    };
    match &result {
        Err(e) => eprintln!("{e}"),
        Ok(outcomes) => {
            for o in outcomes {
                match o {
                    Ok(a) => print!("{}", a.summary),
                    Err(e) => eprintln!("{e}"),
                }
            }
        }
    }
    ExitCode::from(exit_code(&result) as u8)
}
