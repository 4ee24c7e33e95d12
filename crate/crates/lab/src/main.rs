use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use varmult_lab::criteria::selftest_criteria;
use varmult_lab::experiments::list_experiments;
use varmult_lab::{init_threads, run_path, CHECKS_FAILED_EXIT};

/// Numerical experiments on vector-valued Fourier multipliers of bounded
/// variation.
#[derive(Parser)]
#[command(name = "varmult-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// List registered experiments.
    List,
    /// Run acceptance criteria 1 to 8.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match cli.command {
        Command::List => {
            for (name, description) in list_experiments() {
                println!("{name:<28}{description}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config } => match run_path(&config) {
            Ok((outcome, artifacts)) => {
                for note in &outcome.notes {
                    println!("{note}");
                }
                for c in &outcome.checks {
                    println!(
                        "{} {}: {}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                }
                println!("wrote {}", artifacts.csv.display());
                println!("wrote {}", artifacts.summary.display());
                if outcome.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(CHECKS_FAILED_EXIT as u8)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Selftest => {
            let mut failed = 0;
            for criterion in selftest_criteria() {
                let report = criterion.run();
                println!("{report}");
                failed += !report.passed as usize;
            }
            if failed == 0 {
                println!("selftest: all criteria passed");
                ExitCode::SUCCESS
            } else {
                println!("selftest: {failed} criteria failed");
                ExitCode::from(CHECKS_FAILED_EXIT as u8)
            }
        }
    }
}
