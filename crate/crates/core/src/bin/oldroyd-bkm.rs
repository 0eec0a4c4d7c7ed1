use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use oldroyd_bkm::checks;
use oldroyd_bkm::config::RunConfig;
use oldroyd_bkm::curl_system::{self, SurveyReport};
use oldroyd_bkm::monitor;
use oldroyd_bkm::run::{self, RunSummary};
use oldroyd_bkm::spectral::Grid;
use oldroyd_bkm::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "oldroyd-bkm", version, about = "Ideal viscoelastic flow on the periodic box with blowup-criterion monitors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in invariant suite.
    Check,
    /// Survey the logarithmic gradient inequality over random solenoidal fields.
    KatoSurvey {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        ensemble: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Survey the commutator estimate over random scalar pairs.
    CommutatorSurvey {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        ensemble: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Continue a run from a checkpoint.
    Resume {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<RunConfig, ExitCode> {
    RunConfig::load(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })
}

fn finish_run(result: oldroyd_bkm::Result<RunSummary>) -> ExitCode {
    match result {
        Ok(summary) => {
            print!("{}", summary.to_key_value());
            if let Some(d) = &summary.detail {
                eprintln!("halted: {d}");
            }
            ExitCode::from(summary.halt.exit_code() as u8)
        }
        Err(e @ (Error::InvalidGrid(_) | Error::GridMismatch(..) | Error::InvalidArgument(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn survey(result: oldroyd_bkm::Result<SurveyReport>) -> ExitCode {
    match result {
        Ok(r) => {
            print!("{}", r.to_key_value());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn grid(n: usize) -> Result<Grid, ExitCode> {
    Grid::new(n).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn check() -> ExitCode {
    let start = Instant::now();
    let result = checks::run_check_suite(|o| println!("{o}"));
    match result {
        Ok(outcomes) => {
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!(
                "{} of {} criteria passed in {:.1} s",
                outcomes.len() - failed,
                outcomes.len(),
                start.elapsed().as_secs_f64()
            );
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match load_config(&config) {
            Ok(c) => finish_run(run::run(c)),
            Err(code) => code,
        },
        Command::Resume { checkpoint, config } => match load_config(&config) {
            Ok(c) => finish_run(run::resume(&checkpoint, c)),
            Err(code) => code,
        },
        Command::Check => check(),
        Command::KatoSurvey { n, ensemble, seed } => match grid(n) {
            Ok(g) => survey(monitor::kato_survey(ensemble, seed, &g)),
            Err(code) => code,
        },
        Command::CommutatorSurvey { n, ensemble, seed } => match grid(n) {
            Ok(g) => survey(curl_system::moser_ratio_survey(ensemble, seed, &g)),
            Err(code) => code,
        },
    }
}
