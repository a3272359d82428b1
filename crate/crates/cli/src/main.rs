use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use securefn::commands::{self, OsrbOptions, RateOptions, Scheme, SimulateOptions};
use securefn::{parse_instance, CliResult, ExitStatus};
use securefn_core::rateopt::Mode;

#[derive(Debug, Parser)]
#[command(name = "securefn", version, about = "Secure computability, optimal rates and protocol simulation for two-party function computation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RateMode {
    /// with privacy
    Rs,
    /// without privacy
    Rns,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    ProtocolB,
    SwW,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide secure computability and report the exact rate.
    Characterize { file: PathBuf },
    /// Minimize the communication rate over auxiliary variables.
    Rate {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: RateMode,
        #[arg(long)]
        u_card: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Run the one-round protocol.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        transcript_out: Option<PathBuf>,
        /// Reference y symbol; defaults to the first.
        #[arg(long)]
        agreed_y1: Option<String>,
    },
    /// Simulate random binning over a grid of rates and blocklengths.
    Osrb {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        rate_f: Option<f64>,
        #[arg(long)]
        rate_m: Option<f64>,
        /// Cells as rate_f:rate_m, comma separated.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "protocol-b")]
        scheme: SchemeArg,
    },
}

fn run(cli: Cli, argv: Vec<String>) -> CliResult<commands::Outcome> {
    match cli.command {
        Command::Characterize { file } => commands::characterize(&parse_instance(&file)?, argv),
        Command::Rate {
            file,
            mode,
            u_card,
            restarts,
            seed,
            max_iters,
        } => {
            let opts = RateOptions {
                mode: match mode {
                    RateMode::Rs => Mode::WithPrivacy,
                    RateMode::Rns => Mode::NoPrivacy,
                },
                u_card,
                restarts,
                seed,
                max_iters,
            };
            commands::rate(&parse_instance(&file)?, &opts, argv)
        }
        Command::Simulate {
            file,
            rounds,
            seed,
            transcript_out,
            agreed_y1,
        } => {
            let opts = SimulateOptions {
                rounds,
                seed,
                transcript_out,
                agreed_y1,
            };
            commands::simulate(&parse_instance(&file)?, &opts, argv)
        }
        Command::Osrb {
            file,
            n_list,
            rate_f,
            rate_m,
            grid,
            trials,
            seed,
            out,
            scheme,
        } => {
            let opts = OsrbOptions {
                n_list,
                rate_f,
                rate_m,
                grid,
                trials,
                seed,
                out,
                scheme: match scheme {
                    SchemeArg::ProtocolB => Scheme::ProtocolB,
                    SchemeArg::SwW => Scheme::SwW,
                },
            };
            commands::osrb(&parse_instance(&file)?, &opts, argv)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(outcome) => {
            println!("{}", outcome.report.to_json());
            if outcome.status != ExitStatus::Success {
                eprintln!("error: no feasible point within the search budget");
            }
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status.code() as u8)
        }
    }
}
