use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pvtrack::cli::{self, CliResult};
use pvtrack::metrics::DEFAULT_HARMONICS;

#[derive(Parser)]
#[command(name = "pvtrack", version, about = "PV panel simulator and MPPT benchmark")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one controller on a scenario and write its trace CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides `[controller] name` from the scenario.
        #[arg(long)]
        controller: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several controllers on one scenario and rank them.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated controller names.
        #[arg(long, value_delimiter = ',', required = true)]
        controllers: Vec<String>,
        /// Directory receiving one trace CSV per controller.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the true maximum power point for an irradiance and temperature.
    Mpp {
        /// Scenario providing panel and bus; the reference panel otherwise.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        t: f64,
    },
    /// Total harmonic distortion of a one-column sample CSV.
    Thd {
        csv: PathBuf,
        #[arg(long)]
        fs: f64,
        #[arg(long)]
        f0: f64,
        #[arg(long, default_value_t = DEFAULT_HARMONICS)]
        harmonics: usize,
    },
}

fn run(args: Args) -> CliResult<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match args.command {
        Command::Simulate {
            scenario,
            controller,
            out: path,
        } => cli::cmd_simulate(&scenario, controller.as_deref(), &path, &mut out).map(drop),
        Command::Compare {
            scenario,
            controllers,
            out: dir,
        } => cli::cmd_compare(&scenario, &controllers, &dir, &mut out).map(drop),
        Command::Mpp { scenario, g, t } => cli::cmd_mpp(scenario.as_deref(), g, t, &mut out).map(drop),
        Command::Thd { csv, fs, f0, harmonics } => cli::cmd_thd(&csv, fs, f0, harmonics, &mut out).map(drop),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
