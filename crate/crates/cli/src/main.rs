use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "mpmr", version, about = "Ultimatum game solvers for many proposers and many responders")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format. Defaults to json for single results and csv for tables.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write to this file instead of standard output.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,

    /// Significant digits for numbers, 1 to 17. Defaults to 12, or 17 for
    /// the sweep, asymptotic and replicator tables.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: Option<u8>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Responder ESS for fixed offers.
    Ess(commands::EssArgs),
    /// Symmetric subgame-perfect offer and payoffs.
    Spne(commands::SpneArgs),
    /// Symmetric offers over a grid of K and L.
    Sweep(commands::SweepArgs),
    /// Large-population limits over a range of proposer/responder ratios.
    Asymptotic(commands::AsymptoticArgs),
    /// Replicator trajectory or vector field of the three-type 2x2 system.
    Replicator(commands::ReplicatorArgs),
    /// Monte Carlo estimate of expected payoffs.
    Simulate(commands::SimulateArgs),
    /// Numerical checks of the equilibrium conditions.
    Verify(commands::VerifyArgs),
}

impl Command {
    fn is_figure_table(&self) -> bool {
        matches!(self, Command::Sweep(_) | Command::Asymptotic(_) | Command::Replicator(_))
    }
}

fn configure_threads() -> Result<(), commands::CliError> {
    let Ok(raw) = std::env::var("MPMR_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| commands::CliError::Input(format!("MPMR_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| commands::CliError::Input(e.to_string()))
}

fn run(cli: Cli) -> Result<(), commands::CliError> {
    configure_threads()?;
    let figure = cli.command.is_figure_table();
    let format = cli.output.format.unwrap_or(if figure { Format::Csv } else { Format::Json });
    let digits = cli.output.precision.map(usize::from).unwrap_or(if figure { 17 } else { 12 });

    let outcome = match &cli.command {
        Command::Ess(a) => commands::ess(a),
        Command::Spne(a) => commands::spne(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Asymptotic(a) => commands::asymptotic(a),
        Command::Replicator(a) => commands::replicator(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
    }?;
    let text = output::render(&outcome.report, format, digits);
    output::emit(&text, cli.output.output.as_deref())
        .map_err(|e| commands::CliError::Input(format!("cannot write output: {e}")))?;
    match outcome.failed_checks.is_empty() {
        true => Ok(()),
        false => Err(commands::CliError::Verification(outcome.failed_checks)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mpmr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
