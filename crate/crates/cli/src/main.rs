use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quermass_cli::{analyze, flow_run, load_config, parse_resolution, verify_table, CliError, Mode, Overrides};

/// Curvature flows and quermassintegral diagnostics for radial graphs over
/// S^1 and S^2.
#[derive(Parser)]
#[command(name = "quermass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file (alternative to the positional argument).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG plot of the norm columns.
    #[arg(long, global = true)]
    svg: bool,
    /// Grid resolution as LAT,LON.
    #[arg(long, global = true, value_parser = parse_resolution)]
    resolution: Option<(usize, usize)>,
    /// Seed for random shapes.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a flow.
    Flow {
        #[command(subcommand)]
        action: FlowAction,
    },
    /// Report quermassintegrals, deficits and asymmetry of a shape.
    Analyze {
        #[arg(value_name = "CONFIG")]
        file: Option<PathBuf>,
    },
    /// Run the built-in invariant suites.
    Verify { suite: Option<String> },
}

#[derive(Subcommand)]
enum FlowAction {
    Run {
        #[arg(value_name = "CONFIG")]
        file: Option<PathBuf>,
    },
}

fn config_path(positional: Option<PathBuf>, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
    positional.or(flag).ok_or_else(|| CliError::Invalid("a config file is required".into()))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let ov = Overrides { out: cli.out, svg: cli.svg, resolution: cli.resolution, seed: cli.seed };
    match cli.command {
        Command::Flow { action: FlowAction::Run { file } } => {
            let cfg = load_config(&config_path(file, cli.config)?, Mode::Flow, &ov)?;
            let csv = flow_run(&cfg)?;
            println!("{}", csv.display());
        }
        Command::Analyze { file } => {
            let cfg = load_config(&config_path(file, cli.config)?, Mode::Analyze, &ov)?;
            println!("{}", analyze(&cfg)?);
        }
        Command::Verify { suite } => {
            let (table, failed) = verify_table(suite.as_deref())?;
            print!("{table}");
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
