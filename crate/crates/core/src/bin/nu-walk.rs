use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use nu_walk::scenarios::{parse_config, run_scenario, OutputFormat, ScenarioKind, ScenarioOutput};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Vacuum,
    Matter,
    Levels,
    Compare,
    MapExperiment,
}

impl Command {
    fn kind(self) -> ScenarioKind {
        match self {
            Command::Vacuum => ScenarioKind::Vacuum,
            Command::Matter => ScenarioKind::Matter,
            Command::Levels => ScenarioKind::Levels,
            Command::Compare => ScenarioKind::Compare,
            Command::MapExperiment => ScenarioKind::MapExperiment,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Neutrino oscillations on a multi-flavor quantum walk.
#[derive(Debug, Parser)]
#[command(name = "nu-walk", version)]
struct Cli {
    /// Scenario to run; must match the `scenario` field of the config.
    command: Command,
    /// JSON scenario config.
    #[arg(long)]
    config: PathBuf,
    /// Output file (defaults to `output.path`, then stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (defaults to `output.format`).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let bytes = match std::fs::read(&cli.config) {
        Ok(bytes) => bytes,
        Err(e) => return fail(format_args!("cannot read {}: {e}", cli.config.display())),
    };
    let config = match parse_config(&bytes) {
        Ok(config) => config,
        Err(e) => return fail(e),
    };
    if config.scenario != cli.command.kind() {
        return fail(format_args!(
            "invalid config value `scenario`: the config describes `{}`, not `{}`",
            config.scenario.name(),
            cli.command.kind().name()
        ));
    }
    let output = match run_scenario(&config) {
        Ok(output) => output,
        Err(e) => return fail(e),
    };
    let format = match cli.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        None => config.output.format,
    };
    let text = output.render(format);
    let target = cli
        .out
        .or_else(|| config.output.path.as_ref().map(PathBuf::from));
    match target {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                return fail(format_args!("cannot write {}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    if let ScenarioOutput::Comparison(report) = &output {
        if !report.passed() {
            eprintln!(
                "comparison failed: deviation {:e} exceeds {:e}",
                report.overall_deviation(),
                report.tolerance
            );
            return ExitCode::from(2);
        }
    }
    ExitCode::SUCCESS
}
