use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use poisson_averaging_cli::config::EpsilonList;
use poisson_averaging_cli::{
    document_to_json, load_config, run_analyze, run_sweep, scenario_catalogue,
    scenario_listing_text, sweep_to_csv, CliError, Document,
};

#[derive(Parser)]
#[command(
    name = "poisson-averaging",
    about = "Averaging analysis of periodic orbits in perturbed rank-2 Poisson systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: reduce, average, locate zeros, certify orbits.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Averaging order (overrides the config).
        #[arg(long)]
        order: Option<u8>,
        /// Perturbation size; repeat for a continuation list (overrides the config).
        #[arg(long)]
        epsilon: Vec<f64>,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Shooting verification of located zeros.
        #[arg(long, value_enum)]
        verify: Option<Switch>,
    },
    /// Re-run the zero analysis across one swept parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print the built-in scenario catalogue.
    ListScenarios {
        #[arg(long, value_enum, default_value_t = ListFormat::Text)]
        format: ListFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("out: cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(doc: &Document, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(document_to_json(doc)),
        Format::Csv => match &doc.sweep {
            Some(rows) => Ok(sweep_to_csv(rows)),
            None => Err(CliError::Config(
                "format: csv output is only defined for sweep documents".into(),
            )),
        },
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { config, order, epsilon, out, format, verify } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                CliError::Config(format!("config: cannot read {}: {e}", config.display()))
            })?;
            let mut run = load_config(&text)?;
            if let Some(order) = order {
                run.order = order;
            }
            if !epsilon.is_empty() {
                run.epsilon = EpsilonList::Many(epsilon);
            }
            if let Some(switch) = verify {
                run.verify = matches!(switch, Switch::On);
            }
            let doc = run_analyze(&run)?;
            emit(&render(&doc, format)?, out.as_ref())
        }
        Command::Sweep { config, out, format } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                CliError::Config(format!("config: cannot read {}: {e}", config.display()))
            })?;
            let run = load_config(&text)?;
            let doc = run_sweep(&run)?;
            emit(&render(&doc, format)?, out.as_ref())
        }
        Command::ListScenarios { format } => {
            match format {
                ListFormat::Text => print!("{}", scenario_listing_text()),
                ListFormat::Json => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&scenario_catalogue())
                            .expect("catalogue serializes")
                    );
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({
                "error": { "kind": err.kind(), "message": err.message() }
            });
            eprintln!("{payload}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
