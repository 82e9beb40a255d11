use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdt_cli::{builtin_scenario, output_dir, parse_scenario, parse_values, run_file, sweep, CliError, CliResult, RunReport};
use qdt_core::scenarios::{builtin, BUILTIN_NAMES};

#[derive(Parser)]
#[command(name = "qdt", version, about = "Run quantum decision theory scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write trajectory.csv and summary.json.
    Run {
        file: PathBuf,
        /// Output directory; overrides the file and QDT_OUTPUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario once per value of a numeric field.
    Sweep {
        file: PathBuf,
        /// Dotted path of the field, e.g. generator.rate or network.J.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in paradox scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// List the built-in scenarios.
    List,
    /// Print a built-in scenario as a scenario file, or write it with --out.
    Show {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_report(r: &RunReport) {
    println!("status ok");
    for p in &r.outputs {
        println!("output {}", p.display());
    }
    println!("{}", serde_json::to_string_pretty(&r.summary).unwrap_or_default());
    println!("duration {:.3} s", r.duration.as_secs_f64());
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { file, out } => print_report(&run_file(&file, out.as_deref())?),
        Command::Sweep {
            file,
            param,
            values,
            out,
        } => {
            let scenario = parse_scenario(&file)?;
            let text = std::fs::read_to_string(&file)?;
            let doc = serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
            let values = parse_values(&values)?;
            print_report(&sweep(&doc, &param, &values, &output_dir(out.as_deref(), &scenario))?);
        }
        Command::Scenario { action: ScenarioAction::List } => {
            for name in BUILTIN_NAMES {
                let s = builtin(name).expect("listed names exist");
                println!("{name}\t{}", s.description);
            }
        }
        Command::Scenario {
            action: ScenarioAction::Show { name, out },
        } => {
            let s = builtin_scenario(&name)?;
            let mut text = serde_json::to_string_pretty(&s).map_err(|e| CliError::Io(e.to_string()))?;
            text.push('\n');
            match out {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
