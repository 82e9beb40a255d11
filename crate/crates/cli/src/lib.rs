//! Scenario files, runs and sweeps for the `qdt` command.

pub mod error;
pub mod run;
pub mod schema;
pub mod sweep;

pub use error::{CliError, CliResult};
pub use run::{builtin_scenario, output_dir, run_file, run_scenario, write_output, RunOutput, RunReport};
pub use schema::{parse_scenario, parse_str, ScenarioFile};
pub use sweep::{sweep, sweep_outputs};

/// Parses a comma-separated list of numbers.
pub fn parse_values(list: &str) -> CliResult<Vec<f64>> {
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Schema(format!("sweep value {s:?} is not a number")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if values.is_empty() {
        return Err(CliError::Schema("sweep needs at least one value".into()));
    }
    Ok(values)
}
