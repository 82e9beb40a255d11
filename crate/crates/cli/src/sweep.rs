//! Parameter sweeps: one run per value, computed in parallel and written by
//! a single collector.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::run::{run_scenario, write_output, RunOutput, RunReport};
use crate::schema::{from_value, set_number};

pub const INDEX_FILE: &str = "index.json";

/// Directory name of the `i`-th sweep point.
pub fn point_dir(i: usize) -> String {
    format!("point-{i:03}")
}

/// Runs `doc` once per value of the numeric field at `param`, in memory.
pub fn sweep_outputs(doc: &Value, param: &str, values: &[f64]) -> CliResult<Vec<RunOutput>> {
    if values.is_empty() {
        return Err(CliError::Schema("sweep needs at least one value".into()));
    }
    values
        .par_iter()
        .map(|&v| {
            let mut copy = doc.clone();
            set_number(&mut copy, param, v)?;
            let scenario = from_value(copy)?;
            run_scenario(&scenario).map_err(|e| e.context(&format!("{param} = {v}")))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Writes every sweep point under `dir` plus an index mapping each value to
/// its outputs and summary.
pub fn sweep(doc: &Value, param: &str, values: &[f64], dir: &Path) -> CliResult<RunReport> {
    let start = Instant::now();
    let results = sweep_outputs(doc, param, values)?;
    let mut outputs = Vec::new();
    let mut index = Vec::new();
    for (i, (v, out)) in values.iter().zip(&results).enumerate() {
        let sub = point_dir(i);
        let files = write_output(out, &dir.join(&sub))?;
        index.push(json!({
            "value": v,
            "outputs": files.iter().map(|p| relative(p, dir)).collect::<Vec<_>>(),
            "summary": out.summary,
        }));
        outputs.extend(files);
    }
    let summary = json!({"parameter": param, "points": index});
    let index_path = dir.join(INDEX_FILE);
    let mut text = serde_json::to_vec_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    text.push(b'\n');
    std::fs::write(&index_path, text).map_err(|e| CliError::Io(format!("{}: {e}", index_path.display())))?;
    outputs.push(index_path);
    Ok(RunReport {
        exit_status: 0,
        outputs,
        summary,
        duration: start.elapsed(),
    })
}

fn relative(p: &Path, base: &Path) -> String {
    p.strip_prefix(base).map(PathBuf::from).unwrap_or_else(|_| p.to_path_buf()).display().to_string()
}
