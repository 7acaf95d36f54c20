use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{run_and_write, RunConfig};
use crate::error::{Error, Result};

/// One CSV row. Failed runs keep their configuration columns, leave
/// `iters` and `final_rel_res` empty and report `converged = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub problem: u8,
    pub n: usize,
    pub m: usize,
    pub unknowns: usize,
    pub constraints: String,
    pub solver: String,
    pub precond: String,
    pub iters: String,
    pub converged: bool,
    pub final_rel_res: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SweepFile {
    List(Vec<RunConfig>),
    Object { runs: Vec<RunConfig> },
}

/// Reads a sweep file: either a JSON array of run configurations or an
/// object with a `runs` array.
pub fn read_sweep_config(path: &Path) -> Result<Vec<RunConfig>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: SweepFile = serde_json::from_str(&text)?;
    Ok(match file {
        SweepFile::List(runs) | SweepFile::Object { runs } => runs,
    })
}

fn format_iters(iters: f64) -> String {
    if iters.fract() == 0.0 {
        format!("{iters:.0}")
    } else {
        format!("{iters:.1}")
    }
}

/// Runs every configuration in order and writes one CSV row each. A failing
/// run is logged to stderr and recorded; the sweep carries on.
pub fn sweep<W: Write>(configs: &[RunConfig], out: W) -> Result<Vec<SweepRow>> {
    let mut writer = csv::Writer::from_writer(out);
    if configs.is_empty() {
        writer.write_record([
            "problem",
            "n",
            "m",
            "unknowns",
            "constraints",
            "solver",
            "precond",
            "iters",
            "converged",
            "final_rel_res",
        ])?;
    }
    let mut rows = Vec::with_capacity(configs.len());
    for config in configs {
        let row = match run_and_write(config) {
            Ok(report) => SweepRow {
                problem: config.problem,
                n: config.n,
                m: config.m,
                unknowns: report.unknowns,
                constraints: config.constraints.name().to_string(),
                solver: config.solver.name().to_string(),
                precond: config.precond.name().to_string(),
                iters: format_iters(report.iterations),
                converged: report.converged,
                final_rel_res: format!("{:.6e}", report.final_rel_residual),
            },
            Err(e) => {
                eprintln!(
                    "sweep: problem {} n={} m={} {}+{} failed: {e}",
                    config.problem, config.n, config.m, config.solver.name(), config.precond
                );
                SweepRow {
                    problem: config.problem,
                    n: config.n,
                    m: config.m,
                    unknowns: expected_unknowns(config),
                    constraints: config.constraints.name().to_string(),
                    solver: config.solver.name().to_string(),
                    precond: config.precond.name().to_string(),
                    iters: String::new(),
                    converged: false,
                    final_rel_res: String::new(),
                }
            }
        };
        writer.serialize(&row)?;
        rows.push(row);
    }
    writer.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(rows)
}

// Closed-form dof count, usable even when the run itself failed.
fn expected_unknowns(config: &RunConfig) -> usize {
    let n = config.n;
    let vertices = (n + 1).pow(3);
    let velocity_nodes = if config.problem == 1 {
        vertices + 3 * n * (n + 1) * (n + 1)
    } else {
        (2 * n + 1).pow(3)
    };
    3 * velocity_nodes + vertices
}
