//! Benchmark harness: the two cavity problems, run configurations, reports,
//! parameter sweeps and field export.

mod run;
mod sweep;
mod vtk;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bddc::Constraints;
use crate::error::{Error, Result};
use crate::krylov::KrylovMethod;

pub use run::{run, run_with_solution, Solution};
pub use sweep::{read_sweep_config, sweep, SweepRow};
pub use vtk::{export_vtk, write_vtk};

/// Drop threshold used when an ILUT run does not set one.
pub const DEFAULT_ILUT_TAU: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precond {
    Bddc,
    Ilut,
    None,
}

impl Precond {
    pub fn name(self) -> &'static str {
        match self {
            Precond::Bddc => "bddc",
            Precond::Ilut => "ilut",
            Precond::None => "none",
        }
    }
}

impl fmt::Display for Precond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Precond {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bddc" => Ok(Precond::Bddc),
            "ilut" => Ok(Precond::Ilut),
            "none" => Ok(Precond::None),
            other => Err(Error::invalid(format!("unknown preconditioner `{other}`"))),
        }
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// 1: section of an infinite cavity (serendipity elements);
    /// 2: cubic cavity with a rotated lid (full Taylor-Hood elements).
    pub problem: u8,
    /// Elements per axis.
    pub n: usize,
    /// Subdomains per axis.
    pub m: usize,
    #[serde(default = "default_constraints")]
    pub constraints: Constraints,
    pub solver: KrylovMethod,
    pub precond: Precond,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ilut_tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vtk: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

fn default_constraints() -> Constraints {
    Constraints::C
}

impl RunConfig {
    pub fn new(problem: u8, n: usize, m: usize, solver: KrylovMethod, precond: Precond, tol: f64) -> Self {
        Self {
            problem,
            n,
            m,
            constraints: Constraints::C,
            solver,
            precond,
            tol,
            ilut_tau: None,
            max_iters: None,
            vtk: None,
            json: None,
        }
    }

    pub fn with_constraints(mut self, constraints: Constraints) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn with_ilut_tau(mut self, tau: f64) -> Self {
        self.ilut_tau = Some(tau);
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = Some(max_iters);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.problem, 1 | 2) {
            return Err(Error::invalid(format!("problem must be 1 or 2, got {}", self.problem)));
        }
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::invalid(format!("n must be even and positive, got {}", self.n)));
        }
        if self.m == 0 || self.n % self.m != 0 {
            return Err(Error::invalid(format!("m = {} does not divide n = {}", self.m, self.n)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if let Some(tau) = self.ilut_tau {
            if !(tau >= 0.0) {
                return Err(Error::invalid(format!("ILUT threshold must be non-negative, got {tau}")));
            }
        }
        if self.max_iters == Some(0) {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Which linear system the Krylov method iterated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IteratedSystem {
    /// Interface Schur complement system.
    Interface,
    /// Whole reduced saddle-point system.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub assembly_s: f64,
    pub setup_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    /// All dofs of the mesh, prescribed ones included.
    pub unknowns: usize,
    /// Size of the system after eliminating prescribed dofs.
    pub reduced_unknowns: usize,
    pub velocity_unknowns: usize,
    pub pressure_unknowns: usize,
    pub interface_unknowns: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub virtual_unknowns: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse_constraints: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ilut_shift: Option<f64>,
    pub iterated_system: IteratedSystem,
    pub iterations: f64,
    pub converged: bool,
    /// PCG stopped on a vanishing curvature.
    pub breakdown: bool,
    /// True relative residual of the iterated system.
    pub final_rel_residual: f64,
    /// True relative residual of the whole reduced system after recovery.
    pub full_rel_residual: f64,
    pub residual_history: Vec<f64>,
    pub timings: Timings,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Writes through a temporary sibling file and a rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Runs a configuration and writes the JSON report and VTK file it asks for.
pub fn run_and_write(config: &RunConfig) -> Result<RunReport> {
    let (report, solution) = run_with_solution(config)?;
    if let Some(path) = &config.vtk {
        let mut buf = Vec::new();
        write_vtk(&solution.mesh, &solution.values, &mut buf).map_err(|e| Error::io(path, e))?;
        write_atomic(path, &buf)?;
    }
    if let Some(path) = &config.json {
        write_atomic(path, report.to_json()?.as_bytes())?;
    }
    Ok(report)
}
