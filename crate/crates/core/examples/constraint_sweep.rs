//! Iteration counts for every coarse-space choice, written as CSV to stdout.
//!
//! Corners only, plus edge averages, plus face averages, plus both.

use std::io;

use stokes_bddc::bddc::Constraints;
use stokes_bddc::bench::{sweep, Precond, RunConfig};
use stokes_bddc::krylov::KrylovMethod;

fn main() -> stokes_bddc::Result<()> {
    let mut configs = Vec::new();
    for solver in [KrylovMethod::Gmres, KrylovMethod::Bicgstab] {
        for c in Constraints::ALL {
            configs.push(RunConfig::new(2, 4, 2, solver, Precond::Bddc, 1e-8).with_constraints(c));
        }
    }
    for c in [Constraints::C, Constraints::CE, Constraints::CEF] {
        configs.push(RunConfig::new(1, 4, 2, KrylovMethod::Pcg, Precond::Bddc, 1e-6).with_constraints(c));
    }
    sweep(&configs, io::stdout().lock())?;
    Ok(())
}
