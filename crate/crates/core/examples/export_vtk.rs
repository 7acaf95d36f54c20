//! Solve the axis-aligned lid cavity and write the velocity and pressure
//! fields for ParaView.
//!
//! Usage: cargo run --example export_vtk -- [OUT.vtk]

use std::path::PathBuf;

use stokes_bddc::bench::{export_vtk, run_with_solution, Precond, RunConfig};
use stokes_bddc::krylov::KrylovMethod;

fn main() -> stokes_bddc::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cavity.vtk"));
    let config = RunConfig::new(1, 4, 2, KrylovMethod::Pcg, Precond::Bddc, 1e-8);
    let (report, solution) = run_with_solution(&config)?;
    export_vtk(&solution.mesh, &solution.values, &out)?;
    println!("{} iterations, wrote {}", report.iterations, out.display());
    Ok(())
}
