//! Solve the rotated-lid cavity with BDDC-preconditioned GMRES on a
//! 2x2x2 subdomain split and print the run report as JSON.

use stokes_bddc::bddc::Constraints;
use stokes_bddc::bench::{run, Precond, RunConfig};
use stokes_bddc::krylov::KrylovMethod;

fn main() -> stokes_bddc::Result<()> {
    let config = RunConfig::new(2, 4, 2, KrylovMethod::Gmres, Precond::Bddc, 1e-8).with_constraints(Constraints::CEF);
    let report = run(&config)?;
    println!(
        "{} unknowns, {} on the interface, {} coarse constraints",
        report.unknowns,
        report.interface_unknowns,
        report.coarse_constraints.unwrap_or(0)
    );
    println!(
        "converged={} after {} iterations, relative residual {:.2e}",
        report.converged, report.iterations, report.final_rel_residual
    );
    println!("{}", report.to_json()?);
    Ok(())
}
