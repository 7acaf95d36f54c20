use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stokes_bddc::bddc::Constraints;
use stokes_bddc::bench::{read_sweep_config, run_and_write, sweep, Precond, RunConfig};
use stokes_bddc::krylov::KrylovMethod;
use stokes_bddc::stokes::{assemble_system, define_problem_1, define_problem_2};
use stokes_bddc::Error;

#[derive(Parser)]
#[command(version, about = "BDDC-preconditioned Krylov solvers for 3D lid-driven cavity Stokes flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one cavity problem and print a summary.
    Solve {
        #[arg(long)]
        problem: u8,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value = "c")]
        constraints: Constraints,
        #[arg(long, default_value = "gmres")]
        solver: KrylovMethod,
        #[arg(long, default_value = "bddc")]
        precond: Precond,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        ilut_tau: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Write the solution as a legacy VTK file.
        #[arg(long)]
        vtk: Option<PathBuf>,
        /// Write the run report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Dump the reduced system matrix in MatrixMarket format.
        #[arg(long)]
        matrix_market: Option<PathBuf>,
    },
    /// Run every configuration of a JSON sweep file and write a CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve {
            problem,
            n,
            m,
            constraints,
            solver,
            precond,
            tol,
            ilut_tau,
            max_iters,
            vtk,
            json,
            matrix_market,
        } => {
            let config = RunConfig {
                problem,
                n,
                m,
                constraints,
                solver,
                precond,
                tol,
                ilut_tau,
                max_iters,
                vtk,
                json,
            };
            config.validate()?;
            if let Some(path) = matrix_market {
                let (mesh, p) = if problem == 1 { define_problem_1(n)? } else { define_problem_2(n)? };
                let system = assemble_system(&mesh, &p)?;
                let file = File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                system
                    .matrix
                    .write_matrix_market(BufWriter::new(file))
                    .map_err(|e| Error::Io { path, source: e })?;
            }
            let r = run_and_write(&config)?;
            println!(
                "problem {} n={} m={} unknowns={} ({} reduced, {} interface)",
                problem, n, m, r.unknowns, r.reduced_unknowns, r.interface_unknowns
            );
            println!(
                "{}+{} [{}] iterations={} converged={} rel_res={:.3e} full_rel_res={:.3e} time={:.2}s",
                solver.name(),
                precond,
                constraints,
                r.iterations,
                r.converged,
                r.final_rel_residual,
                r.full_rel_residual,
                r.timings.total_s
            );
            Ok(())
        }
        Command::Sweep { config, out } => {
            let configs = read_sweep_config(&config)?;
            let file = File::create(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            let rows = sweep(&configs, BufWriter::new(file))?;
            let failed = rows.iter().filter(|r| r.iters.is_empty()).count();
            println!("{} runs written to {} ({failed} failed)", rows.len(), out.display());
            Ok(())
        }
    }
}
