//! Threshold ILU on the whole saddle system against BDDC and no
//! preconditioning, same problem and tolerance.

use stokes_bddc::bench::{run, Precond, RunConfig};
use stokes_bddc::krylov::KrylovMethod;

fn main() -> stokes_bddc::Result<()> {
    let base = RunConfig::new(2, 4, 2, KrylovMethod::Gmres, Precond::Ilut, 1e-8);
    for tau in [1e-2, 1e-3, 1e-4, 1e-5] {
        let r = run(&base.clone().with_ilut_tau(tau))?;
        println!(
            "ilut tau={tau:.0e}: {:>4} iterations, shift {:.1e}, setup {:.2}s",
            r.iterations,
            r.ilut_shift.unwrap_or(0.0),
            r.timings.setup_s
        );
    }
    for precond in [Precond::Bddc, Precond::None] {
        let cfg = RunConfig {
            precond,
            ..base.clone()
        };
        let r = run(&cfg)?;
        println!("{precond}: {:>4} iterations, converged={}", r.iterations, r.converged);
    }
    Ok(())
}
