//! The BDDC pipeline by hand: decompose, condense interiors, build the
//! partially assembled virtual system, iterate on the interface and
//! recover the interior unknowns.

use stokes_bddc::bddc::{build_virtual_system, Constraints};
use stokes_bddc::decomp::{classify_globs, split_blocks, Decomposition};
use stokes_bddc::krylov::{solve, KrylovConfig, KrylovMethod};
use stokes_bddc::stokes::{assemble_system, define_problem_2};
use stokes_bddc::substructure::SchurComplement;

fn main() -> stokes_bddc::Result<()> {
    let (mesh, problem) = define_problem_2(4)?;
    let system = assemble_system(&mesh, &problem)?;
    let decomp = Decomposition::regular(&mesh, 2)?;

    let globs = classify_globs(&mesh, &decomp);
    println!(
        "{} subdomains: {} corners, {} edges, {} faces",
        decomp.n_subdomains(),
        globs.corners.len(),
        globs.edges().count(),
        globs.faces().count()
    );

    let schur = SchurComplement::new(&system, split_blocks(&system, &mesh, &decomp))?;
    let (g, _) = schur.condensed_rhs(&system.rhs)?;
    println!("{} reduced unknowns, {} on the interface", system.n(), schur.interface_dim());

    let virt = build_virtual_system(&system, &mesh, &decomp, Constraints::CE)?;
    println!(
        "{} virtual unknowns, {} coarse constraints",
        virt.n_virtual(),
        virt.n_constraints()
    );

    let config = KrylovConfig::new(KrylovMethod::Gmres, 1e-8);
    let result = solve(&schur, &virt.interface_preconditioner(), &g, &config)?;
    let x = schur.recover(&system.rhs, &result.solution)?;
    println!(
        "gmres: {} iterations, interface residual {:.2e}, full residual {:.2e}",
        result.iterations,
        result.final_rel_residual,
        system.relative_residual(&x)
    );
    println!("{} interior solves in total", schur.interior_solves());
    Ok(())
}
