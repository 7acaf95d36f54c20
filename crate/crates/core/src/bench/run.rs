use std::time::Instant;

use super::{IteratedSystem, Precond, RunConfig, RunReport, Timings, DEFAULT_ILUT_TAU};
use crate::bddc::build_virtual_system;
use crate::decomp::{split_blocks, Decomposition};
use crate::error::{Error, Result};
use crate::ilut::{ilut_factor, IlutOptions};
use crate::krylov::{solve, Identity, KrylovConfig, KrylovResult};
use crate::mesh::Mesh;
use crate::stokes::{assemble_system, define_problem_1, define_problem_2, SaddleSystem};
use crate::substructure::SchurComplement;

/// Solved state of a run: the mesh and the full dof vector, prescribed
/// values included.
#[derive(Debug, Clone)]
pub struct Solution {
    pub mesh: Mesh,
    pub values: Vec<f64>,
}

pub fn run(config: &RunConfig) -> Result<RunReport> {
    run_with_solution(config).map(|(report, _)| report)
}

struct Outcome {
    result: KrylovResult,
    reduced: Vec<f64>,
    iterated: IteratedSystem,
    interface_unknowns: usize,
    virtual_unknowns: Option<usize>,
    coarse_constraints: Option<usize>,
    ilut_shift: Option<f64>,
    setup_s: f64,
    solve_s: f64,
}

pub fn run_with_solution(config: &RunConfig) -> Result<(RunReport, Solution)> {
    config.validate()?;
    let start = Instant::now();
    let (mesh, problem) = match config.problem {
        1 => define_problem_1(config.n)?,
        _ => define_problem_2(config.n)?,
    };
    let system = assemble_system(&mesh, &problem)?;
    let assembly_s = start.elapsed().as_secs_f64();

    let mut krylov = KrylovConfig::new(config.solver, config.tol);
    if let Some(max) = config.max_iters {
        krylov = krylov.with_max_iters(max);
    }
    let out = match config.precond {
        Precond::Bddc => solve_bddc(config, &mesh, &system, &krylov)?,
        Precond::Ilut => solve_full_ilut(config, &system, &krylov)?,
        Precond::None => {
            let t = Instant::now();
            let result = solve(&system.matrix, &Identity(system.n()), &system.rhs, &krylov)?;
            Outcome {
                reduced: result.solution.clone(),
                result,
                iterated: IteratedSystem::Full,
                interface_unknowns: 0,
                virtual_unknowns: None,
                coarse_constraints: None,
                ilut_shift: None,
                setup_s: 0.0,
                solve_s: t.elapsed().as_secs_f64(),
            }
        }
    };

    let full_rel_residual = system.relative_residual(&out.reduced);
    if out.result.converged {
        let limit = 10.0 * config.tol;
        if !(full_rel_residual < limit) {
            return Err(Error::Verification {
                residual: full_rel_residual,
                limit,
            });
        }
    }
    let values = system.expand(&out.reduced);
    let report = RunReport {
        config: config.clone(),
        unknowns: mesh.n_dofs(),
        reduced_unknowns: system.n(),
        velocity_unknowns: system.n_free_velocity(),
        pressure_unknowns: system.n_free_pressure(),
        interface_unknowns: out.interface_unknowns,
        virtual_unknowns: out.virtual_unknowns,
        coarse_constraints: out.coarse_constraints,
        ilut_shift: out.ilut_shift,
        iterated_system: out.iterated,
        iterations: out.result.iterations,
        converged: out.result.converged,
        breakdown: out.result.breakdown,
        final_rel_residual: out.result.final_rel_residual,
        full_rel_residual,
        residual_history: out.result.history,
        timings: Timings {
            assembly_s,
            setup_s: out.setup_s,
            solve_s: out.solve_s,
            total_s: start.elapsed().as_secs_f64(),
        },
    };
    Ok((report, Solution { mesh, values }))
}

fn solve_bddc(config: &RunConfig, mesh: &Mesh, system: &SaddleSystem, krylov: &KrylovConfig) -> Result<Outcome> {
    let t = Instant::now();
    let decomp = Decomposition::regular(mesh, config.m)?;
    let split = split_blocks(system, mesh, &decomp);
    let virt = build_virtual_system(system, mesh, &decomp, config.constraints)?;
    let virtual_unknowns = Some(virt.n_virtual());
    let coarse_constraints = Some(virt.n_constraints());

    if split.interface.is_empty() {
        // one subdomain: the preconditioner is the exact inverse of the
        // whole system, so iterate there
        let setup_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let result = solve(&system.matrix, &virt.full_preconditioner(), &system.rhs, krylov)?;
        return Ok(Outcome {
            reduced: result.solution.clone(),
            result,
            iterated: IteratedSystem::Full,
            interface_unknowns: 0,
            virtual_unknowns,
            coarse_constraints,
            ilut_shift: None,
            setup_s,
            solve_s: t.elapsed().as_secs_f64(),
        });
    }

    let schur = SchurComplement::new(system, split)?;
    let (g2, _) = schur.condensed_rhs(&system.rhs)?;
    let setup_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let result = solve(&schur, &virt.interface_preconditioner(), &g2, krylov)?;
    let reduced = schur.recover(&system.rhs, &result.solution)?;
    Ok(Outcome {
        result,
        reduced,
        iterated: IteratedSystem::Interface,
        interface_unknowns: schur.interface_dim(),
        virtual_unknowns,
        coarse_constraints,
        ilut_shift: None,
        setup_s,
        solve_s: t.elapsed().as_secs_f64(),
    })
}

fn solve_full_ilut(config: &RunConfig, system: &SaddleSystem, krylov: &KrylovConfig) -> Result<Outcome> {
    let t = Instant::now();
    let tau = config.ilut_tau.unwrap_or(DEFAULT_ILUT_TAU);
    let options = IlutOptions::new(tau).with_shifted_rows(system.n_free_velocity()..system.n());
    let precond = ilut_factor(&system.matrix, &options)?;
    let setup_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let result = solve(&system.matrix, &precond, &system.rhs, krylov)?;
    Ok(Outcome {
        reduced: result.solution.clone(),
        result,
        iterated: IteratedSystem::Full,
        interface_unknowns: 0,
        virtual_unknowns: None,
        coarse_constraints: None,
        ilut_shift: Some(precond.shift()),
        setup_s,
        solve_s: t.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bddc::Constraints;
    use crate::krylov::KrylovMethod;

    #[test]
    fn single_subdomain_bddc_is_exact() {
        let c = RunConfig::new(2, 2, 1, KrylovMethod::Gmres, Precond::Bddc, 1e-8);
        let r = run(&c).unwrap();
        assert_eq!(r.iterations, 1.0);
        assert_eq!(r.iterated_system, IteratedSystem::Full);
        assert!(r.full_rel_residual < 1e-8);
    }

    #[test]
    fn interface_run_recovers_full_solution() {
        let c = RunConfig::new(2, 2, 2, KrylovMethod::Pcg, Precond::Bddc, 1e-8).with_constraints(Constraints::CE);
        let (r, sol) = run_with_solution(&c).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterated_system, IteratedSystem::Interface);
        assert!(r.interface_unknowns > 0);
        assert!(r.full_rel_residual < 1e-7);
        assert_eq!(sol.values.len(), r.unknowns);
        assert_eq!(r.unknowns, 3 * 125 + 27);
    }

    #[test]
    fn runs_are_deterministic() {
        let c = RunConfig::new(2, 2, 2, KrylovMethod::Bicgstab, Precond::Bddc, 1e-8);
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.residual_history, b.residual_history);
    }

    #[test]
    fn unconverged_run_is_reported_not_verified() {
        let c = RunConfig::new(2, 2, 2, KrylovMethod::Gmres, Precond::None, 1e-12).with_max_iters(2);
        let r = run(&c).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2.0);
    }
}
