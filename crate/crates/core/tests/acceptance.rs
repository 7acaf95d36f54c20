//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{rngs::StdRng, Rng, SeedableRng};

use common::{dense_solve_vec, patch_error, patch_problem};
use stokes_bddc::bddc::{build_virtual_system, Constraints};
use stokes_bddc::bench::{run, Precond, RunConfig, RunReport};
use stokes_bddc::decomp::{split_blocks, Decomposition};
use stokes_bddc::krylov::KrylovMethod;
use stokes_bddc::linalg::{dot, norm_inf};
use stokes_bddc::mesh::ElementFamily;
use stokes_bddc::sparse_la::{factor, FactorKind};
use stokes_bddc::stokes::{assemble_system, define_problem_1, define_problem_2};
use stokes_bddc::substructure::SchurComplement;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Benchmark runs keyed by (problem, solver, constraints), shared between
/// the reproduction criteria and the monotonicity check.
type Runs = HashMap<(u8, KrylovMethod, Constraints), Result<RunReport, String>>;

fn iters(runs: &Runs, key: (u8, KrylovMethod, Constraints)) -> Option<f64> {
    match runs.get(&key) {
        Some(Ok(r)) if r.converged => Some(r.iterations),
        _ => None,
    }
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "failed".to_string(), |x| x.to_string())
}

fn within(v: Option<f64>, lo: f64, hi: f64) -> bool {
    v.is_some_and(|x| x >= lo && x <= hi)
}

fn criterion_1() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut rng = StdRng::seed_from_u64(1);
    for n in [2, 4] {
        let (mesh, p) = define_problem_2(n).unwrap();
        let system = assemble_system(&mesh, &p).unwrap();
        let decomp = Decomposition::regular(&mesh, 2).unwrap();
        let schur = SchurComplement::new(&system, split_blocks(&system, &mesh, &decomp)).unwrap();
        let k = schur.interface_dim();
        let mut dense = vec![vec![0.0; k]; k];
        let mut col = vec![0.0; k];
        for j in 0..k {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            schur.apply_schur(&e, &mut col);
            for i in 0..k {
                dense[i][j] = col[i];
            }
        }
        let direct = factor(&system.matrix, FactorKind::SymmetricIndefinite).unwrap();
        let mut rhs_set = vec![system.rhs.clone()];
        for _ in 0..3 {
            rhs_set.push((0..system.n()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        for rhs in rhs_set {
            let (g2, _) = schur.condensed_rhs(&rhs).unwrap();
            let u2 = dense_solve_vec(dense.clone(), &g2);
            let x = schur.recover(&rhs, &u2).unwrap();
            let reference = direct.solve(&rhs).unwrap();
            let diff: Vec<f64> = x.iter().zip(&reference).map(|(a, b)| a - b).collect();
            worst = worst.max(norm_inf(&diff) / norm_inf(&reference));
        }
    }
    Verdict::new(worst <= 1e-8, format!("max relative inf-norm error {worst:.2e} (limit 1e-8)"))
}

fn criterion_2() -> Verdict {
    let (mesh, problem) = patch_problem(2, ElementFamily::Q2Q1, 0.01);
    let system = assemble_system(&mesh, &problem).unwrap();
    let x = factor(&system.matrix, FactorKind::SymmetricIndefinite)
        .unwrap()
        .solve(&system.rhs)
        .unwrap();
    let err = patch_error(&mesh, &system.expand(&x));
    Verdict::new(err <= 1e-9, format!("max nodal error {err:.2e} (limit 1e-9)"))
}

fn criterion_3() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for problem in [1u8, 2] {
        for (method, expect) in [
            (KrylovMethod::Pcg, 1.0),
            (KrylovMethod::Gmres, 1.0),
            (KrylovMethod::Bicgstab, 0.5),
        ] {
            let c = RunConfig::new(problem, 2, 1, method, Precond::Bddc, 1e-8);
            match run(&c) {
                Ok(r) => {
                    let ok = r.converged && r.iterations <= expect;
                    pass &= ok;
                    parts.push(format!("P{problem} {}={}", method.name(), r.iterations));
                }
                Err(e) => {
                    pass = false;
                    parts.push(format!("P{problem} {}: {e}", method.name()));
                }
            }
        }
    }
    Verdict::new(pass, parts.join("; "))
}

fn benchmark_runs() -> Runs {
    let mut runs = Runs::new();
    for method in [KrylovMethod::Gmres, KrylovMethod::Bicgstab] {
        for c in Constraints::ALL {
            let cfg = RunConfig::new(2, 4, 2, method, Precond::Bddc, 1e-8).with_constraints(c);
            runs.insert((2, method, c), run(&cfg).map_err(|e| e.to_string()));
        }
    }
    for c in [Constraints::C, Constraints::CE, Constraints::CEF] {
        let cfg = RunConfig::new(1, 8, 2, KrylovMethod::Pcg, Precond::Bddc, 1e-6).with_constraints(c);
        runs.insert((1, KrylovMethod::Pcg, c), run(&cfg).map_err(|e| e.to_string()));
    }
    runs
}

fn criterion_4(runs: &Runs) -> Verdict {
    let g = |c| iters(runs, (2, KrylovMethod::Gmres, c));
    let b = |c| iters(runs, (2, KrylovMethod::Bicgstab, c));
    let checks = [
        ("gmres c", g(Constraints::C), 16.0, 36.0),
        ("gmres cef", g(Constraints::CEF), 12.0, 27.0),
        ("bicgstab c", b(Constraints::C), 10.0, 30.0),
        ("bicgstab cef", b(Constraints::CEF), 7.75, 23.25),
    ];
    let pass = checks.iter().all(|&(_, v, lo, hi)| within(v, lo, hi));
    let detail = checks
        .iter()
        .map(|&(name, v, lo, hi)| format!("{name}={} in [{lo},{hi}]", show(v)))
        .collect::<Vec<_>>()
        .join("; ");
    Verdict::new(pass, detail)
}

fn criterion_5(runs: &Runs) -> Verdict {
    let p = |c| iters(runs, (1, KrylovMethod::Pcg, c));
    let no_breakdown = [Constraints::C, Constraints::CE]
        .iter()
        .all(|&c| matches!(runs.get(&(1, KrylovMethod::Pcg, c)), Some(Ok(r)) if !r.breakdown));
    let (c, ce) = (p(Constraints::C), p(Constraints::CE));
    let pass = within(c, 9.0, 27.0) && within(ce, 8.0, 23.0) && no_breakdown;
    Verdict::new(
        pass,
        format!("pcg c={} in [9,27]; c+e={} in [8,23]; breakdown-free={no_breakdown}", show(c), show(ce)),
    )
}

fn criterion_6(runs: &Runs) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (problem, method) in [(2, KrylovMethod::Gmres), (2, KrylovMethod::Bicgstab), (1, KrylovMethod::Pcg)] {
        let base = iters(runs, (problem, method, Constraints::C));
        for c in [Constraints::CE, Constraints::CEF] {
            let v = iters(runs, (problem, method, c));
            let ok = matches!((v, base), (Some(a), Some(b)) if a <= b);
            pass &= ok;
            parts.push(format!("P{problem} {} {c}={} <= c={}", method.name(), show(v), show(base)));
        }
    }
    Verdict::new(pass, parts.join("; "))
}

fn criterion_7() -> Verdict {
    let none = run(&RunConfig::new(2, 2, 2, KrylovMethod::Gmres, Precond::None, 1e-8));
    let bddc = run(&RunConfig::new(2, 2, 2, KrylovMethod::Gmres, Precond::Bddc, 1e-8));
    match (none, bddc) {
        (Ok(a), Ok(b)) => Verdict::new(
            a.converged && b.converged && a.iterations >= 3.0 * b.iterations,
            format!("unpreconditioned {} vs BDDC(c) {} (need >= 3x)", a.iterations, b.iterations),
        ),
        (a, b) => Verdict::new(false, format!("run failed: {:?} / {:?}", a.err(), b.err())),
    }
}

fn criterion_8() -> Verdict {
    let mut counts = Vec::new();
    for tau in [1e-3, 1e-4, 1e-5] {
        let cfg = RunConfig::new(2, 4, 2, KrylovMethod::Gmres, Precond::Ilut, 1e-8).with_ilut_tau(tau);
        counts.push(match run(&cfg) {
            Ok(r) if r.converged => Some(r.iterations),
            _ => None,
        });
    }
    let monotone = counts.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b <= a));
    let last_ok = within(counts[2], 0.0, 10.0);
    Verdict::new(
        monotone && last_ok,
        format!(
            "gmres iterations for tau 1e-3/1e-4/1e-5: {}/{}/{}",
            show(counts[0]),
            show(counts[1]),
            show(counts[2])
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut rng = StdRng::seed_from_u64(9);
    let mut pou: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let mut viol: f64 = 0.0;
    for problem in [1u8, 2] {
        let (mesh, p) = if problem == 1 { define_problem_1(4) } else { define_problem_2(4) }.unwrap();
        let system = assemble_system(&mesh, &p).unwrap();
        let decomp = Decomposition::regular(&mesh, 2).unwrap();
        let vs = build_virtual_system(&system, &mesh, &decomp, Constraints::CEF).unwrap();
        let e = vs.averaging();
        for r in 0..system.n() {
            pou = pou.max((e.weights_of(r).iter().sum::<f64>() - 1.0).abs());
        }
        let k = vs.interface().len();
        let mut probe = |rng: &mut StdRng| -> (Vec<f64>, Vec<f64>) {
            let r: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut full = vec![0.0; system.n()];
            for (i, &d) in vs.interface().iter().enumerate() {
                full[d] = r[i];
            }
            let w = vs.solve_virtual(&e.distribute(&full));
            viol = viol.max(vs.constraint_violation(&w) / norm_inf(&w));
            (r, vs.apply_bddc(&full_to_interface(&full, vs.interface())).unwrap())
        };
        for _ in 0..20 {
            let (a, ma) = probe(&mut rng);
            let (b, mb) = probe(&mut rng);
            let (l, r) = (dot(&ma, &b), dot(&a, &mb));
            sym = sym.max((l - r).abs() / l.abs().max(r.abs()));
        }
    }
    Verdict::new(
        pou <= 1e-15 && sym <= 1e-9 && viol <= 1e-9,
        format!("partition of unity {pou:.1e}; symmetry {sym:.1e}; constraint violation {viol:.1e}"),
    )
}

fn full_to_interface(full: &[f64], interface: &[usize]) -> Vec<f64> {
    interface.iter().map(|&d| full[d]).collect()
}

fn criterion_10() -> Verdict {
    let mut counts = HashMap::new();
    for (n, m) in [(4, 2), (6, 3)] {
        for c in [Constraints::C, Constraints::CEF] {
            let cfg = RunConfig::new(2, n, m, KrylovMethod::Gmres, Precond::Bddc, 1e-8).with_constraints(c);
            counts.insert(
                (m, c),
                match run(&cfg) {
                    Ok(r) if r.converged => Some(r.iterations),
                    _ => None,
                },
            );
        }
    }
    let (a, b) = (counts[&(2, Constraints::CEF)], counts[&(3, Constraints::CEF)]);
    let pass = matches!((a, b), (Some(x), Some(y)) if y <= 1.5 * x);
    Verdict::new(
        pass,
        format!(
            "c+e+f {} -> {} (limit +50%); c {} -> {}",
            show(a),
            show(b),
            show(counts[&(2, Constraints::C)]),
            show(counts[&(3, Constraints::C)])
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: usize, limit: Duration, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let elapsed = t.elapsed();
        let in_time = elapsed <= limit;
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let time_note = if in_time { String::new() } else { format!(" [exceeded {limit:?}]") };
        println!(
            "criterion {id:>2}: {} ({:.1}s) {}{time_note}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            v.detail
        );
    };
    report(1, Duration::from_secs(30), &mut criterion_1);
    report(2, Duration::from_secs(5), &mut criterion_2);
    report(3, Duration::from_secs(10), &mut criterion_3);

    let t = Instant::now();
    let runs = benchmark_runs();
    let bench_time = t.elapsed();
    println!("benchmark runs for criteria 4-6 took {:.1}s", bench_time.as_secs_f64());
    let p2_time = Duration::from_secs(120);
    report(4, p2_time.saturating_sub(bench_time.min(p2_time) / 2), &mut || criterion_4(&runs));
    report(5, Duration::from_secs(300), &mut || criterion_5(&runs));
    report(6, Duration::from_secs(5), &mut || criterion_6(&runs));
    report(7, Duration::from_secs(60), &mut criterion_7);
    report(8, Duration::from_secs(120), &mut criterion_8);
    report(9, Duration::from_secs(60), &mut criterion_9);
    report(10, Duration::from_secs(300), &mut criterion_10);

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
