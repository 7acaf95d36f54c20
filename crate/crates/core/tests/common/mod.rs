#![allow(dead_code)]

use stokes_bddc::mesh::{ElementFamily, Field, Mesh};
use stokes_bddc::stokes::{center_vertex, StokesProblem};

/// Dense Gaussian elimination with partial pivoting; `b` holds one
/// right-hand side per column.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        assert!(a[k][k] != 0.0, "dense oracle hit a singular matrix");
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            for j in 0..b[i].len() {
                b[i][j] -= f * b[k][j];
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..b[k].len() {
            let mut s = b[k][j];
            for i in k + 1..n {
                s -= a[k][i] * b[i][j];
            }
            b[k][j] = s / a[k][k];
        }
    }
    b
}

pub fn dense_solve_vec(a: Vec<Vec<f64>>, b: &[f64]) -> Vec<f64> {
    dense_solve(a, b.iter().map(|&v| vec![v]).collect())
        .into_iter()
        .map(|r| r[0])
        .collect()
}

pub fn patch_velocity(x: [f64; 3]) -> [f64; 3] {
    [x[1] * x[2], x[0] * x[2], x[0] * x[1]]
}

pub fn patch_pressure(x: [f64; 3]) -> f64 {
    x[0] + x[1] + x[2] - 1.5
}

/// Divergence-free harmonic velocity with a linear pressure: the body
/// force is just the pressure gradient.
pub fn patch_problem(n: usize, family: ElementFamily, viscosity: f64) -> (Mesh, StokesProblem) {
    let mesh = Mesh::structured(n, family).unwrap();
    let pin = center_vertex(&mesh).unwrap();
    let mut problem = StokesProblem::new(viscosity, pin)
        .unwrap()
        .with_body_force(|_| [1.0, 1.0, 1.0])
        .with_pinned_value(patch_pressure(mesh.coords(pin)));
    for v in 0..mesh.n_nodes() {
        if mesh.is_on_boundary(v) {
            problem.set_velocity_vector(v, patch_velocity(mesh.coords(v)));
        }
    }
    (mesh, problem)
}

/// Largest nodal deviation of a full dof vector from the patch solution.
pub fn patch_error(mesh: &Mesh, values: &[f64]) -> f64 {
    let mut err: f64 = 0.0;
    for v in 0..mesh.n_nodes() {
        let x = mesh.coords(v);
        let u = patch_velocity(x);
        for c in 0..3 {
            err = err.max((values[mesh.velocity_dof(v, c)] - u[c]).abs());
        }
        if let Some(d) = mesh.dof(v, Field::P) {
            err = err.max((values[d] - patch_pressure(x)).abs());
        }
    }
    err
}
