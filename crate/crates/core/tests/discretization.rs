mod common;

use common::{patch_error, patch_problem};
use stokes_bddc::mesh::{ElementFamily, REFERENCE_NODES};
use stokes_bddc::sparse_la::{factor, FactorKind};
use stokes_bddc::stokes::assemble_system;
use stokes_bddc::stokes::element::element_matrices;

#[test]
fn patch_test_reproduces_polynomial_solution() {
    // serendipity elements leave corner pressures undetermined when every
    // face is a Dirichlet face, so only the full element is patch-tested
    let family = ElementFamily::Q2Q1;
    for nu in [1.0, 0.01] {
        for n in [2, 4] {
            let (mesh, problem) = patch_problem(n, family, nu);
            let system = assemble_system(&mesh, &problem).unwrap();
            let x = factor(&system.matrix, FactorKind::SymmetricIndefinite)
                .unwrap()
                .solve(&system.rhs)
                .unwrap();
            let err = patch_error(&mesh, &system.expand(&x));
            assert!(err < 1e-9, "n={n} nu={nu}: {err:e}");
        }
    }
}

// 5-point Gauss-Legendre on [0, 1]
fn gauss5() -> Vec<(f64, f64)> {
    let a = (5.0f64 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let b = (5.0f64 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
    let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
    [(-b, wb), (-a, wa), (0.0, 128.0 / 225.0), (a, wa), (b, wb)]
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

// quadratic Lagrange basis on nodes 0, 1/2, 1 and its derivative
fn lagrange(k: usize, t: f64) -> (f64, f64) {
    match k {
        0 => (2.0 * (t - 0.5) * (t - 1.0), 4.0 * t - 3.0),
        1 => (-4.0 * t * (t - 1.0), -8.0 * t + 4.0),
        _ => (2.0 * t * (t - 0.5), 4.0 * t - 1.0),
    }
}

#[test]
fn taylor_hood_element_matrices_match_independent_quadrature() {
    let h = 0.25;
    let nu = 0.7;
    let (a, b) = element_matrices(ElementFamily::Q2Q1, h, nu);
    let q = gauss5();
    let mut a_ref = vec![vec![0.0; 27]; 27];
    let mut b_ref = vec![vec![0.0; 81]; 8];
    for &(x, wx) in &q {
        for &(y, wy) in &q {
            for &(z, wz) in &q {
                let w = wx * wy * wz * h * h * h;
                let grad: Vec<[f64; 3]> = REFERENCE_NODES
                    .iter()
                    .map(|o| {
                        let (fx, dx) = lagrange(o[0], x);
                        let (fy, dy) = lagrange(o[1], y);
                        let (fz, dz) = lagrange(o[2], z);
                        [dx * fy * fz / h, fx * dy * fz / h, fx * fy * dz / h]
                    })
                    .collect();
                let psi: Vec<f64> = REFERENCE_NODES[..8]
                    .iter()
                    .map(|o| {
                        let l = |c: usize, t: f64| if c == 0 { 1.0 - t } else { t };
                        l(o[0], x) * l(o[1], y) * l(o[2], z)
                    })
                    .collect();
                for i in 0..27 {
                    for j in 0..27 {
                        a_ref[i][j] += nu * w * (0..3).map(|d| grad[i][d] * grad[j][d]).sum::<f64>();
                    }
                }
                for (p, &ps) in psi.iter().enumerate() {
                    for j in 0..27 {
                        for c in 0..3 {
                            b_ref[p][3 * j + c] -= w * ps * grad[j][c];
                        }
                    }
                }
            }
        }
    }
    let scale_a = a_ref.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..27 {
        for j in 0..27 {
            for c in 0..3 {
                let got = a[3 * i + c][3 * j + c];
                assert!((got - a_ref[i][j]).abs() < 1e-12 * scale_a, "A[{i},{j}]");
            }
            assert_eq!(a[3 * i][3 * j + 1], 0.0);
        }
    }
    let scale_b = b_ref.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for p in 0..8 {
        for j in 0..81 {
            assert!((b[p][j] - b_ref[p][j]).abs() < 1e-12 * scale_b, "B[{p},{j}]");
        }
    }
}

#[test]
fn serendipity_energy_of_quadratic_field_is_exact() {
    // u = (x y, y z + x^2, 0) lies in the serendipity space
    let h = 0.5;
    let nu = 2.0;
    let (a, b) = element_matrices(ElementFamily::Q2SQ1, h, nu);
    let u: Vec<f64> = REFERENCE_NODES[..20]
        .iter()
        .flat_map(|o| {
            let (x, y, z) = (o[0] as f64 * h / 2.0, o[1] as f64 * h / 2.0, o[2] as f64 * h / 2.0);
            [x * y, y * z + x * x, 0.0]
        })
        .collect();
    let energy: f64 = (0..60).map(|i| u[i] * (0..60).map(|j| a[i][j] * u[j]).sum::<f64>()).sum();
    // grad u_x = (y, x, 0), grad u_y = (2x, z, y)
    let h5 = h.powi(5);
    let exact = nu * (h5 / 3.0 + h5 / 3.0 + 4.0 * h5 / 3.0 + h5 / 3.0 + h5 / 3.0);
    assert!((energy - exact).abs() < 1e-13 * exact);
    // pressure 1 against the divergence y + z: -int (y + z)
    let div: f64 = (0..8).map(|p| (0..60).map(|j| b[p][j] * u[j]).sum::<f64>()).sum();
    assert!((div + h.powi(4)).abs() < 1e-14);
}
