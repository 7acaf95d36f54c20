//! Static condensation of subdomain interiors onto the interface.
//!
//! With the reduced system ordered as `[interior; interface]`, the
//! interface problem is `S u2 = g2` where
//! `S = A22 - A21 A11^{-1} A12` and `g2 = f2 - A21 A11^{-1} f1`.
//! `A11` is block diagonal, one saddle-point block per subdomain, and is
//! factored once. `S` is never formed.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::decomp::BlockSplit;
use crate::error::{check_len, Error, Result};
use crate::krylov::LinearOperator;
use crate::sparse_la::{factor, FactorKind, Factorization, SparseMatrix};
use crate::stokes::SaddleSystem;

/// Factored interior blocks, one per subdomain.
#[derive(Debug)]
pub struct InteriorFactors {
    blocks: Vec<Option<Factorization>>,
    offsets: Vec<usize>,
}

impl InteriorFactors {
    pub fn n_subdomains(&self) -> usize {
        self.blocks.len()
    }

    /// Length of the stacked interior vector.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Total fill of all block factors.
    pub fn nnz(&self) -> usize {
        self.blocks.iter().flatten().map(|f| f.nnz()).sum()
    }

    /// Solves `A11 x = b` in place on a stacked interior vector.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        for (s, block) in self.blocks.iter().enumerate() {
            if let Some(f) = block {
                f.solve_in_place(&mut x[self.offsets[s]..self.offsets[s + 1]]);
            }
        }
    }
}

pub fn factor_interiors(system: &SaddleSystem, split: &BlockSplit) -> Result<InteriorFactors> {
    let mut blocks = Vec::with_capacity(split.n_subdomains());
    for s in 0..split.n_subdomains() {
        let dofs = split.interior_of(s);
        if dofs.is_empty() {
            blocks.push(None);
            continue;
        }
        let block = system.matrix.submatrix(dofs, dofs);
        let f = factor(&block, FactorKind::SymmetricIndefinite).map_err(|e| Error::SingularInterior {
            subdomain: s,
            source: Box::new(e),
        })?;
        blocks.push(Some(f));
    }
    Ok(InteriorFactors {
        blocks,
        offsets: split.interior_offsets.clone(),
    })
}

/// Interface Schur complement of a reduced saddle system, applied
/// matrix-free.
#[derive(Debug)]
pub struct SchurComplement {
    split: BlockSplit,
    factors: InteriorFactors,
    a12: SparseMatrix,
    a21: SparseMatrix,
    a22: SparseMatrix,
    interior_solves: AtomicUsize,
    applications: AtomicUsize,
}

impl SchurComplement {
    pub fn new(system: &SaddleSystem, split: BlockSplit) -> Result<Self> {
        check_len(system.n(), split.interior.len() + split.interface.len())?;
        let factors = factor_interiors(system, &split)?;
        let a12 = system.matrix.submatrix(&split.interior, &split.interface);
        let a21 = system.matrix.submatrix(&split.interface, &split.interior);
        let a22 = system.matrix.submatrix(&split.interface, &split.interface);
        Ok(Self {
            split,
            factors,
            a12,
            a21,
            a22,
            interior_solves: AtomicUsize::new(0),
            applications: AtomicUsize::new(0),
        })
    }

    pub fn split(&self) -> &BlockSplit {
        &self.split
    }

    pub fn factors(&self) -> &InteriorFactors {
        &self.factors
    }

    pub fn interface_dim(&self) -> usize {
        self.split.interface.len()
    }

    pub fn interior_dim(&self) -> usize {
        self.split.interior.len()
    }

    /// Number of `A11` solves performed so far (each touches every subdomain).
    pub fn interior_solves(&self) -> usize {
        self.interior_solves.load(Ordering::Relaxed)
    }

    /// Number of `S` applications performed so far.
    pub fn applications(&self) -> usize {
        self.applications.load(Ordering::Relaxed)
    }

    fn solve_interior(&self, x: &mut [f64]) {
        self.interior_solves.fetch_add(1, Ordering::Relaxed);
        self.factors.solve_in_place(x);
    }

    /// `out = S u2`.
    pub fn apply_schur(&self, u2: &[f64], out: &mut [f64]) {
        self.applications.fetch_add(1, Ordering::Relaxed);
        let mut t = vec![0.0; self.interior_dim()];
        self.a12.mul_acc(1.0, u2, &mut t);
        self.solve_interior(&mut t);
        out.fill(0.0);
        self.a22.mul_acc(1.0, u2, out);
        self.a21.mul_acc(-1.0, &t, out);
    }

    /// Condensed right-hand side `g2 = f2 - A21 A11^{-1} f1`, with
    /// `A11^{-1} f1` returned alongside for reuse in recovery.
    pub fn condensed_rhs(&self, rhs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.split.interior.len() + self.split.interface.len(), rhs.len())?;
        let mut y1: Vec<f64> = self.split.interior.iter().map(|&r| rhs[r]).collect();
        self.solve_interior(&mut y1);
        let mut g2: Vec<f64> = self.split.interface.iter().map(|&r| rhs[r]).collect();
        self.a21.mul_acc(-1.0, &y1, &mut g2);
        Ok((g2, y1))
    }

    /// Rebuilds the full reduced solution from interface values:
    /// `u1 = A11^{-1} (f1 - A12 u2)`.
    pub fn recover(&self, rhs: &[f64], u2: &[f64]) -> Result<Vec<f64>> {
        check_len(self.split.interior.len() + self.split.interface.len(), rhs.len())?;
        check_len(self.interface_dim(), u2.len())?;
        let mut u1: Vec<f64> = self.split.interior.iter().map(|&r| rhs[r]).collect();
        self.a12.mul_acc(-1.0, u2, &mut u1);
        self.solve_interior(&mut u1);
        let mut x = vec![0.0; rhs.len()];
        for (k, &r) in self.split.interior.iter().enumerate() {
            x[r] = u1[k];
        }
        for (k, &r) in self.split.interface.iter().enumerate() {
            x[r] = u2[k];
        }
        Ok(x)
    }
}

impl LinearOperator for SchurComplement {
    fn dim(&self) -> usize {
        self.interface_dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_schur(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{split_blocks, Decomposition};
    use crate::stokes::{assemble_system, define_problem_1, define_problem_2};

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        // Gaussian elimination with partial pivoting, multiple rhs columns in rows of b
        let n = a.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
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

    #[test]
    fn schur_matches_dense_oracle() {
        let (mesh, problem) = define_problem_2(2).unwrap();
        let system = assemble_system(&mesh, &problem).unwrap();
        let decomp = Decomposition::regular(&mesh, 2).unwrap();
        let split = split_blocks(&system, &mesh, &decomp);
        let dense = system.matrix.to_dense();
        let pick = |rows: &[usize], cols: &[usize]| -> Vec<Vec<f64>> {
            rows.iter().map(|&i| cols.iter().map(|&j| dense[i][j]).collect()).collect()
        };
        let (i1, i2) = (split.interior.clone(), split.interface.clone());
        let a11 = pick(&i1, &i1);
        let a12 = pick(&i1, &i2);
        let a21 = pick(&i2, &i1);
        let a22 = pick(&i2, &i2);
        let x = dense_solve(a11, a12);
        let schur = SchurComplement::new(&system, split).unwrap();
        let n2 = i2.len();
        let mut col = vec![0.0; n2];
        for j in (0..n2).step_by(7) {
            let mut e = vec![0.0; n2];
            e[j] = 1.0;
            schur.apply_schur(&e, &mut col);
            for i in 0..n2 {
                let mut s = a22[i][j];
                for k in 0..i1.len() {
                    s -= a21[i][k] * x[k][j];
                }
                assert!((s - col[i]).abs() < 1e-10 * (1.0 + s.abs()), "S[{i},{j}]");
            }
        }
        assert!(schur.applications() > 0);
        assert_eq!(schur.applications(), schur.interior_solves());
    }

    #[test]
    fn recovery_reproduces_direct_solution() {
        let (mesh, problem) = define_problem_1(4).unwrap();
        let system = assemble_system(&mesh, &problem).unwrap();
        let decomp = Decomposition::regular(&mesh, 2).unwrap();
        let split = split_blocks(&system, &mesh, &decomp);
        let schur = SchurComplement::new(&system, split).unwrap();
        let direct = factor(&system.matrix, FactorKind::SymmetricIndefinite)
            .unwrap()
            .solve(&system.rhs)
            .unwrap();
        let (g2, _) = schur.condensed_rhs(&system.rhs).unwrap();
        let u2: Vec<f64> = schur.split().interface.iter().map(|&r| direct[r]).collect();
        // the exact interface solution satisfies S u2 = g2
        let mut s = vec![0.0; u2.len()];
        schur.apply_schur(&u2, &mut s);
        let gn = crate::linalg::norm2(&g2);
        let err: f64 = s.iter().zip(&g2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-9 * gn);
        let x = schur.recover(&system.rhs, &u2).unwrap();
        for (a, b) in x.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn single_subdomain_has_empty_interface() {
        let (mesh, problem) = define_problem_2(2).unwrap();
        let system = assemble_system(&mesh, &problem).unwrap();
        let decomp = Decomposition::regular(&mesh, 1).unwrap();
        let split = split_blocks(&system, &mesh, &decomp);
        let schur = SchurComplement::new(&system, split).unwrap();
        assert_eq!(schur.interface_dim(), 0);
        let x = schur.recover(&system.rhs, &[]).unwrap();
        assert!(system.relative_residual(&x) < 1e-10);
    }
}
