//! Threshold incomplete LU in row-wise IKJ form, no fill cap.
//!
//! Row `i` is eliminated against earlier rows of `U`; any multiplier or
//! fill entry smaller than `tau * ||a_i||_2` is dropped. The diagonal is
//! always kept. Saddle-point matrices have a zero pressure diagonal, so a
//! small diagonal shift can be applied to a range of rows beforehand.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::Range;

use crate::error::{check_len, Error, Result};
use crate::krylov::LinearOperator;
use crate::sparse_la::SparseMatrix;

/// Relative shift sizes tried in turn when a pivot vanishes.
const SHIFTS: [f64; 3] = [1e-12, 1e-8, 1e-4];

#[derive(Debug, Clone, PartialEq)]
pub struct IlutOptions {
    pub tau: f64,
    /// Rows that receive the diagonal shift `-shift * ||A||_inf`.
    pub shifted_rows: Range<usize>,
}

impl IlutOptions {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            shifted_rows: 0..0,
        }
    }

    pub fn with_shifted_rows(mut self, rows: Range<usize>) -> Self {
        self.shifted_rows = rows;
        self
    }
}

#[derive(Debug, Clone)]
pub struct IlutPrecon {
    n: usize,
    tau: f64,
    /// Strict lower part, unit diagonal implied.
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    /// Upper part, diagonal stored first in each row.
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    shift: f64,
}

pub fn ilut_factor(a: &SparseMatrix, options: &IlutOptions) -> Result<IlutPrecon> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    if !(options.tau >= 0.0) {
        return Err(Error::invalid(format!("drop threshold must be non-negative, got {}", options.tau)));
    }
    if options.shifted_rows.end > a.n_rows() {
        return Err(Error::invalid("shifted rows exceed the matrix size"));
    }
    if options.shifted_rows.is_empty() {
        return factor_with_shift(a, options.tau, 0..0, 0.0);
    }
    let norm = a.norm_inf();
    let mut last = None;
    for rel in SHIFTS {
        match factor_with_shift(a, options.tau, options.shifted_rows.clone(), rel * norm) {
            Ok(p) => return Ok(p),
            Err(e @ Error::ZeroPivot { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one shift attempted"))
}

fn factor_with_shift(a: &SparseMatrix, tau: f64, shifted: Range<usize>, shift: f64) -> Result<IlutPrecon> {
    let n = a.n_rows();
    let zero_tol = 1e-14 * a.norm_inf().max(f64::MIN_POSITIVE);
    let mut l_ptr = vec![0];
    let mut l_idx = Vec::new();
    let mut l_val: Vec<f64> = Vec::new();
    let mut u_ptr = vec![0];
    let mut u_idx: Vec<usize> = Vec::new();
    let mut u_val: Vec<f64> = Vec::new();

    let mut w = vec![0.0; n];
    let mut marked = vec![false; n];
    let mut pattern: Vec<usize> = Vec::new();
    let mut lower = BinaryHeap::new();

    for i in 0..n {
        let mut row_norm = 0.0f64;
        for (j, v) in a.row(i) {
            w[j] += v;
            row_norm += v * v;
            if !marked[j] {
                marked[j] = true;
                pattern.push(j);
                if j < i {
                    lower.push(Reverse(j));
                }
            }
        }
        if shifted.contains(&i) {
            w[i] -= shift;
            if !marked[i] {
                marked[i] = true;
                pattern.push(i);
            }
        }
        let drop = tau * row_norm.sqrt();

        while let Some(Reverse(k)) = lower.pop() {
            let wk = w[k];
            if wk == 0.0 {
                continue;
            }
            let mult = wk / u_val[u_ptr[k]];
            if mult.abs() < drop {
                w[k] = 0.0;
                continue;
            }
            w[k] = mult;
            for p in u_ptr[k] + 1..u_ptr[k + 1] {
                let j = u_idx[p];
                if !marked[j] {
                    marked[j] = true;
                    pattern.push(j);
                    if j < i {
                        lower.push(Reverse(j));
                    }
                }
                w[j] -= mult * u_val[p];
            }
        }

        pattern.sort_unstable();
        let diag = w[i];
        if diag.abs() <= zero_tol {
            return Err(Error::ZeroPivot { row: i });
        }
        u_idx.push(i);
        u_val.push(diag);
        for &j in &pattern {
            let v = w[j];
            if j < i {
                if v != 0.0 {
                    l_idx.push(j);
                    l_val.push(v);
                }
            } else if j > i && v != 0.0 && v.abs() >= drop {
                u_idx.push(j);
                u_val.push(v);
            }
            w[j] = 0.0;
            marked[j] = false;
        }
        pattern.clear();
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());
    }
    Ok(IlutPrecon {
        n,
        tau,
        l_ptr,
        l_idx,
        l_val,
        u_ptr,
        u_idx,
        u_val,
        shift,
    })
}

impl IlutPrecon {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Diagonal shift actually applied (absolute value), zero if none.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Stored entries of `L` (strict lower part).
    pub fn nnz_l(&self) -> usize {
        self.l_idx.len()
    }

    /// Stored entries of `U` including the diagonal.
    pub fn nnz_u(&self) -> usize {
        self.u_idx.len()
    }

    /// Off-diagonal entries of row `i` of `L` and `U`.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let l = (self.l_ptr[i]..self.l_ptr[i + 1]).map(|p| (self.l_idx[p], self.l_val[p]));
        let u = (self.u_ptr[i] + 1..self.u_ptr[i + 1]).map(|p| (self.u_idx[p], self.u_val[p]));
        l.chain(u)
    }

    pub fn apply_in_place(&self, x: &mut [f64]) {
        for i in 0..self.n {
            let mut s = x[i];
            for p in self.l_ptr[i]..self.l_ptr[i + 1] {
                s -= self.l_val[p] * x[self.l_idx[p]];
            }
            x[i] = s;
        }
        for i in (0..self.n).rev() {
            let d = self.u_ptr[i];
            let mut s = x[i];
            for p in d + 1..self.u_ptr[i + 1] {
                s -= self.u_val[p] * x[self.u_idx[p]];
            }
            x[i] = s / self.u_val[d];
        }
    }
}

/// `z = U^{-1} L^{-1} r`.
pub fn ilut_apply(p: &IlutPrecon, r: &[f64]) -> Result<Vec<f64>> {
    check_len(p.n, r.len())?;
    let mut z = r.to_vec();
    p.apply_in_place(&mut z);
    Ok(z)
}

impl LinearOperator for IlutPrecon {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        self.apply_in_place(y);
    }
}
