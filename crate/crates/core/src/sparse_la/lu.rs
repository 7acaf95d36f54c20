//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Columns are eliminated in approximate-minimum-degree order of the
//! pattern of `M + M^T`. For each column the sparse triangular solve
//! `L x = M(:, j)` is driven by a depth-first search over the graph of `L`,
//! so the work is proportional to the floating-point operations. Pivot
//! rows are picked by magnitude with a preference for the diagonal entry,
//! which keeps symmetric matrices close to a symmetric elimination order
//! while still handling zero diagonal blocks of saddle-point systems.

use crate::error::{check_len, Error, Result};

use super::SparseMatrix;

/// Declared singular when the best pivot falls below this fraction of `||M||_inf`.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Spd,
    SymmetricIndefinite,
    General,
}

impl FactorKind {
    /// Diagonal pivot accepted when `|diag| >= threshold * max|column|`.
    fn diagonal_threshold(self) -> f64 {
        match self {
            FactorKind::Spd => 1e-3,
            FactorKind::SymmetricIndefinite => 0.1,
            FactorKind::General => 1.0,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct CscFactor {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Factors `P M Q = L U` of a square sparse matrix.
#[derive(Debug, Clone)]
pub struct Factorization {
    n: usize,
    kind: FactorKind,
    /// `col_perm[k]` is the original column eliminated at step `k`.
    col_perm: Vec<usize>,
    /// `row_pinv[i]` is the elimination step at which original row `i` pivoted.
    row_pinv: Vec<usize>,
    /// Unit lower factor, diagonal stored first in each column.
    l: CscFactor,
    /// Upper factor, diagonal stored last in each column.
    u: CscFactor,
    off_diagonal_pivots: usize,
}

pub fn factor(m: &SparseMatrix, kind: FactorKind) -> Result<Factorization> {
    Factorization::new(m, kind)
}

impl Factorization {
    pub fn new(m: &SparseMatrix, kind: FactorKind) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                n_rows: m.n_rows(),
                n_cols: m.n_cols(),
            });
        }
        if kind != FactorKind::General && !m.is_symmetric() {
            return Err(Error::NotSymmetric {
                asymmetry: m.asymmetry(),
            });
        }
        let n = m.n_rows();
        // column access: CSR of M^T is CSC of M
        let csc = if m.is_symmetric() { m.clone() } else { m.transpose() };
        let col_perm = fill_reducing_order(m);
        let threshold = SINGULAR_PIVOT_RATIO * m.norm_inf();
        let diag_tol = kind.diagonal_threshold();

        let mut l = CscFactor::default();
        let mut u = CscFactor::default();
        let est = 4 * m.nnz() + n;
        l.row_idx.reserve(est);
        l.values.reserve(est);
        u.row_idx.reserve(est);
        u.values.reserve(est);

        const UNSET: usize = usize::MAX;
        let mut pinv = vec![UNSET; n];
        let mut x = vec![0.0; n];
        let mut pattern: Vec<usize> = Vec::with_capacity(n);
        let mut mark = vec![UNSET; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut off_diagonal_pivots = 0;

        for (k, &col) in col_perm.iter().enumerate() {
            l.col_ptr.push(l.row_idx.len());
            u.col_ptr.push(u.row_idx.len());

            // symbolic: reach of M(:, col) in the graph of L, in topological order
            pattern.clear();
            let (lo, hi) = (csc.row_ptr()[col], csc.row_ptr()[col + 1]);
            for &start in &csc.col_idx()[lo..hi] {
                if mark[start] == k {
                    continue;
                }
                mark[start] = k;
                stack.push((start, 0));
                while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                    let step = pinv[node];
                    let mut descended = false;
                    if step != UNSET {
                        let (a, b) = (l.col_ptr[step] + 1, l.col_ptr[step + 1]);
                        while a + *next < b {
                            let child = l.row_idx[a + *next];
                            *next += 1;
                            if mark[child] != k {
                                mark[child] = k;
                                stack.push((child, 0));
                                descended = true;
                                break;
                            }
                        }
                    }
                    if !descended {
                        stack.pop();
                        pattern.push(node);
                    }
                }
            }

            // numeric: x = L \ M(:, col)
            for (&r, &v) in csc.col_idx()[lo..hi].iter().zip(&csc.values()[lo..hi]) {
                x[r] = v;
            }
            for &j in pattern.iter().rev() {
                let step = pinv[j];
                if step == UNSET {
                    continue;
                }
                let xj = x[j];
                if xj == 0.0 {
                    continue;
                }
                for p in l.col_ptr[step] + 1..l.col_ptr[step + 1] {
                    x[l.row_idx[p]] -= l.values[p] * xj;
                }
            }

            // pivot selection
            let mut best = UNSET;
            let mut best_abs = -1.0;
            for &i in pattern.iter().rev() {
                if pinv[i] == UNSET {
                    let a = x[i].abs();
                    if a > best_abs {
                        best_abs = a;
                        best = i;
                    }
                } else {
                    u.row_idx.push(pinv[i]);
                    u.values.push(x[i]);
                }
            }
            if best == UNSET || !(best_abs > threshold) {
                for &i in &pattern {
                    x[i] = 0.0;
                }
                return Err(Error::Singular {
                    index: k,
                    pivot: best_abs.max(0.0),
                });
            }
            if pinv[col] == UNSET && mark[col] == k && x[col].abs() >= diag_tol * best_abs {
                best = col;
            } else if best != col {
                off_diagonal_pivots += 1;
            }
            let pivot = x[best];
            u.row_idx.push(k);
            u.values.push(pivot);
            pinv[best] = k;
            l.row_idx.push(best);
            l.values.push(1.0);
            for &i in pattern.iter().rev() {
                if pinv[i] == UNSET {
                    l.row_idx.push(i);
                    l.values.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        l.col_ptr.push(l.row_idx.len());
        u.col_ptr.push(u.row_idx.len());
        for r in l.row_idx.iter_mut() {
            *r = pinv[*r];
        }
        Ok(Self {
            n,
            kind,
            col_perm,
            row_pinv: pinv,
            l,
            u,
            off_diagonal_pivots,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    /// Stored entries of `L` and `U` together.
    pub fn nnz(&self) -> usize {
        self.l.values.len() + self.u.values.len()
    }

    /// Number of steps where the pivot row differed from the diagonal.
    pub fn off_diagonal_pivots(&self) -> usize {
        self.off_diagonal_pivots
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rhs.iter().map(|b| self.solve(b)).collect()
    }

    /// Overwrites `b` with `M^{-1} b`. Panics on dimension mismatch.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n, "solve: right-hand side has wrong length");
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.row_pinv[i]] = bi;
        }
        let l = &self.l;
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in l.col_ptr[j] + 1..l.col_ptr[j + 1] {
                    y[l.row_idx[p]] -= l.values[p] * yj;
                }
            }
        }
        let u = &self.u;
        for j in (0..self.n).rev() {
            let diag = u.col_ptr[j + 1] - 1;
            y[j] /= u.values[diag];
            let yj = y[j];
            if yj != 0.0 {
                for p in u.col_ptr[j]..diag {
                    y[u.row_idx[p]] -= u.values[p] * yj;
                }
            }
        }
        for (k, &c) in self.col_perm.iter().enumerate() {
            b[c] = y[k];
        }
    }
}

fn fill_reducing_order(m: &SparseMatrix) -> Vec<usize> {
    let n = m.n_rows();
    if n == 0 {
        return Vec::new();
    }
    let control = amd::Control::default();
    match amd::order(n, m.row_ptr(), m.col_idx(), &control) {
        Ok((perm, _, _)) => perm,
        Err(_) => (0..n).collect(),
    }
}
