//! Compressed sparse row storage.

use std::io::Write;

use crate::error::{check_len, Error, Result};

/// A finalized sparse matrix in CSR form.
///
/// Column indices within a row are strictly increasing, so duplicate
/// `(row, col)` pairs never survive assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

/// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
pub fn assemble(triplets: &[(usize, usize, f64)], n_rows: usize, n_cols: usize) -> Result<SparseMatrix> {
    SparseMatrix::from_triplets(n_rows, n_cols, triplets)
}

impl SparseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            symmetric: n_rows == n_cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
            symmetric: true,
        }
    }

    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::IndexOutOfBounds {
                    row: r,
                    col: c,
                    n_rows,
                    n_cols,
                });
            }
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        // bucket by row, then sort and merge each row
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let p = next[r];
            cols[p] = c;
            vals[p] = v;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..n_rows {
            let (lo, hi) = (counts[r], counts[r + 1]);
            order.clear();
            order.extend(lo..hi);
            order.sort_unstable_by_key(|&p| cols[p]);
            let mut last = usize::MAX;
            for &p in &order {
                if cols[p] == last {
                    *values.last_mut().unwrap() += vals[p];
                } else {
                    col_idx.push(cols[p]);
                    values.push(vals[p]);
                    last = cols[p];
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        })
    }

    /// Flags the matrix as symmetric after checking
    /// `max|M - M^T| <= 1e-12 * max|M|`.
    pub fn into_symmetric(mut self) -> Result<Self> {
        if self.n_rows != self.n_cols {
            return Err(Error::NotSquare {
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        let asym = self.asymmetry();
        if asym > 1e-12 * self.max_abs() {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        self.symmetric = true;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(col, value)` over the stored entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(p) => self.values[lo + p],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cols, x.len())?;
        let mut y = vec![0.0; self.n_rows];
        self.mul_acc(1.0, x, &mut y);
        Ok(y)
    }

    /// `y += alpha * M x`. Panics on dimension mismatch.
    pub fn mul_acc(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "matvec: x has wrong length");
        assert_eq!(y.len(), self.n_rows, "matvec: y has wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = 0.0;
            for p in lo..hi {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi += alpha * s;
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                let p = next[j];
                col_idx[p] = i;
                values[p] = v;
                next[j] += 1;
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr: counts,
            col_idx,
            values,
            symmetric: self.symmetric,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |M - M^T|` over all entries.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - self.get(j, i)).abs());
        }
        worst
    }

    /// Extracts `M[rows, cols]`; `rows` and `cols` are lists of indices in
    /// the order they should appear in the result.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut col_pos = vec![usize::MAX; self.n_cols];
        for (k, &c) in cols.iter().enumerate() {
            col_pos[c] = k;
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for &r in rows {
            buf.clear();
            buf.extend(self.row(r).filter_map(|(c, v)| {
                let k = col_pos[c];
                (k != usize::MAX).then_some((k, v))
            }));
            buf.sort_unstable_by_key(|e| e.0);
            for &(k, v) in &buf {
                col_idx.push(k);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            n_rows: rows.len(),
            n_cols: cols.len(),
            row_ptr,
            col_idx,
            values,
            symmetric: self.symmetric && rows == cols,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, j, v) in self.triplets() {
            d[i][j] += v;
        }
        d
    }

    /// Writes the matrix in MatrixMarket coordinate format (1-based).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let kind = if self.symmetric { "symmetric" } else { "general" };
        writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
        let entries: Vec<_> = self
            .triplets()
            .filter(|&(i, j, _)| !self.symmetric || i >= j)
            .collect();
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, entries.len())?;
        for (i, j, v) in entries {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed() {
        let m = assemble(&[(0, 0, 1.0), (0, 0, 2.0)], 1, 1).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
    }

    #[test]
    fn empty_triplets_give_zero_matrix() {
        let m = assemble(&[], 2, 2).unwrap();
        assert_eq!(m.matvec(&[1.0, -4.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_matvec() {
        let m = assemble(&[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)], 3, 3).unwrap();
        assert_eq!(m.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn diagonal_matvec() {
        let m = SparseMatrix::from_diagonal(&[2.0, 3.0]);
        assert_eq!(m.matvec(&[1.0, 1.0]).unwrap(), vec![2.0, 3.0]);
        assert_eq!(m.matvec(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn out_of_bounds_and_dimension_errors() {
        assert!(matches!(
            assemble(&[(2, 0, 1.0)], 2, 2),
            Err(Error::IndexOutOfBounds { row: 2, .. })
        ));
        let m = SparseMatrix::identity(3);
        assert!(matches!(
            m.matvec(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn symmetric_flag_is_checked() {
        let m = assemble(&[(0, 1, 1.0), (1, 0, 1.0 + 1e-6)], 2, 2).unwrap();
        assert!(matches!(m.into_symmetric(), Err(Error::NotSymmetric { .. })));
        let m = assemble(&[(0, 1, 1.0), (1, 0, 1.0)], 2, 2).unwrap();
        assert!(m.into_symmetric().unwrap().is_symmetric());
    }

    #[test]
    fn submatrix_and_transpose() {
        let m = assemble(&[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0), (2, 0, 4.0)], 3, 3).unwrap();
        let s = m.submatrix(&[2, 0], &[0, 2]);
        assert_eq!(s.to_dense(), vec![vec![4.0, 0.0], vec![1.0, 2.0]]);
        let t = m.transpose();
        assert_eq!(t.get(2, 0), 2.0);
        assert_eq!(t.get(0, 2), 4.0);
    }

    #[test]
    fn matrix_market_dump() {
        let m = assemble(&[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0)], 2, 2)
            .unwrap()
            .into_symmetric()
            .unwrap();
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real symmetric");
        assert_eq!(lines[1], "2 2 2");
        assert!(lines[2].starts_with("1 1 "));
        assert!(lines[3].starts_with("2 1 "));
    }

    fn random_matrix(seed: u64, n: usize) -> (SparseMatrix, Vec<Vec<f64>>) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut trip = Vec::new();
        for _ in 0..(3 * n) {
            trip.push((rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(-1.0..1.0)));
        }
        let mut dense = vec![vec![0.0; n]; n];
        for &(i, j, v) in &trip {
            dense[i][j] += v;
        }
        (assemble(&trip, n, n).unwrap(), dense)
    }

    #[test]
    fn matvec_matches_dense_product() {
        let (m, dense) = random_matrix(7, 10);
        let x: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin()).collect();
        let y = m.matvec(&x).unwrap();
        for i in 0..10 {
            let expect: f64 = (0..10).map(|j| dense[i][j] * x[j]).sum();
            let scale = (0..10).map(|j| (dense[i][j] * x[j]).abs()).sum::<f64>().max(1e-300);
            assert!((y[i] - expect).abs() <= 1e-13 * scale);
        }
    }

    proptest! {
        #[test]
        fn matvec_is_linear(seed in 0u64..1000, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let (m, _) = random_matrix(seed, 12);
            let x: Vec<f64> = (0..12).map(|i| ((i as u64 + seed) as f64).cos()).collect();
            let y: Vec<f64> = (0..12).map(|i| ((i as u64 * 3 + seed) as f64).sin()).collect();
            let comb: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
            let lhs = m.matvec(&comb).unwrap();
            let mx = m.matvec(&x).unwrap();
            let my = m.matvec(&y).unwrap();
            let scale = m.norm_inf() * (alpha.abs() + beta.abs()).max(1.0);
            for i in 0..12 {
                prop_assert!((lhs[i] - (alpha * mx[i] + beta * my[i])).abs() <= 1e-12 * scale);
            }
        }
    }
}
