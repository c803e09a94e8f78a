//! Compressed sparse row storage for symmetric matrices.
//!
//! Both triangles are stored so that products are a single row sweep.
//! Symmetry is exact: every constructor either receives mirrored triplets
//! summed in the same order, or symmetrizes explicitly.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricSparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed in
    /// input order and exact zeros are dropped.
    ///
    /// Callers supply both `(i, j)` and `(j, i)` for off-diagonal entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((i, j, mut v)) = iter.next() {
            while let Some(&(i2, j2, v2)) = iter.peek() {
                if (i2, j2) != (i, j) {
                    break;
                }
                v += v2;
                iter.next();
            }
            if v != 0.0 {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymmetricSparseMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_triplets(n, Vec::new())
    }

    /// Sparse copy of a dense matrix, symmetrized as `(A + A^T) / 2`.
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = if i == j { a[(i, i)] } else { 0.5 * (a[(i, j)] + a[(j, i)]) };
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `Y = A X` for a block of `width` vectors stored row-interleaved:
    /// entry `(i, b)` lives at `i * width + b`.
    pub fn matvec_block(&self, x: &[f64], y: &mut [f64], width: usize) {
        assert_eq!(x.len(), self.n * width);
        assert_eq!(y.len(), self.n * width);
        for (i, yi) in y.chunks_exact_mut(width).enumerate() {
            yi.fill(0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[k];
                let xj = &x[self.col_idx[k] * width..(self.col_idx[k] + 1) * width];
                for (yb, xb) in yi.iter_mut().zip(xj) {
                    *yb += a * xb;
                }
            }
        }
    }

    /// `D A D` for a diagonal `D` given by its entries.
    pub fn scale_symmetric(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: d.len(),
            });
        }
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[k] = d[i] * self.values[k] * d[self.col_idx[k]];
            }
        }
        Ok(out)
    }

    /// Principal submatrix on the ascending index set `keep`.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (old_j, v) in self.row(old_i) {
                if map[old_j] != usize::MAX {
                    t.push((new_i, map[old_j], v));
                }
            }
        }
        Self::from_triplets(keep.len(), t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[(i, j)] = v;
            }
        }
        a
    }

    /// `max |A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// MatrixMarket coordinate format, `real symmetric`, lower triangle.
    pub fn to_matrix_market(&self) -> String {
        let lower: Vec<(usize, usize, f64)> = (0..self.n)
            .flat_map(|i| self.row(i).filter(move |&(j, _)| j <= i).map(move |(j, v)| (i, j, v)))
            .collect();
        let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        let _ = writeln!(s, "{} {} {}", self.n, self.n, lower.len());
        for (i, j, v) in lower {
            let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
        }
        s
    }

    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_matrix_market()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymmetricSparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SymmetricSparseMatrix::from_triplets(n, t)
    }

    #[test]
    fn duplicates_sum_and_zeros_vanish() {
        let a = SymmetricSparseMatrix::from_triplets(
            2,
            vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (0, 0, 3.0), (1, 1, 1.0), (1, 1, -1.0)],
        );
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn block_product_matches_columns() {
        let a = laplacian(5);
        let width = 3;
        let x: Vec<f64> = (0..5 * width).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut y = vec![0.0; 5 * width];
        a.matvec_block(&x, &mut y, width);
        for b in 0..width {
            let col: Vec<f64> = (0..5).map(|i| x[i * width + b]).collect();
            let mut out = vec![0.0; 5];
            a.matvec(&col, &mut out);
            for i in 0..5 {
                assert_eq!(out[i], y[i * width + b]);
            }
        }
    }

    #[test]
    fn restrict_and_scale() {
        let a = laplacian(4);
        let r = a.restrict(&[1, 2]);
        assert_eq!(r.to_dense(), DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        let s = a.scale_symmetric(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.get(1, 2), -6.0);
        assert_eq!(s.get(2, 1), -6.0);
        assert!(a.scale_symmetric(&[1.0]).is_err());
    }

    #[test]
    fn matrix_market_lower_triangle() {
        let mm = laplacian(3).to_matrix_market();
        let lines: Vec<&str> = mm.lines().collect();
        assert_eq!(lines[1], "3 3 5");
        assert_eq!(lines.len(), 7);
    }
}
