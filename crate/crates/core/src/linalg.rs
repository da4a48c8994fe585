//! Sparse-aware LU with partial pivoting.
//!
//! Stage matrices built from finite-difference operators are banded apart
//! from a few replaced constraint rows. [`ProfileMatrix`] stores each row as
//! one contiguous range of columns and elimination only touches entries
//! inside those ranges.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

/// Square matrix stored row by row, each row as the values on a contiguous
/// column range.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatrix {
    n: usize,
    start: Vec<usize>,
    vals: Vec<Vec<f64>>,
}

impl ProfileMatrix {
    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        assert_eq!(a.ncols(), n, "ProfileMatrix: matrix must be square");
        let mut m = ProfileMatrix::empty(n);
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            row.clear();
            row.extend(a.row(i).iter());
            m.set_row_slice(i, &row);
        }
        m
    }

    /// `shift I + scale A`.
    pub fn shifted_csr(a: &CsrMatrix<f64>, scale: f64, shift: f64) -> Self {
        let n = a.nrows();
        assert_eq!(a.ncols(), n, "ProfileMatrix: matrix must be square");
        let mut m = ProfileMatrix::empty(n);
        for i in 0..n {
            let row = a.row(i);
            let cols = row.col_indices();
            let (lo, hi) = match (cols.first(), cols.last()) {
                (Some(&a), Some(&b)) => (a.min(i), b.max(i)),
                _ => (i, i),
            };
            let mut v = vec![0.0; hi - lo + 1];
            for (&j, &x) in cols.iter().zip(row.values()) {
                v[j - lo] += scale * x;
            }
            v[i - lo] += shift;
            m.start[i] = lo;
            m.vals[i] = v;
        }
        m
    }

    fn empty(n: usize) -> Self {
        ProfileMatrix {
            n,
            start: (0..n).collect(),
            vals: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let s = self.start[i];
        if j < s {
            return 0.0;
        }
        self.vals[i].get(j - s).copied().unwrap_or(0.0)
    }

    /// Replace row `i` with the dense values `row`.
    pub fn set_row(&mut self, i: usize, row: &DVector<f64>) {
        self.set_row_slice(i, row.as_slice());
    }

    fn set_row_slice(&mut self, i: usize, row: &[f64]) {
        assert_eq!(row.len(), self.n, "ProfileMatrix: row length mismatch");
        match (row.iter().position(|v| *v != 0.0), row.iter().rposition(|v| *v != 0.0)) {
            (Some(lo), Some(hi)) => {
                self.start[i] = lo;
                self.vals[i] = row[lo..=hi].to_vec();
            }
            _ => {
                self.start[i] = i;
                self.vals[i].clear();
            }
        }
    }

    /// Solve `self · x = b`, consuming the matrix.
    pub fn solve(mut self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n, "solve: right-hand side length mismatch");
        let mut x: Vec<f64> = b.iter().copied().collect();
        // Rows enter the active set at their first stored column and leave
        // it when chosen as pivot; rows are never moved.
        let mut entering: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            if !self.vals[i].is_empty() {
                entering[self.start[i]].push(i);
            }
        }
        let mut active: Vec<usize> = Vec::new();
        let mut pivots = Vec::with_capacity(n);

        for (k, rows) in entering.iter().enumerate() {
            active.extend_from_slice(rows);
            let mut best = None;
            let mut pmax = 0.0;
            for (slot, &i) in active.iter().enumerate() {
                let v = self.vals[i].get(k - self.start[i]).map_or(0.0, |v| v.abs());
                if v > pmax {
                    best = Some(slot);
                    pmax = v;
                }
            }
            let Some(slot) = best else {
                return Err(Error::SingularMatrix { column: k });
            };
            let p = active.swap_remove(slot);
            pivots.push(p);
            let prow = std::mem::take(&mut self.vals[p]);
            let ps = self.start[p];
            let top = ps + prow.len() - 1;
            let pivot = prow[k - ps];
            let xp = x[p];
            for &i in &active {
                let s = self.start[i];
                let row = &mut self.vals[i];
                let l = row.get(k - s).copied().unwrap_or(0.0);
                if l == 0.0 {
                    continue;
                }
                let l = l / pivot;
                row[k - s] = 0.0;
                if row.len() < top + 1 - s {
                    row.resize(top + 1 - s, 0.0);
                }
                for (d, v) in row[k + 1 - s..=top - s].iter_mut().zip(&prow[k + 1 - ps..=top - ps]) {
                    *d -= l * v;
                }
                x[i] -= l * xp;
            }
            self.vals[p] = prow;
        }
        let mut sol = vec![0.0; n];
        for k in (0..n).rev() {
            let p = pivots[k];
            let row = &self.vals[p];
            let s = self.start[p];
            let mut acc = x[p];
            for (off, v) in row.iter().enumerate().skip(k + 1 - s) {
                acc -= v * sol[s + off];
            }
            sol[k] = acc / row[k - s];
        }
        Ok(DVector::from_vec(sol))
    }
}

/// Solve `A x = b`.
pub fn solve_linear(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    assert_eq!(a.ncols(), a.nrows(), "solve_linear: matrix must be square");
    assert_eq!(b.len(), a.nrows(), "solve_linear: right-hand side length mismatch");
    ProfileMatrix::from_dense(a).solve(b)
}

/// `A v` for a CSR matrix.
pub fn csr_apply(a: &CsrMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    assert_eq!(a.ncols(), v.len(), "csr_apply: dimension mismatch");
    DVector::from_iterator(
        a.nrows(),
        a.row_iter().map(|row| {
            row.col_indices().iter().zip(row.values()).map(|(&j, &x)| x * v[j]).sum::<f64>()
        }),
    )
}
