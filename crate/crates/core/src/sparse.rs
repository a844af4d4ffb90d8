//! Compressed sparse row storage and the products the solver needs.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row count above which products are split across the rayon pool.
const PARALLEL_ROWS: usize = 4096;

/// A sparse matrix in compressed-row form.
///
/// Construction sums duplicate coordinates and drops entries that end up
/// exactly zero, so every stored value is nonzero and every `(row, col)`
/// pair appears once.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// An `nrows x ncols` matrix with no stored entries.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from coordinate triples.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidInput(format!(
                    "entry ({r}, {c}) outside a {nrows}x{ncols} matrix"
                )));
            }
            if v.is_nan() {
                return Err(Error::InvalidInput(format!("NaN entry at ({r}, {c})")));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            let (r, c, _) = sorted[i];
            let mut sum = 0.0;
            while i < sorted.len() && sorted[i].0 == r && sorted[i].1 == c {
                sum += sorted[i].2;
                i += 1;
            }
            if sum != 0.0 {
                col_idx.push(c);
                values.push(sum);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from a dense row-major slice of rows.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::InvalidInput("ragged dense matrix".into()));
            }
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// Iterates over stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let dst = next[c];
                col_idx[dst] = r;
                values[dst] = v;
                next[c] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Stacks `self` on top of `below`.
    pub fn vstack(&self, below: &SparseMatrix) -> Result<SparseMatrix> {
        if self.ncols != below.ncols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns over {} columns",
                self.ncols, below.ncols
            )));
        }
        let mut row_ptr = self.row_ptr.clone();
        let offset = self.nnz();
        row_ptr.extend(below.row_ptr[1..].iter().map(|p| p + offset));
        let mut col_idx = self.col_idx.clone();
        col_idx.extend_from_slice(&below.col_idx);
        let mut values = self.values.clone();
        values.extend_from_slice(&below.values);
        Ok(SparseMatrix {
            nrows: self.nrows + below.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Returns `diag(row_scale) * self * diag(col_scale)`.
    pub fn scale(&self, row_scale: &[f64], col_scale: &[f64]) -> SparseMatrix {
        let mut out = self.clone();
        for (r, rs) in row_scale.iter().enumerate().take(self.nrows) {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.values[k] *= rs * col_scale[self.col_idx[k]];
            }
        }
        out
    }

    /// Infinity norm of every row.
    pub fn row_inf_norms(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|r| self.row(r).1.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// Infinity norm of every column.
    pub fn col_inf_norms(&self) -> Vec<f64> {
        let mut norms = vec![0.0f64; self.ncols];
        for (&c, &v) in self.col_idx.iter().zip(&self.values) {
            norms[c] = norms[c].max(v.abs());
        }
        norms
    }

    /// Computes `out = self * v`.
    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        let row_dot = |r: usize| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(|(&c, &a)| a * v[c]).sum::<f64>()
        };
        if self.nrows >= PARALLEL_ROWS {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(r, o)| *o = row_dot(r));
        } else {
            for (r, o) in out.iter_mut().enumerate() {
                *o = row_dot(r);
            }
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        self.mul_vec_into(v, &mut out);
        out
    }

    /// Sparse times dense, with both dense operands stored row-major with
    /// `width` columns. Each output entry is accumulated in the same order
    /// as [`SparseMatrix::mul_vec_into`] would for that column.
    pub fn mul_dense_into(&self, dense: &[f64], width: usize, out: &mut [f64]) {
        debug_assert_eq!(dense.len(), self.ncols * width);
        debug_assert_eq!(out.len(), self.nrows * width);
        if width == 0 {
            return;
        }
        let fill_row = |r: usize, dst: &mut [f64]| {
            let (cols, vals) = self.row(r);
            for (b, o) in dst.iter_mut().enumerate() {
                *o = cols
                    .iter()
                    .zip(vals)
                    .map(|(&c, &a)| a * dense[c * width + b])
                    .sum::<f64>();
            }
        };
        if self.nrows >= PARALLEL_ROWS {
            out.par_chunks_mut(width)
                .enumerate()
                .for_each(|(r, dst)| fill_row(r, dst));
        } else {
            for (r, dst) in out.chunks_mut(width).enumerate() {
                fill_row(r, dst);
            }
        }
    }

    /// Dense row-major copy, mostly for tests and diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            dense[r][c] = v;
        }
        dense
    }
}
