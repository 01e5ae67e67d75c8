use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Sparse matrix in CSR layout. Within each row, column indices are strictly
/// increasing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(col, value)` lists; each list must be sorted by
    /// column with no duplicates.
    pub fn from_row_entries(rows: usize, cols: usize, entries: &[Vec<(usize, f64)>]) -> Result<Self> {
        if entries.len() != rows {
            return Err(Error::Dimension(format!(
                "{} row lists for {rows} rows",
                entries.len()
            )));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in entries {
            let mut prev: Option<usize> = None;
            for &(col, value) in row {
                if col >= cols {
                    return Err(Error::Dimension(format!("column {col} out of range {cols}")));
                }
                if let Some(p) = prev {
                    if col <= p {
                        return Err(Error::Parameter(format!(
                            "row entries not strictly sorted at column {col}"
                        )));
                    }
                }
                prev = Some(col);
                indices.push(col);
                data.push(value);
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix { rows, cols, indptr, indices, data })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row_iter(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let start = self.indptr[i];
        let end = self.indptr[i + 1];
        self.indices[start..end].iter().copied().zip(self.data[start..end].iter().copied())
    }

    /// Stored value at `(i, j)`, or 0.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let start = self.indptr[i];
        let end = self.indptr[i + 1];
        match self.indices[start..end].binary_search(&j) {
            Ok(pos) => self.data[start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row_iter(i) {
                out.set(i, j, v);
            }
        }
        out
    }

    /// Sparse-dense product `self * x`.
    pub fn spmm(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != x.rows() {
            return Err(Error::Dimension(format!(
                "spmm {}x{} by {}x{}",
                self.rows,
                self.cols,
                x.rows(),
                x.cols()
            )));
        }
        let cols = x.cols();
        let mut out = DenseMatrix::zeros(self.rows, cols);
        for i in 0..self.rows {
            let start = self.indptr[i];
            let end = self.indptr[i + 1];
            let orow = out.row_mut(i);
            for idx in start..end {
                let j = self.indices[idx];
                let v = self.data[idx];
                let xrow = x.row(j);
                for (o, &xv) in orow.iter_mut().zip(xrow) {
                    *o += v * xv;
                }
            }
        }
        out.ensure_finite("spmm")?;
        Ok(out)
    }
}
