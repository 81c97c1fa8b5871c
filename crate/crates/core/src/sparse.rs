//! Sparse designs with implicit standardization.
//!
//! Centering a sparse column fills it in, so the standardized matrix is never
//! stored. Products with `(X - 1 mu^T) diag(1/s)` are formed from the raw
//! nonzeros plus a rank-one correction.

use crate::design::{Design, DenseMatrix};
use crate::error::{Error, Result};
use crate::model::{check_response, Dataset};

/// Raw sparse matrix in compressed-row form, as read from LIBSVM text.
/// Column indices are 0-based here and strictly increasing within a row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDesign {
    n: usize,
    p: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseDesign {
    /// Builds from per-row `(column, value)` lists with 0-based, strictly
    /// increasing columns below `p`.
    pub fn from_rows(p: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (k, &(j, v)) in row.iter().enumerate() {
                if j >= p {
                    return Err(Error::IndexOutOfRange { index: j + 1, len: p });
                }
                if k > 0 && row[k - 1].0 >= j {
                    return Err(Error::InvalidParameter("row indices must be strictly increasing".into()));
                }
                if !v.is_finite() {
                    return Err(Error::NonFiniteInput);
                }
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseDesign {
            n: rows.len(),
            p,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub(crate) fn from_csr(n: usize, p: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Self {
        SparseDesign {
            n,
            p,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as 0-based `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.p);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m.set(i, j, v);
            }
        }
        m
    }
}

/// Standardized view of a [`SparseDesign`], stored column-compressed.
#[derive(Debug, Clone)]
pub struct StandardizedSparse {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl StandardizedSparse {
    pub fn new(raw: &SparseDesign) -> Result<Self> {
        let (n, p) = (raw.n, raw.p);
        let mut counts = vec![0usize; p + 1];
        for &j in &raw.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..p {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0; raw.nnz()];
        let mut values = vec![0.0; raw.nnz()];
        for i in 0..n {
            for (j, v) in raw.row(i) {
                row_idx[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        let mut means = Vec::with_capacity(p);
        let mut scales = Vec::with_capacity(p);
        let nf = n as f64;
        for j in 0..p {
            let col = &values[col_ptr[j]..col_ptr[j + 1]];
            let zeros = (n - col.len()) as f64;
            let mean = col.iter().sum::<f64>() / nf;
            let ss = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() + zeros * mean * mean;
            let magnitude = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if ss == 0.0 || ss <= nf * (f64::EPSILON * magnitude).powi(2) {
                return Err(Error::ConstantColumn { column: j + 1 });
            }
            means.push(mean);
            scales.push((ss / nf).sqrt());
        }
        Ok(StandardizedSparse {
            n,
            col_ptr,
            row_idx,
            values,
            means,
            scales,
        })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    fn column_entries(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }
}

impl Design for StandardizedSparse {
    fn n_samples(&self) -> usize {
        self.n
    }

    fn n_features(&self) -> usize {
        self.means.len()
    }

    fn matvec(&self, beta: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut shift = 0.0;
        for (j, &b) in beta.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let w = b / self.scales[j];
            shift += self.means[j] * w;
            let (rows, vals) = self.column_entries(j);
            for (&i, &v) in rows.iter().zip(vals) {
                out[i] += v * w;
            }
        }
        out.iter_mut().for_each(|o| *o -= shift);
    }

    fn rmatvec(&self, v: &[f64], out: &mut [f64]) {
        let total: f64 = v.iter().sum();
        for (j, o) in out.iter_mut().enumerate() {
            let (rows, vals) = self.column_entries(j);
            let raw: f64 = rows.iter().zip(vals).map(|(&i, &x)| x * v[i]).sum();
            *o = (raw - self.means[j] * total) / self.scales[j];
        }
    }

    fn column_into(&self, j: usize, out: &mut [f64]) {
        let (mean, scale) = (self.means[j], self.scales[j]);
        out.iter_mut().for_each(|o| *o = -mean / scale);
        let (rows, vals) = self.column_entries(j);
        for (&i, &x) in rows.iter().zip(vals) {
            out[i] = (x - mean) / scale;
        }
    }
}

/// Sparse counterpart of [`crate::standardize_design`]; the response is
/// passed through unchanged.
pub fn standardize_sparse(x_raw: &SparseDesign, y_raw: &[f64]) -> Result<Dataset<StandardizedSparse>> {
    check_response(x_raw.n, x_raw.p, y_raw)?;
    let x = StandardizedSparse::new(x_raw)?;
    Ok(Dataset::from_parts_unchecked(x, y_raw.to_vec()))
}
