use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sparse vector with strictly increasing indices and non-zero weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dims: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Sorts entries, sums duplicates and drops zeros.
    pub fn new(dims: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, w) in entries {
            if i >= dims {
                return Err(Error::invalid(format!("index {i} out of range for {dims} dims")));
            }
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => merged.push((i, w)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        Ok(SparseVector {
            dims,
            entries: merged,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut acc = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn empty(cols: usize) -> Self {
        CsrMatrix {
            rows: 0,
            cols,
            indptr: vec![0],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    /// Validating constructor from raw CSR arrays.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        data: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != rows + 1 || indptr[0] != 0 {
            return Err(Error::invalid("indptr must have rows + 1 entries starting at 0"));
        }
        if indices.len() != data.len() || *indptr.last().unwrap() != indices.len() {
            return Err(Error::invalid("nnz disagrees with indptr"));
        }
        for r in 0..rows {
            let (lo, hi) = (indptr[r], indptr[r + 1]);
            if lo > hi {
                return Err(Error::invalid("indptr must be non-decreasing"));
            }
            let row = &indices[lo..hi];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&c| c >= cols) {
                return Err(Error::invalid(format!(
                    "row {r}: column indices must be strictly increasing and < {cols}"
                )));
            }
        }
        Ok(CsrMatrix {
            rows,
            cols,
            indptr,
            indices,
            data,
        })
    }

    pub fn from_rows(cols: usize, rows: &[SparseVector]) -> Result<Self> {
        let mut m = CsrMatrix::empty(cols);
        for r in rows {
            if r.dims() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: r.dims(),
                });
            }
            m.push_sorted_row(r.entries());
        }
        Ok(m)
    }

    /// Append a row whose entries are already sorted by column.
    pub(crate) fn push_sorted_row(&mut self, entries: &[(usize, f64)]) {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        for &(c, v) in entries {
            self.indices.push(c);
            self.data.push(v);
        }
        self.indptr.push(self.indices.len());
        self.rows += 1;
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

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[lo..hi], &self.data[lo..hi])
    }

    pub fn row_vector(&self, i: usize) -> SparseVector {
        let (idx, val) = self.row(i);
        SparseVector {
            dims: self.cols,
            entries: idx.iter().copied().zip(val.iter().copied()).collect(),
        }
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.row(i).1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> CsrMatrix {
        let mut m = CsrMatrix::empty(self.cols);
        for &i in indices {
            let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
            m.indices.extend_from_slice(&self.indices[lo..hi]);
            m.data.extend_from_slice(&self.data[lo..hi]);
            m.indptr.push(m.indices.len());
            m.rows += 1;
        }
        m
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                let slot = next[c];
                indices[slot] = r;
                data[slot] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            data,
        }
    }

    /// Multiply every stored value by `factor`.
    pub fn scaled(&self, factor: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= factor);
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| {
                let mut row = vec![0.0; self.cols];
                let (idx, val) = self.row(r);
                for (&c, &v) in idx.iter().zip(val) {
                    row[c] = v;
                }
                row
            })
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min_value(&self) -> Option<f64> {
        self.data.iter().copied().reduce(f64::min)
    }
}
