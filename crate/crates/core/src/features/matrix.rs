use serde::{Deserialize, Serialize};

use super::dense::DenseMatrix;
use crate::similarity::CsrMatrix;

/// Feature rows aligned with dataset order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FeatureMatrix {
    Sparse(CsrMatrix),
    Dense(DenseMatrix),
}

/// Borrowed view of one feature row.
#[derive(Clone, Copy, Debug)]
pub enum Row<'a> {
    Sparse(&'a [usize], &'a [f64]),
    Dense(&'a [f64]),
}

impl Row<'_> {
    pub fn dot(&self, w: &[f64]) -> f64 {
        match *self {
            Row::Sparse(idx, val) => idx.iter().zip(val).map(|(&c, v)| v * w[c]).sum(),
            Row::Dense(x) => x.iter().zip(w).map(|(a, b)| a * b).sum(),
        }
    }

    /// `w += a * row`
    pub fn axpy(&self, a: f64, w: &mut [f64]) {
        match *self {
            Row::Sparse(idx, val) => {
                for (&c, v) in idx.iter().zip(val) {
                    w[c] += a * v;
                }
            }
            Row::Dense(x) => w.iter_mut().zip(x).for_each(|(o, v)| *o += a * v),
        }
    }

    pub fn squared_norm(&self) -> f64 {
        match *self {
            Row::Sparse(_, val) => val.iter().map(|v| v * v).sum(),
            Row::Dense(x) => x.iter().map(|v| v * v).sum(),
        }
    }

    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match *self {
            Row::Sparse(idx, val) => idx.iter().zip(val).for_each(|(&c, &v)| f(c, v)),
            Row::Dense(x) => x.iter().enumerate().filter(|e| *e.1 != 0.0).for_each(|(c, &v)| f(c, v)),
        }
    }
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        match self {
            FeatureMatrix::Sparse(m) => m.rows(),
            FeatureMatrix::Dense(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            FeatureMatrix::Sparse(m) => m.cols(),
            FeatureMatrix::Dense(m) => m.cols(),
        }
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        match self {
            FeatureMatrix::Sparse(m) => {
                let (idx, val) = m.row(i);
                Row::Sparse(idx, val)
            }
            FeatureMatrix::Dense(m) => Row::Dense(m.row(i)),
        }
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        match self {
            FeatureMatrix::Sparse(m) => FeatureMatrix::Sparse(m.select_rows(indices)),
            FeatureMatrix::Dense(m) => FeatureMatrix::Dense(m.select_rows(indices)),
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            FeatureMatrix::Sparse(m) => m.all_finite(),
            FeatureMatrix::Dense(m) => m.all_finite(),
        }
    }

    pub fn has_negative(&self) -> bool {
        match self {
            FeatureMatrix::Sparse(m) => m.data().iter().any(|&v| v < 0.0),
            FeatureMatrix::Dense(m) => m.data().iter().any(|&v| v < 0.0),
        }
    }

    pub fn scaled(&self, factor: f64) -> FeatureMatrix {
        match self {
            FeatureMatrix::Sparse(m) => FeatureMatrix::Sparse(m.scaled(factor)),
            FeatureMatrix::Dense(m) => {
                let data = m.data().iter().map(|v| v * factor).collect();
                FeatureMatrix::Dense(DenseMatrix::from_vec(m.rows(), m.cols(), data).unwrap())
            }
        }
    }
}

impl From<CsrMatrix> for FeatureMatrix {
    fn from(m: CsrMatrix) -> Self {
        FeatureMatrix::Sparse(m)
    }
}

impl From<DenseMatrix> for FeatureMatrix {
    fn from(m: DenseMatrix) -> Self {
        FeatureMatrix::Dense(m)
    }
}
