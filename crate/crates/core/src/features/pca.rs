use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::dense::DenseMatrix;
use crate::{Error, Result};

/// Principal axes of a centered data matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k x D`, row-major, orthonormal rows.
    pub components: Vec<f64>,
    /// Eigenvalues of the sample covariance (denominator N - 1).
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub total_variance: f64,
    /// Set when fewer than the requested components carry variance.
    pub rank_deficient: bool,
}

impl PcaModel {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.explained_variance.len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.components[i * d..(i + 1) * d]
    }

    pub fn retained_ratio(&self) -> f64 {
        self.explained_variance_ratio.iter().sum()
    }

    fn components_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.k(), self.n_features(), &self.components)
    }
}

/// Exact PCA by symmetric eigendecomposition.
///
/// Uses the `N x N` Gram matrix when there are fewer rows than columns and
/// the `D x D` covariance otherwise; both give the same axes.
pub fn fit_pca(x: &DenseMatrix, k: usize) -> Result<PcaModel> {
    let (n, d) = (x.rows(), x.cols());
    if n < 2 || k == 0 || k > (n - 1).min(d) {
        return Err(Error::invalid(format!(
            "k = {k} must be in 1..={} for a {n} x {d} matrix",
            (n.max(1) - 1).min(d)
        )));
    }
    if !x.all_finite() {
        return Err(Error::invalid("PCA input contains non-finite values"));
    }
    let mut mean = vec![0.0; d];
    for i in 0..n {
        mean.iter_mut().zip(x.row(i)).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = x.to_nalgebra();
    for mut row in centered.row_iter_mut() {
        row.iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
    }
    let denom = (n - 1) as f64;
    let total_variance = centered.iter().map(|v| v * v).sum::<f64>() / denom;

    let (values, mut axes) = if n <= d {
        let gram = &centered * centered.transpose();
        let (vals, vecs) = top_eigen(gram, k);
        // v = Xc^T u / sqrt(lambda)
        let mut axes = Vec::new();
        let mut kept = Vec::new();
        for (lambda, u) in vals.into_iter().zip(vecs) {
            if lambda <= 0.0 {
                break;
            }
            let v = centered.tr_mul(&nalgebra::DVector::from_vec(u)) / lambda.sqrt();
            axes.push(v.as_slice().to_vec());
            kept.push(lambda / denom);
        }
        (kept, axes)
    } else {
        let cov = centered.tr_mul(&centered) / denom;
        top_eigen(cov, k)
    };

    // Drop numerically null directions.
    let scale = values.first().copied().unwrap_or(0.0).max(total_variance);
    let tol = scale * 1e-12 * n.max(d) as f64;
    let keep = values.iter().take_while(|&&l| l > tol).count();
    let mut values = values;
    values.truncate(keep);
    axes.truncate(keep);
    let rank_deficient = keep < k;
    if rank_deficient {
        log::warn!("PCA: only {keep} of {k} requested components carry variance");
    }
    if keep == 0 {
        return Err(Error::invalid("PCA input has zero variance"));
    }

    orthonormalize(&mut axes);
    for axis in &mut axes {
        let pivot = axis
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            axis.iter_mut().for_each(|v| *v = -*v);
        }
    }

    let ratio = values
        .iter()
        .map(|l| if total_variance > 0.0 { l / total_variance } else { 0.0 })
        .collect();
    Ok(PcaModel {
        mean,
        components: axes.concat(),
        explained_variance: values,
        explained_variance_ratio: ratio,
        total_variance,
        rank_deficient,
    })
}

/// Eigenpairs of a symmetric matrix sorted by decreasing eigenvalue, top `k`.
fn top_eigen(m: DMatrix<f64>, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).as_slice().to_vec()))
        .unzip()
}

/// Modified Gram-Schmidt, applied twice for stability.
fn orthonormalize(vectors: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for i in 0..vectors.len() {
            let (done, rest) = vectors.split_at_mut(i);
            let v = &mut rest[0];
            for u in done.iter() {
                let proj: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= proj * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        }
    }
}

/// Project centered rows onto the components: `N x k`.
pub fn pca_transform(model: &PcaModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.cols() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            actual: x.cols(),
        });
    }
    let mut centered = x.to_nalgebra();
    for mut row in centered.row_iter_mut() {
        row.iter_mut().zip(&model.mean).for_each(|(v, m)| *v -= m);
    }
    let projected = centered * model.components_matrix().transpose();
    Ok(DenseMatrix::from_nalgebra(&projected))
}

/// Map projected rows back to the input space.
pub fn pca_reconstruct(model: &PcaModel, z: &DenseMatrix) -> Result<DenseMatrix> {
    if z.cols() != model.k() {
        return Err(Error::DimensionMismatch {
            expected: model.k(),
            actual: z.cols(),
        });
    }
    let mut back = z.to_nalgebra() * model.components_matrix();
    for mut row in back.row_iter_mut() {
        row.iter_mut().zip(&model.mean).for_each(|(v, m)| *v += m);
    }
    Ok(DenseMatrix::from_nalgebra(&back))
}
