use crate::features::FeatureMatrix;

/// Log priors (`k`) and per-class log feature likelihoods (`k x d`).
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveBayesWeights {
    pub log_prior: Vec<f64>,
    pub log_likelihood: Vec<f64>,
}

/// Closed-form multinomial naive Bayes with additive smoothing `alpha`.
pub(crate) fn train_naive_bayes(x: &FeatureMatrix, y: &[usize], k: usize, alpha: f64) -> NaiveBayesWeights {
    let d = x.cols();
    let mut feature_totals = vec![0.0; k * d];
    let mut class_counts = vec![0usize; k];
    for (i, &c) in y.iter().enumerate() {
        class_counts[c] += 1;
        x.row(i).axpy(1.0, &mut feature_totals[c * d..(c + 1) * d]);
    }
    let n = y.len() as f64;
    let log_prior = class_counts.iter().map(|&c| (c as f64 / n).ln()).collect();
    let mut log_likelihood = Vec::with_capacity(k * d);
    for c in 0..k {
        let row = &feature_totals[c * d..(c + 1) * d];
        let denom = (row.iter().sum::<f64>() + alpha * d as f64).ln();
        log_likelihood.extend(row.iter().map(|f| (f + alpha).ln() - denom));
    }
    NaiveBayesWeights {
        log_prior,
        log_likelihood,
    }
}

/// Joint log-likelihoods `log P(c) + sum_j x_j log P(j | c)`, row-major `n x k`.
pub(crate) fn joint_log_likelihood(x: &FeatureMatrix, nb: &NaiveBayesWeights) -> Vec<f64> {
    let (k, d) = (nb.log_prior.len(), x.cols());
    let mut out = Vec::with_capacity(x.rows() * k);
    for i in 0..x.rows() {
        let row = x.row(i);
        for c in 0..k {
            out.push(nb.log_prior[c] + row.dot(&nb.log_likelihood[c * d..(c + 1) * d]));
        }
    }
    out
}
