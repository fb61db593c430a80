mod common;

use common::{dense, nb_oracle, sparse};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trxcat::features::FeatureMatrix;
use trxcat::models::{
    grid_search, softmax_gradient, softmax_objective, train, ForestParams, LogisticParams, ModelParams, ModelSpec,
    ParamGrid, Schedule, SvmParams,
};
use trxcat::similarity::{CsrMatrix, SparseVector};

#[test]
fn naive_bayes_toy_instance() {
    // docs [a] -> A twice, [b] -> B once, vocabulary {a, b}
    let rows = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    let m = train(&sparse(&rows), &["A", "A", "B"], &ModelSpec::naive_bayes(1.0)).unwrap();
    let query = sparse(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert_eq!(m.predict(&query).unwrap(), ["A", "B"]);
    let scores = m.predict_scores(&query).unwrap();
    // P(A)=2/3, P(a|A)=3/4, P(b|A)=1/4; P(B)=1/3, P(a|B)=1/3, P(b|B)=2/3
    let pa = (2.0 / 3.0 * 0.75) / (2.0 / 3.0 * 0.75 + 1.0 / 3.0 * (1.0 / 3.0));
    let pb = (1.0 / 3.0 * (2.0 / 3.0)) / (2.0 / 3.0 * 0.25 + 1.0 / 3.0 * (2.0 / 3.0));
    assert!((scores[0] - pa).abs() <= 1e-12);
    assert!((scores[3] - pb).abs() <= 1e-12);
    for row in scores.chunks(2) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn naive_bayes_exhaustive_small_grids() {
    // every 3 x 2 count matrix over {0,1,2} with every two-class labelling
    let mut checked = 0;
    for code in 0..3usize.pow(6) {
        let mut c = code;
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                (0..2)
                    .map(|_| {
                        let v = (c % 3) as f64;
                        c /= 3;
                        v
                    })
                    .collect()
            })
            .collect();
        for labels in 1..7usize {
            let y: Vec<usize> = (0..3).map(|i| (labels >> i) & 1).collect();
            let names: Vec<&str> = y.iter().map(|&l| if l == 0 { "A" } else { "B" }).collect();
            let x = dense(&rows);
            let m = train(&x, &names, &ModelSpec::naive_bayes(1.0)).unwrap();
            let scores = m.predict_scores(&x).unwrap();
            let pred = m.predict_indices(&x).unwrap();
            for (i, row) in rows.iter().enumerate() {
                let oracle = nb_oracle(&rows, &y, 2, 1.0, row);
                assert!((scores[2 * i] - oracle[0]).abs() <= 1e-12);
                assert!((scores[2 * i + 1] - oracle[1]).abs() <= 1e-12);
                if (oracle[0] - oracle[1]).abs() > 1e-9 {
                    assert_eq!(pred[i], usize::from(oracle[1] > oracle[0]));
                }
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 729 * 6 * 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn naive_bayes_matches_oracle(
        counts in prop::collection::vec(prop::collection::vec(0u8..4, 1..=5), 2..=10),
        labels in prop::collection::vec(0usize..3, 10),
        alpha in 0.1f64..2.0,
    ) {
        let d = counts[0].len();
        let rows: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().cycle().take(d).map(|&v| v as f64).collect()).collect();
        let y: Vec<usize> = labels[..rows.len()].to_vec();
        prop_assume!(y.iter().any(|&l| l != y[0]));
        // relabel to a dense 0..k range, which is also the model's label order
        let mut present: Vec<usize> = y.clone();
        present.sort();
        present.dedup();
        let y: Vec<usize> = y.iter().map(|l| present.iter().position(|p| p == l).unwrap()).collect();
        let names: Vec<String> = y.iter().map(|l| format!("c{l}")).collect();
        let m = train(&dense(&rows), &names, &ModelSpec::naive_bayes(alpha)).unwrap();
        let scores = m.predict_scores(&dense(&rows)).unwrap();
        let k = present.len();
        for (i, row) in rows.iter().enumerate() {
            let oracle = nb_oracle(&rows, &y, k, alpha, row);
            for c in 0..k {
                prop_assert!((scores[i * k + c] - oracle[c]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn naive_bayes_rejects_negative_features() {
    let x = dense(&[vec![-1.0], vec![1.0]]);
    assert!(train(&x, &["A", "B"], &ModelSpec::naive_bayes(1.0)).is_err());
}

#[test]
fn single_class_and_bad_inputs_are_errors() {
    let x = dense(&[vec![1.0], vec![2.0]]);
    assert!(train(&x, &["A", "A"], &ModelSpec::linear_svm()).is_err());
    assert!(train(&x, &["A"], &ModelSpec::linear_svm()).is_err());
    let bad = dense(&[vec![f64::NAN], vec![2.0]]);
    assert!(train(&bad, &["A", "B"], &ModelSpec::logistic_regression()).is_err());
    let m = train(&x, &["A", "B"], &ModelSpec::logistic_regression()).unwrap();
    assert!(m.predict(&dense(&[vec![1.0, 2.0]])).is_err());
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let x = dense(&rows);
    let y = [0usize, 1, 2, 1, 0];
    let w: Vec<f64> = (0..12).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let lambda = 0.3;
    let (gw, gb) = softmax_gradient(&x, &y, &w, &b, lambda);
    let h = 1e-6;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
    for j in 0..w.len() {
        let (mut p, mut m) = (w.clone(), w.clone());
        p[j] += h;
        m[j] -= h;
        let num = (softmax_objective(&x, &y, &p, &b, lambda) - softmax_objective(&x, &y, &m, &b, lambda)) / (2.0 * h);
        assert!(rel(gw[j], num) < 1e-4, "w[{j}]: {} vs {num}", gw[j]);
    }
    for c in 0..3 {
        let (mut p, mut m) = (b.clone(), b.clone());
        p[c] += h;
        m[c] -= h;
        let num = (softmax_objective(&x, &y, &w, &p, lambda) - softmax_objective(&x, &y, &w, &m, lambda)) / (2.0 * h);
        assert!(rel(gb[c], num) < 1e-4);
    }
}

fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<&'static str>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let (cx, label) = if i % 2 == 0 { (2.0, "pos") } else { (-2.0, "neg") };
        rows.push(vec![cx + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        y.push(label);
    }
    (rows, y)
}

#[test]
fn logistic_separates_blobs() {
    let (rows, y) = blobs(200, 1);
    let x = dense(&rows);
    let m = train(&x, &y, &ModelSpec::logistic_regression()).unwrap();
    assert_eq!(m.predict(&x).unwrap(), y);
    let scores = m.predict_scores(&x).unwrap();
    for row in scores.chunks(2) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn zero_weights_give_uniform_scores_and_bias_decides_empty_rows() {
    let x = sparse(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
    let mut m = train(&x, &["a", "b", "c"], &ModelSpec::logistic_regression()).unwrap();
    let empty = sparse(&[vec![0.0, 0.0]]);
    if let trxcat::models::ModelState::Linear(w) = &mut m.state {
        w.weights.iter_mut().for_each(|v| *v = 0.0);
        w.bias = vec![0.0; 3];
    }
    for s in m.predict_scores(&x).unwrap() {
        assert!((s - 1.0 / 3.0).abs() <= 1e-12);
    }
    if let trxcat::models::ModelState::Linear(w) = &mut m.state {
        w.bias = vec![-1.0, 2.0, 0.5];
    }
    assert_eq!(m.predict(&empty).unwrap(), ["b"]);
}

#[test]
fn svm_objective_decreases() {
    let (rows, y) = blobs(300, 2);
    let spec = ModelSpec::new(
        ModelParams::LinearSvm(SvmParams {
            c: 1.0,
            schedule: Schedule {
                epochs: 20,
                ..Default::default()
            },
        }),
        4,
    );
    let m = train(&dense(&rows), &y, &spec).unwrap();
    let trace = m.objective_trace();
    // three-epoch moving average is non-increasing after the first epoch
    let smooth: Vec<f64> = trace[1..].windows(3).map(|w| w.iter().sum::<f64>() / 3.0).collect();
    for w in smooth.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{trace:?}");
    }
    assert!(trace.last().unwrap() < &trace[0]);
}

fn random_tfidf(n: usize, d: usize, seed: u64) -> (FeatureMatrix, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vecs = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let class = rng.gen_range(0..3usize);
        let mut entries: Vec<(usize, f64)> = vec![(class, 1.0 + rng.gen::<f64>())];
        for _ in 0..3 {
            entries.push((rng.gen_range(3..d), rng.gen::<f64>()));
        }
        let v = SparseVector::new(d, entries).unwrap();
        let norm = v.norm();
        let v = SparseVector::new(d, v.entries().iter().map(|&(i, w)| (i, w / norm)).collect()).unwrap();
        vecs.push(v);
        y.push(format!("k{class}"));
    }
    (CsrMatrix::from_rows(d, &vecs).unwrap().into(), y)
}

#[test]
fn scaling_features_with_matching_regularization_is_exact() {
    let (x, y) = random_tfidf(300, 40, 5);
    let x2 = x.scaled(2.0);
    let lr = |lambda| {
        ModelSpec::new(
            ModelParams::LogisticRegression(LogisticParams {
                lambda,
                schedule: Schedule::default(),
            }),
            7,
        )
    };
    let a = train(&x, &y, &lr(1e-3)).unwrap();
    let b = train(&x2, &y, &lr(4e-3)).unwrap();
    assert_eq!(a.predict(&x).unwrap(), b.predict(&x2).unwrap());
    assert_eq!(a.predict_scores(&x).unwrap(), b.predict_scores(&x2).unwrap());

    let svm = |c| {
        ModelSpec::new(
            ModelParams::LinearSvm(SvmParams {
                c,
                schedule: Schedule::default(),
            }),
            7,
        )
    };
    let a = train(&x, &y, &svm(1.0)).unwrap();
    let b = train(&x2, &y, &svm(0.25)).unwrap();
    assert_eq!(a.predict(&x).unwrap(), b.predict(&x2).unwrap());
    assert_eq!(a.predict_scores(&x).unwrap(), b.predict_scores(&x2).unwrap());
}

#[test]
fn single_full_tree_memorizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..150).map(|_| (0..6).map(|_| rng.gen_range(0..4) as f64).collect()).collect();
    // consistent labels: a function of the row, with no clean linear structure
    let y: Vec<String> = rows
        .iter()
        .map(|r| format!("c{}", (r[0] as usize * 7 + r[3] as usize * 3 + r[5] as usize) % 4))
        .collect();
    let spec = ModelSpec::new(
        ModelParams::RandomForest(ForestParams {
            n_trees: 1,
            max_depth: None,
            min_leaf: 1,
        }),
        1,
    );
    for x in [dense(&rows), sparse(&rows)] {
        let m = train(&x, &y, &spec).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
    }
}

#[test]
fn forest_votes_sum_to_one() {
    let (rows, y) = blobs(120, 8);
    let spec = ModelSpec::new(
        ModelParams::RandomForest(ForestParams {
            n_trees: 15,
            max_depth: Some(6),
            min_leaf: 2,
        }),
        2,
    );
    let x = dense(&rows);
    let m = train(&x, &y, &spec).unwrap();
    for row in m.predict_scores(&x).unwrap().chunks(2) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
    let acc = m.predict(&x).unwrap().iter().zip(&y).filter(|(a, b)| a == b).count();
    assert!(acc >= 115);
}

#[test]
fn grid_prefers_fitting_point_on_separable_data() {
    let (x, y) = random_tfidf(240, 30, 9);
    let mut grid = ParamGrid::default();
    grid.0.insert("c".into(), vec![1e-6.into(), 1.0.into()]);
    let (best, report) = grid_search(&x, &y, &ModelSpec::linear_svm(), &grid, 3).unwrap();
    assert_eq!(report.rows.len(), 2 * 3);
    match best.params {
        ModelParams::LinearSvm(p) => assert_eq!(p.c, 1.0),
        _ => panic!(),
    }
    let s = report.points.iter().map(|p| p.mean_weighted_f1.unwrap()).collect::<Vec<_>>();
    assert!(s[1] > s[0], "{s:?}");
}

#[test]
fn grid_of_one_point() {
    let (x, y) = random_tfidf(60, 10, 2);
    let mut grid = ParamGrid::default();
    grid.0.insert("c".into(), vec![0.5.into()]);
    let (best, report) = grid_search(&x, &y, &ModelSpec::linear_svm(), &grid, 2).unwrap();
    assert_eq!(report.best, 0);
    assert_eq!(report.rows.len(), 2);
    assert!(matches!(best.params, ModelParams::LinearSvm(ref p) if p.c == 0.5));
    grid.0.insert("gamma".into(), vec![1.0.into()]);
    assert!(grid_search(&x, &y, &ModelSpec::linear_svm(), &grid, 2).is_err());
    assert_eq!(ParamGrid::svm_default().points().len(), 8);
}

#[test]
fn degenerate_folds_are_flagged() {
    // the minority class has a single row, so two of three training folds hold it
    let mut rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, 1.0]).collect();
    rows.push(vec![50.0, 0.0]);
    let mut y = vec!["maj"; 8];
    y.push("min");
    let x = dense(&rows);
    let mut grid = ParamGrid::default();
    grid.0.insert("c".into(), vec![1.0.into()]);
    let (_, report) = grid_search(&x, &y, &ModelSpec::linear_svm(), &grid, 3).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.points[0].degenerate_folds, 1);
    assert!(report.rows.iter().any(|r| r.degenerate && r.weighted_f1.is_none()));
}
