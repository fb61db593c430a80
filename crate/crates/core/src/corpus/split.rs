use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::{Error, Result};

/// Deterministic train/test partition with `round(train_fraction * N)` train
/// records.
///
/// Stratified by category (largest-remainder allocation across classes) when
/// every group, including the unlabeled one, has at least two records;
/// otherwise a plain shuffle. Both halves keep the original record order.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset, train_fraction, seed)?;
    Ok((dataset.select(&train), dataset.select(&test)))
}

/// Record indices of the partition made by [`split`], each ascending.
pub fn split_indices(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::Empty("cannot split an empty dataset".into()));
    }
    let n = dataset.len();
    let n_train = (train_fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut groups: BTreeMap<Option<&str>, Vec<usize>> = BTreeMap::new();
    for (i, tx) in dataset.records().iter().enumerate() {
        groups.entry(tx.category.as_deref()).or_default().push(i);
    }

    let mut train_idx: Vec<usize> = if groups.values().all(|g| g.len() >= 2) {
        let quotas = allocate(
            &groups.values().map(Vec::len).collect::<Vec<_>>(),
            train_fraction,
            n_train,
        );
        let mut picked = Vec::with_capacity(n_train);
        for (members, quota) in groups.values_mut().zip(quotas) {
            members.shuffle(&mut rng);
            picked.extend_from_slice(&members[..quota]);
        }
        picked
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        all.truncate(n_train);
        all
    };
    train_idx.sort_unstable();

    let mut in_train = vec![false; n];
    for &i in &train_idx {
        in_train[i] = true;
    }
    let test_idx: Vec<usize> = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((train_idx, test_idx))
}

/// Largest-remainder apportionment of `total` across groups of the given sizes.
fn allocate(sizes: &[usize], fraction: f64, total: usize) -> Vec<usize> {
    let exact: Vec<f64> = sizes.iter().map(|&s| s as f64 * fraction).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    // larger remainder first, earlier group on ties
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut remaining = total.saturating_sub(assigned);
    for &g in order.iter().cycle().take(sizes.len() * 2) {
        if remaining == 0 {
            break;
        }
        if quotas[g] < sizes[g] {
            quotas[g] += 1;
            remaining -= 1;
        }
    }
    quotas
}
