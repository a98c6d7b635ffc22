use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array2, ArrayView2};

use fedeploy_mobility::ClientDataset;

use crate::mlp::Real;

/// Dense train and test matrices of one client.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientData<T> {
    pub user_id: usize,
    pub x_train: Array2<T>,
    pub y_train: Vec<usize>,
    pub x_test: Array2<T>,
    pub y_test: Vec<usize>,
}

fn rows<T: Real>(ds: &ClientDataset, idx: &[usize]) -> Array2<T> {
    let width = ds.features.first().map_or(0, Vec::len);
    Array2::from_shape_fn((idx.len(), width), |(r, c)| T::lit(ds.features[idx[r]][c]))
}

impl<T: Real> ClientData<T> {
    pub fn from_dataset(ds: &ClientDataset) -> Self {
        Self {
            user_id: ds.user_id,
            x_train: rows(ds, &ds.train),
            y_train: ds.train.iter().map(|&i| ds.labels[i]).collect(),
            x_test: rows(ds, &ds.test),
            y_test: ds.test.iter().map(|&i| ds.labels[i]).collect(),
        }
    }

    pub fn train_len(&self) -> usize {
        self.y_train.len()
    }

    pub fn train_labels(&self) -> BTreeSet<usize> {
        self.y_train.iter().copied().collect()
    }
}

/// Rows of several clients stacked in the given order.
pub fn pool<'a, T: Real>(
    parts: impl Iterator<Item = (ArrayView2<'a, T>, &'a [usize])>,
) -> (Array2<T>, Vec<usize>) {
    let mut x_rows: Vec<T> = Vec::new();
    let mut y = Vec::new();
    let mut width = 0;
    for (x, labels) in parts {
        width = x.ncols();
        x_rows.extend(x.iter().copied());
        y.extend_from_slice(labels);
    }
    let x = Array2::from_shape_vec((y.len(), width), x_rows).expect("consistent row widths");
    (x, y)
}

/// Accuracy of always predicting the most frequent label.
pub fn majority_baseline(labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let mut counts = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    *counts.values().max().expect("non-empty") as f64 / labels.len() as f64
}
