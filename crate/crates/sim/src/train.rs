use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::ClientData;
use crate::error::SimError;
use crate::mlp::{Mlp, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

/// Mini-batch gradient descent over `x`/`y` for `cfg.epochs` shuffled passes.
pub fn train_epochs<T: Real, R: Rng + ?Sized>(
    model: &mut Mlp<T>,
    x: ndarray::ArrayView2<T>,
    y: &[usize],
    cfg: &TrainConfig,
    rng: &mut R,
) {
    let lr = T::lit(cfg.learning_rate);
    let mut order: Vec<usize> = (0..y.len()).collect();
    let mut labels = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let xb = x.select(Axis(0), batch);
            labels.clear();
            labels.extend(batch.iter().map(|&i| y[i]));
            model.sgd_step(xb.view(), &labels, lr);
        }
    }
}

/// Trains a copy of the global model on one client's training split and
/// returns it with the number of samples it saw.
pub fn local_train<T: Real, R: Rng + ?Sized>(
    params: &Mlp<T>,
    data: &ClientData<T>,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<(Mlp<T>, usize), SimError> {
    if data.train_len() == 0 {
        return Err(SimError::EmptyDataset(data.user_id));
    }
    let mut model = params.clone();
    train_epochs(&mut model, data.x_train.view(), &data.y_train, cfg, rng);
    Ok((model, data.train_len()))
}

/// Aggregation weights `count_k / sum(counts)`.
pub fn fedavg_weights(counts: &[usize]) -> Result<Vec<f64>, SimError> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(SimError::NoUpdates);
    }
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Sample-weighted parameter average.
pub fn fedavg_aggregate<T: Real>(updates: &[(Mlp<T>, usize)]) -> Result<Mlp<T>, SimError> {
    let first = &updates.first().ok_or(SimError::NoUpdates)?.0;
    if updates.iter().any(|(m, _)| !m.same_shape(first)) {
        return Err(SimError::ShapeMismatch);
    }
    let counts: Vec<usize> = updates.iter().map(|(_, c)| *c).collect();
    let weights = fedavg_weights(&counts)?;
    let mut avg = first.zeros_like();
    for ((model, _), w) in updates.iter().zip(weights) {
        avg.scaled_add(T::lit(w), model);
    }
    Ok(avg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    fn tiny(w: [f64; 2]) -> Mlp<f64> {
        Mlp {
            weights: vec![array![[w[0]]]],
            biases: vec![Array1::from(vec![w[1]])],
        }
    }

    #[test]
    fn weights_100_300_give_quarter_and_three_quarters() {
        assert_eq!(fedavg_weights(&[100, 300]).unwrap(), vec![0.25, 0.75]);
        let avg = fedavg_aggregate(&[(tiny([1.0, 2.0]), 100), (tiny([5.0, -2.0]), 300)]).unwrap();
        assert_eq!(
            avg.flatten(),
            vec![0.25 * 1.0 + 0.75 * 5.0, 0.25 * 2.0 - 0.75 * 2.0]
        );
    }

    #[test]
    fn equal_counts_average_and_single_update_is_identity() {
        let avg = fedavg_aggregate(&[(tiny([1.0, 2.0]), 7), (tiny([3.0, 4.0]), 7)]).unwrap();
        assert_eq!(avg.flatten(), vec![2.0, 3.0]);
        let one = tiny([0.3, -0.7]);
        assert_eq!(fedavg_aggregate(&[(one.clone(), 5)]).unwrap(), one);
    }

    #[test]
    fn empty_and_mismatched_updates_are_errors() {
        assert!(matches!(
            fedavg_aggregate::<f64>(&[]),
            Err(SimError::NoUpdates)
        ));
        let mut other = tiny([1.0, 1.0]);
        other.weights[0] = array![[1.0, 2.0]];
        other.biases[0] = Array1::zeros(2);
        assert!(matches!(
            fedavg_aggregate(&[(tiny([1.0, 1.0]), 1), (other, 1)]),
            Err(SimError::ShapeMismatch)
        ));
    }
}
