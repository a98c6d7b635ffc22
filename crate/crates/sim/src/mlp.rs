//! Fully connected classifier: ReLU hidden layers, softmax output,
//! categorical cross-entropy loss.

use ndarray::{Array1, Array2, ArrayView2, Axis, LinalgScalar, ScalarOperand, Zip};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use fedeploy_core::Scalar;

use crate::error::SimError;

/// Element type usable for model parameters.
pub trait Real: Scalar + LinalgScalar + ScalarOperand {}

impl<T: Scalar + LinalgScalar + ScalarOperand> Real for T {}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    /// `weights[l]` maps layer `l` (rows) to layer `l + 1` (columns).
    pub weights: Vec<Array2<T>>,
    pub biases: Vec<Array1<T>>,
}

/// Activations kept for the backward pass.
struct Trace<T> {
    /// Input to each layer, starting with the batch itself.
    inputs: Vec<Array2<T>>,
    probs: Array2<T>,
}

impl<T: Real> Mlp<T> {
    /// He-initialized network with zero biases.
    pub fn new<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Result<Self, SimError> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(SimError::Config(format!(
                "invalid layer sizes {layer_sizes:?}"
            )));
        }
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let std = (2.0 / fan_in as f64).sqrt();
            weights.push(Array2::from_shape_simple_fn((fan_in, fan_out), || {
                let z: f64 = StandardNormal.sample(rng);
                T::lit(z * std)
            }));
            biases.push(Array1::zeros(fan_out));
        }
        Ok(Self { weights, biases })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.weights.iter().map(|w| w.nrows()).collect();
        sizes.extend(self.weights.last().map(|w| w.ncols()));
        sizes
    }

    pub fn input_len(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn class_count(&self) -> usize {
        self.weights.last().map_or(0, |w| w.ncols())
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.weights.len() == other.weights.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.dim() == b.dim())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weights: self
                .weights
                .iter()
                .map(|w| Array2::zeros(w.dim()))
                .collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn scaled_add(&mut self, alpha: T, other: &Self) {
        for (w, o) in self.weights.iter_mut().zip(&other.weights) {
            w.scaled_add(alpha, o);
        }
        for (b, o) in self.biases.iter_mut().zip(&other.biases) {
            b.scaled_add(alpha, o);
        }
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter().copied());
            out.extend(b.iter().copied());
        }
        out
    }

    pub fn unflatten(&mut self, values: &[T]) {
        assert_eq!(values.len(), self.param_count(), "parameter count mismatch");
        let mut it = values.iter().copied();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            w.iter_mut()
                .for_each(|v| *v = it.next().expect("length checked"));
            b.iter_mut()
                .for_each(|v| *v = it.next().expect("length checked"));
        }
    }

    fn run(&self, x: ArrayView2<T>) -> Trace<T> {
        let last = self.weights.len() - 1;
        let mut inputs = Vec::with_capacity(self.weights.len());
        let mut h = x.to_owned();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let z = h.dot(w) + b;
            inputs.push(h);
            h = if l == last {
                z
            } else {
                z.mapv(|v| v.max(T::zero()))
            };
        }
        softmax_rows(&mut h);
        Trace { inputs, probs: h }
    }

    /// Class probabilities, one row per example.
    pub fn predict_proba(&self, x: ArrayView2<T>) -> Array2<T> {
        self.run(x).probs
    }

    pub fn predict(&self, x: ArrayView2<T>) -> Vec<usize> {
        self.predict_proba(x)
            .rows()
            .into_iter()
            .map(|r| argmax(r.iter().copied()))
            .collect()
    }

    /// Share of correctly classified rows; 0 for an empty batch.
    pub fn accuracy(&self, x: ArrayView2<T>, y: &[usize]) -> f64 {
        if y.is_empty() {
            return 0.0;
        }
        let hits = self
            .predict(x)
            .iter()
            .zip(y)
            .filter(|(p, t)| p == t)
            .count();
        hits as f64 / y.len() as f64
    }

    /// Mean cross-entropy.
    pub fn loss(&self, x: ArrayView2<T>, y: &[usize]) -> T {
        let probs = self.predict_proba(x);
        cross_entropy(&probs, y)
    }

    /// Mean cross-entropy and its gradient with respect to every parameter.
    pub fn loss_and_gradient(&self, x: ArrayView2<T>, y: &[usize]) -> (T, Self) {
        let Trace { inputs, probs } = self.run(x);
        let loss = cross_entropy(&probs, y);
        let n = T::from_count(y.len().max(1));

        let mut delta = probs;
        for (i, &label) in y.iter().enumerate() {
            delta[[i, label]] -= T::one();
        }
        delta.mapv_inplace(|v| v / n);

        let mut grad = self.zeros_like();
        for l in (0..self.weights.len()).rev() {
            grad.weights[l] = inputs[l].t().dot(&delta);
            grad.biases[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut back = delta.dot(&self.weights[l].t());
                // ReLU derivative: layer l's input is positive where the unit fired
                Zip::from(&mut back).and(&inputs[l]).for_each(|d, &a| {
                    if a <= T::zero() {
                        *d = T::zero();
                    }
                });
                delta = back;
            }
        }
        (loss, grad)
    }

    /// One gradient-descent step on a batch; returns the batch loss before
    /// the step.
    pub fn sgd_step(&mut self, x: ArrayView2<T>, y: &[usize], learning_rate: T) -> T {
        let (loss, grad) = self.loss_and_gradient(x, y);
        self.scaled_add(-learning_rate, &grad);
        loss
    }
}

/// In-place row-wise softmax, shifted by the row maximum.
pub fn softmax_rows<T: Real>(z: &mut Array2<T>) {
    for mut row in z.rows_mut() {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

fn cross_entropy<T: Real>(probs: &Array2<T>, y: &[usize]) -> T {
    let floor = T::lit(1e-12);
    let total = y.iter().enumerate().fold(T::zero(), |acc, (i, &label)| {
        acc - probs[[i, label]].max(floor).ln()
    });
    total / T::from_count(y.len().max(1))
}

/// Index of the largest value; the first one wins ties.
pub fn argmax<T: PartialOrd>(values: impl Iterator<Item = T>) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.enumerate() {
        match &best {
            Some((_, b)) if !(v > *b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map_or(0, |(i, _)| i)
}
