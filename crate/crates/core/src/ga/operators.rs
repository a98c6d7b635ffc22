//! Tournament selection, one-point crossover and bit-flip mutation.

use rand::seq::index::sample;
use rand::Rng;

use crate::domain::SelectionVector;
use crate::error::CoreError;
use crate::scalar::Scalar;

/// Index of the best-scoring member among `indices`; ties go to the lower
/// index.
pub fn tournament_winner<T: Scalar>(indices: &[usize], scores: &[T]) -> usize {
    let mut best = indices[0];
    for &i in &indices[1..] {
        if scores[i] > scores[best] || (scores[i] == scores[best] && i < best) {
            best = i;
        }
    }
    best
}

/// Draws `tournament_size` distinct members uniformly and returns the index
/// of the fittest.
pub fn tournament_select<T: Scalar, R: Rng + ?Sized>(
    scores: &[T],
    tournament_size: usize,
    rng: &mut R,
) -> Result<usize, CoreError> {
    if scores.is_empty() {
        return Err(CoreError::EmptyPopulation);
    }
    let k = tournament_size.clamp(1, scores.len());
    let drawn = sample(rng, scores.len(), k).into_vec();
    Ok(tournament_winner(&drawn, scores))
}

/// Swaps the suffixes of `a` and `b` starting at gene `cut`.
pub fn crossover_at(
    a: &SelectionVector,
    b: &SelectionVector,
    cut: usize,
) -> (SelectionVector, SelectionVector) {
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    for i in cut..a.len() {
        c1.set(i, b.get(i));
        c2.set(i, a.get(i));
    }
    (c1, c2)
}

/// With probability `crossover_prob`, cuts at a uniform point in `1..n` and
/// swaps suffixes; otherwise returns copies of the parents. Chromosomes
/// shorter than two genes are always copied.
pub fn one_point_crossover<R: Rng + ?Sized>(
    a: &SelectionVector,
    b: &SelectionVector,
    rng: &mut R,
    crossover_prob: f64,
) -> Result<(SelectionVector, SelectionVector), CoreError> {
    if a.len() != b.len() {
        return Err(CoreError::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 || !rng.random_bool(crossover_prob.clamp(0.0, 1.0)) {
        return Ok((a.clone(), b.clone()));
    }
    let cut = rng.random_range(1..a.len());
    Ok(crossover_at(a, b, cut))
}

/// Flips each gene independently with probability `1/n`.
pub fn bitflip_mutate<R: Rng + ?Sized>(sel: &SelectionVector, rng: &mut R) -> SelectionVector {
    let mut out = sel.clone();
    let n = sel.len();
    if n == 0 {
        return out;
    }
    let p = 1.0 / n as f64;
    for i in 0..n {
        if rng.random_bool(p) {
            out.flip(i);
        }
    }
    out
}
