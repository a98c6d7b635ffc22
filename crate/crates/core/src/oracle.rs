//! Brute-force Pareto front for small instances and exact hypervolume.

use rayon::prelude::*;

use crate::domain::{ProblemInstance, SelectionVector};
use crate::error::CoreError;
use crate::ga::ParetoArchive;
use crate::objective::{dominates_components, eval_objectives, is_feasible};
use crate::scalar::Scalar;

/// Largest instance the enumerator accepts.
pub const MAX_ENUMERATION_CLIENTS: usize = 20;

/// Exact non-dominated set over all `2^n` selections, sorted by gene string.
/// Entries with identical objective vectors are all retained.
pub fn enumerate_pareto<T: Scalar>(
    instance: &ProblemInstance<T>,
) -> Result<ParetoArchive<T>, CoreError> {
    let n = instance.len();
    if n > MAX_ENUMERATION_CLIENTS {
        return Err(CoreError::TooLarge {
            n,
            limit: MAX_ENUMERATION_CLIENTS,
        });
    }
    // Partition by the top `prefix_bits` genes; merging fronts is associative.
    let prefix_bits = n.min(6);
    let chunk_bits = n - prefix_bits;
    let mut front = (0u64..1 << prefix_bits)
        .into_par_iter()
        .map(|prefix| {
            let mut local = ParetoArchive::unbounded();
            for low in 0u64..1 << chunk_bits {
                let sel = SelectionVector::from_mask(n, prefix << chunk_bits | low);
                if is_feasible(instance, &sel) {
                    let obj = eval_objectives(instance, &sel);
                    local.offer(sel, obj);
                }
            }
            local
        })
        .reduce(ParetoArchive::unbounded, |mut a, b| {
            for e in b.entries() {
                a.offer(e.selection.clone(), e.objectives);
            }
            a
        });
    front.sort_by_genes();
    Ok(front)
}

/// Exact hypervolume of `points` above `reference` (maximization), by
/// recursive slicing along the last objective. Coordinates below the
/// reference are clipped to it.
pub fn hypervolume_points<T: Scalar, const D: usize>(points: &[[T; D]], reference: [T; D]) -> T {
    let rel: Vec<Vec<T>> = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&reference)
                .map(|(&x, &r)| (x - r).max(T::zero()))
                .collect()
        })
        .collect();
    slice_volume(rel, D)
}

pub fn hypervolume<T: Scalar>(front: &ParetoArchive<T>, reference: [T; 5]) -> T {
    hypervolume_points(&front.points(), reference)
}

fn non_dominated<T: Scalar>(points: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let mut keep: Vec<Vec<T>> = Vec::with_capacity(points.len());
    for p in points {
        if keep.iter().any(|q| dominates_components(q, &p) || q == &p) {
            continue;
        }
        keep.retain(|q| !dominates_components(&p, q));
        keep.push(p);
    }
    keep
}

fn slice_volume<T: Scalar>(points: Vec<Vec<T>>, dims: usize) -> T {
    let mut points: Vec<Vec<T>> = points
        .into_iter()
        .map(|mut p| {
            p.truncate(dims);
            p
        })
        .filter(|p| p.iter().all(|&x| x > T::zero()))
        .collect();
    if points.is_empty() {
        return T::zero();
    }
    if dims == 1 {
        return points.iter().map(|p| p[0]).fold(T::zero(), T::max);
    }
    points = non_dominated(points);
    let last = dims - 1;
    points.sort_by(|a, b| {
        b[last]
            .partial_cmp(&a[last])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut volume = T::zero();
    let mut k = 0;
    while k < points.len() {
        // all points sharing this height join the slice together
        let height = points[k][last];
        let mut end = k + 1;
        while end < points.len() && points[end][last] == height {
            end += 1;
        }
        let below = points.get(end).map_or(T::zero(), |p| p[last]);
        let base = slice_volume(points[..end].to_vec(), last);
        volume += (height - below) * base;
        k = end;
    }
    volume
}
