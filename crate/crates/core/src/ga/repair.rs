//! Infeasible-solution repair.
//!
//! Rules run in order: overloaded clients move to a capable client in the same
//! area, short-stay clients move to the unselected eligible client with the
//! most movements, and surplus high-movement clients are swapped for
//! low-movement ones. Cardinality is then pulled into bounds by priority.
//! If the rules leave the selection infeasible, a constructive pass keeps
//! as much of it as possible and fills the rest by priority.

use std::cmp::Reverse;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::domain::{ProblemInstance, SelectionVector};
use crate::error::CoreError;
use crate::objective::{
    availability_ok, eligible, high_movement_count, is_feasible, is_high_movement, movement_cap,
    resource_ok, ConstraintFamily,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairOutcome {
    pub selection: SelectionVector,
    /// Set when no feasible selection could be produced.
    pub unrepairable: bool,
}

/// Decides whether any feasible selection exists, naming the first
/// constraint family that rules one out.
///
/// Exact: a size-`s` selection exists iff `s` fits in the bounds and
/// `s <= low + min(high, ceil(Mt*s))`, counting only eligible clients.
pub fn check_solvable<T: Scalar>(instance: &ProblemInstance<T>) -> Result<(), CoreError> {
    let n = instance.len();
    let th = &instance.thresholds;
    let max = th.max_selected.min(n);
    if th.min_selected > max {
        return Err(CoreError::Infeasible {
            family: ConstraintFamily::Cardinality,
            detail: format!(
                "min_selected {} exceeds max_selected {} / n {}",
                th.min_selected, th.max_selected, n
            ),
        });
    }
    let capable = (0..n).filter(|&i| resource_ok(instance, i)).count();
    if capable < th.min_selected {
        return Err(CoreError::Infeasible {
            family: ConstraintFamily::Resources,
            detail: format!(
                "only {capable} clients can host the service, {} required",
                th.min_selected
            ),
        });
    }
    let eligible_count = (0..n).filter(|&i| eligible(instance, i)).count();
    if eligible_count < th.min_selected {
        return Err(CoreError::Infeasible {
            family: ConstraintFamily::Availability,
            detail: format!(
                "only {eligible_count} capable clients stay at least {}s, {} required",
                th.min_round_time_secs, th.min_selected
            ),
        });
    }
    if feasible_sizes(instance).next().is_none() {
        return Err(CoreError::Infeasible {
            family: ConstraintFamily::MovementCap,
            detail: format!(
                "too many eligible clients have movements >= {} for cap fraction {}",
                th.movement_threshold, th.high_movement_fraction
            ),
        });
    }
    Ok(())
}

fn eligible_split<T: Scalar>(instance: &ProblemInstance<T>) -> (usize, usize) {
    (0..instance.len())
        .filter(|&i| eligible(instance, i))
        .fold((0, 0), |(lo, hi), i| {
            if is_high_movement(instance, i) {
                (lo, hi + 1)
            } else {
                (lo + 1, hi)
            }
        })
}

/// Selection sizes for which some feasible selection exists.
fn feasible_sizes<T: Scalar>(instance: &ProblemInstance<T>) -> impl Iterator<Item = usize> + '_ {
    let (low, high) = eligible_split(instance);
    let th = &instance.thresholds;
    (th.min_selected..=th.max_selected.min(instance.len()))
        .filter(move |&s| s <= low + high.min(movement_cap(instance, s)))
}

pub fn repair<T: Scalar, R: Rng + ?Sized>(
    instance: &ProblemInstance<T>,
    sel: &SelectionVector,
    rng: &mut R,
) -> RepairOutcome {
    if is_feasible(instance, sel) {
        return RepairOutcome {
            selection: sel.clone(),
            unrepairable: false,
        };
    }
    if sel.len() != instance.len() {
        return RepairOutcome {
            selection: sel.clone(),
            unrepairable: true,
        };
    }

    let mut genes = sel.clone();
    relocate_overloaded(instance, &mut genes, rng);
    relocate_short_stays(instance, &mut genes);
    enforce_movement_cap(instance, &mut genes);
    enforce_cardinality(instance, &mut genes);

    if is_feasible(instance, &genes) {
        return RepairOutcome {
            selection: genes,
            unrepairable: false,
        };
    }
    match construct_feasible(instance, &genes) {
        Some(selection) => RepairOutcome {
            selection,
            unrepairable: false,
        },
        None => RepairOutcome {
            selection: genes,
            unrepairable: true,
        },
    }
}

fn relocate_overloaded<T: Scalar, R: Rng + ?Sized>(
    instance: &ProblemInstance<T>,
    genes: &mut SelectionVector,
    rng: &mut R,
) {
    let n = instance.len();
    for i in 0..n {
        if !genes.get(i) || resource_ok(instance, i) {
            continue;
        }
        genes.set(i, false);
        let area = instance.clients[i].area_id;
        let capable: Vec<usize> = (0..n)
            .filter(|&j| {
                !genes.get(j)
                    && j != i
                    && instance.clients[j].area_id == area
                    && resource_ok(instance, j)
            })
            .collect();
        // prefer substitutes that also stay long enough
        let staying: Vec<usize> = capable
            .iter()
            .copied()
            .filter(|&j| availability_ok(instance, j))
            .collect();
        let pool = if staying.is_empty() {
            &capable
        } else {
            &staying
        };
        if let Some(&j) = pool.choose(rng) {
            genes.set(j, true);
        }
    }
}

fn relocate_short_stays<T: Scalar>(instance: &ProblemInstance<T>, genes: &mut SelectionVector) {
    let n = instance.len();
    for i in 0..n {
        if !genes.get(i) || availability_ok(instance, i) {
            continue;
        }
        genes.set(i, false);
        let substitute = (0..n)
            .filter(|&j| !genes.get(j) && j != i && eligible(instance, j))
            .reduce(|best, j| {
                if instance.clients[j].movements > instance.clients[best].movements {
                    j
                } else {
                    best
                }
            });
        if let Some(j) = substitute {
            genes.set(j, true);
        }
    }
}

fn enforce_movement_cap<T: Scalar>(instance: &ProblemInstance<T>, genes: &mut SelectionVector) {
    let n = instance.len();
    loop {
        let high = high_movement_count(instance, genes);
        if high <= movement_cap(instance, genes.count()) {
            return;
        }
        // Give up the least important high-movement client.
        let out = genes
            .selected()
            .filter(|&i| is_high_movement(instance, i))
            .min_by_key(|&i| (instance.clients[i].priority, i))
            .expect("high > 0");
        let substitute = (0..n)
            .filter(|&j| !genes.get(j) && eligible(instance, j) && !is_high_movement(instance, j))
            .min_by(|&a, &b| {
                let (ca, cb) = (&instance.clients[a], &instance.clients[b]);
                cb.priority
                    .cmp(&ca.priority)
                    .then(
                        cb.movements
                            .partial_cmp(&ca.movements)
                            .unwrap_or(std::cmp::Ordering::Equal),
                    )
                    .then(a.cmp(&b))
            });
        genes.set(out, false);
        if let Some(j) = substitute {
            genes.set(j, true);
        }
    }
}

fn enforce_cardinality<T: Scalar>(instance: &ProblemInstance<T>, genes: &mut SelectionVector) {
    let n = instance.len();
    let th = &instance.thresholds;

    let mut by_priority_desc: Vec<usize> = (0..n).collect();
    by_priority_desc.sort_by_key(|&i| (Reverse(instance.clients[i].priority), i));

    while genes.count() < th.min_selected {
        let s = genes.count();
        let high = high_movement_count(instance, genes);
        let add = by_priority_desc.iter().copied().find(|&j| {
            !genes.get(j)
                && eligible(instance, j)
                && (!is_high_movement(instance, j) || high < movement_cap(instance, s + 1))
        });
        match add {
            Some(j) => genes.set(j, true),
            None => break,
        }
    }

    while genes.count() > th.max_selected {
        let s = genes.count();
        let high = high_movement_count(instance, genes);
        let remove = by_priority_desc.iter().rev().copied().find(|&j| {
            genes.get(j) && (is_high_movement(instance, j) || high <= movement_cap(instance, s - 1))
        });
        match remove {
            Some(j) => genes.set(j, false),
            None => break,
        }
    }
}

/// Feasible selection of the attainable size closest to the current one,
/// keeping current eligible picks first and filling by priority.
fn construct_feasible<T: Scalar>(
    instance: &ProblemInstance<T>,
    current: &SelectionVector,
) -> Option<SelectionVector> {
    let n = instance.len();
    let want = current.count();
    let target = feasible_sizes(instance).min_by_key(|&s| (s.abs_diff(want), s))?;

    let rank = |i: usize| {
        (
            Reverse(current.get(i)),
            Reverse(instance.clients[i].priority),
            i,
        )
    };
    let mut low: Vec<usize> = (0..n)
        .filter(|&i| eligible(instance, i) && !is_high_movement(instance, i))
        .collect();
    let mut high: Vec<usize> = (0..n)
        .filter(|&i| eligible(instance, i) && is_high_movement(instance, i))
        .collect();
    low.sort_by_key(|&i| rank(i));
    high.sort_by_key(|&i| rank(i));

    let take_high = high.len().min(movement_cap(instance, target)).min(target);
    let take_low = target - take_high;
    if take_low > low.len() {
        return None;
    }
    let picked: Vec<usize> = high[..take_high]
        .iter()
        .chain(&low[..take_low])
        .copied()
        .collect();
    let out = SelectionVector::from_indices(n, &picked);
    is_feasible(instance, &out).then_some(out)
}
