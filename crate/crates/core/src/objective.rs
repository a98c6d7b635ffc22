//! Constraint checks, the five deployment objectives and Pareto dominance.
//!
//! Every objective is reported in normalized maximization form, so each
//! component lies in `[0, 1]` and larger is better:
//!
//! | component | meaning |
//! |-----------|---------|
//! | `f1` | `1 - S/n`, fewer deployed clients |
//! | `f2` | share of total movements covered by the selection (data volume) |
//! | `f3` | mean priority of the selection over `t` (learning quality) |
//! | `f4` | distinct areas covered over `min(m, S)` (data diversity) |
//! | `f5` | share of selected clients sitting in requested areas |
//!
//! Infeasible selections are scored like any other; the solver repairs them
//! instead of penalizing.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{ProblemInstance, SelectionVector, PRIORITY_LEVELS};
use crate::error::CoreError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct ObjectiveVector<T> {
    pub f1: T,
    pub f2: T,
    pub f3: T,
    pub f4: T,
    pub f5: T,
    /// Weighted sum of the five components.
    pub scalar: T,
}

impl<T: Scalar> ObjectiveVector<T> {
    pub fn components(&self) -> [T; 5] {
        [self.f1, self.f2, self.f3, self.f4, self.f5]
    }

    /// Recomputes `scalar` under a different weighting.
    pub fn rescalarize(&self, weights: &[T; 5]) -> T {
        self.components()
            .iter()
            .zip(weights)
            .fold(T::zero(), |acc, (&f, &w)| acc + f * w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    Cpu,
    Memory,
    Disk,
    Battery,
    Availability,
    MovementCap,
    CardinalityLow,
    CardinalityHigh,
}

impl ViolationKind {
    pub fn family(self) -> ConstraintFamily {
        match self {
            Self::Cpu | Self::Memory | Self::Disk | Self::Battery => ConstraintFamily::Resources,
            Self::Availability => ConstraintFamily::Availability,
            Self::MovementCap => ConstraintFamily::MovementCap,
            Self::CardinalityLow | Self::CardinalityHigh => ConstraintFamily::Cardinality,
        }
    }
}

/// Groups of constraints, in the order the existence check examines them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintFamily {
    Cardinality,
    Resources,
    Availability,
    MovementCap,
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cardinality => "cardinality bounds",
            Self::Resources => "resource capacity (cpu/memory/disk/battery)",
            Self::Availability => "minimum availability time",
            Self::MovementCap => "high-movement cap",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintViolation {
    pub kind: ViolationKind,
    pub client_id: Option<usize>,
    pub detail: String,
}

fn check_len<T>(instance: &ProblemInstance<T>, sel: &SelectionVector) -> Result<(), CoreError> {
    if sel.len() != instance.clients.len() || instance.utilizations.len() != instance.clients.len()
    {
        return Err(CoreError::LengthMismatch {
            expected: instance.clients.len(),
            found: sel.len(),
        });
    }
    Ok(())
}

/// Resource kinds where client `i`'s load exceeds its capacity.
pub(crate) fn resource_overloads<T: Scalar>(
    instance: &ProblemInstance<T>,
    i: usize,
) -> Vec<(ViolationKind, T, T)> {
    let c = &instance.clients[i];
    let u = &instance.utilizations[i];
    [
        (ViolationKind::Cpu, u.cpu, c.cpu_capacity),
        (ViolationKind::Memory, u.memory, c.memory_capacity),
        (ViolationKind::Disk, u.disk, c.disk_capacity),
        (ViolationKind::Battery, u.battery, c.battery_level),
    ]
    .into_iter()
    .filter(|&(_, load, cap)| load > cap)
    .collect()
}

/// Whether client `i` can host the service without exceeding any capacity.
#[inline]
pub fn resource_ok<T: Scalar>(instance: &ProblemInstance<T>, i: usize) -> bool {
    let c = &instance.clients[i];
    let u = &instance.utilizations[i];
    u.cpu <= c.cpu_capacity
        && u.memory <= c.memory_capacity
        && u.disk <= c.disk_capacity
        && u.battery <= c.battery_level
}

#[inline]
pub fn availability_ok<T: Scalar>(instance: &ProblemInstance<T>, i: usize) -> bool {
    instance.clients[i].availability_secs >= instance.thresholds.min_round_time_secs
}

/// Resource- and availability-feasible on its own.
#[inline]
pub fn eligible<T: Scalar>(instance: &ProblemInstance<T>, i: usize) -> bool {
    resource_ok(instance, i) && availability_ok(instance, i)
}

#[inline]
pub fn is_high_movement<T: Scalar>(instance: &ProblemInstance<T>, i: usize) -> bool {
    instance.clients[i].movements >= instance.thresholds.movement_threshold
}

/// Largest number of high-movement clients allowed in a selection of size `s`:
/// `ceil(Mt * s)`.
#[inline]
pub fn movement_cap<T: Scalar>(instance: &ProblemInstance<T>, s: usize) -> usize {
    (instance.thresholds.high_movement_fraction * T::from_count(s)).ceil_to_usize()
}

pub fn high_movement_count<T: Scalar>(
    instance: &ProblemInstance<T>,
    sel: &SelectionVector,
) -> usize {
    sel.selected()
        .filter(|&i| is_high_movement(instance, i))
        .count()
}

pub fn check_resources<T: Scalar>(
    instance: &ProblemInstance<T>,
    sel: &SelectionVector,
) -> Result<Vec<ConstraintViolation>, CoreError> {
    check_len(instance, sel)?;
    let mut out = Vec::new();
    for i in sel.selected() {
        for (kind, load, cap) in resource_overloads(instance, i) {
            out.push(ConstraintViolation {
                kind,
                client_id: Some(instance.clients[i].id),
                detail: format!("load {load} exceeds capacity {cap}"),
            });
        }
    }
    Ok(out)
}

pub fn check_availability<T: Scalar>(
    instance: &ProblemInstance<T>,
    sel: &SelectionVector,
) -> Result<Vec<ConstraintViolation>, CoreError> {
    check_len(instance, sel)?;
    Ok(sel
        .selected()
        .filter(|&i| !availability_ok(instance, i))
        .map(|i| ConstraintViolation {
            kind: ViolationKind::Availability,
            client_id: Some(instance.clients[i].id),
            detail: format!(
                "stays {}s, round needs {}s",
                instance.clients[i].availability_secs, instance.thresholds.min_round_time_secs
            ),
        })
        .collect())
}

pub fn check_movement_cap<T: Scalar>(
    instance: &ProblemInstance<T>,
    sel: &SelectionVector,
) -> Result<Vec<ConstraintViolation>, CoreError> {
    check_len(instance, sel)?;
    let high = high_movement_count(instance, sel);
    let cap = movement_cap(instance, sel.count());
    if high > cap {
        Ok(vec![ConstraintViolation {
            kind: ViolationKind::MovementCap,
            client_id: None,
            detail: format!("{high} high-movement clients selected, cap is {cap}"),
        }])
    } else {
        Ok(Vec::new())
    }
}

pub fn check_cardinality<T: Scalar>(
    instance: &ProblemInstance<T>,
    sel: &SelectionVector,
) -> Result<Vec<ConstraintViolation>, CoreError> {
    check_len(instance, sel)?;
    let s = sel.count();
    let th = &instance.thresholds;
    let mut out = Vec::new();
    if s < th.min_selected {
        out.push(ConstraintViolation {
            kind: ViolationKind::CardinalityLow,
            client_id: None,
            detail: format!("{s} selected, minimum is {}", th.min_selected),
        });
    }
    if s > th.max_selected {
        out.push(ConstraintViolation {
            kind: ViolationKind::CardinalityHigh,
            client_id: None,
            detail: format!("{s} selected, maximum is {}", th.max_selected),
        });
    }
    Ok(out)
}

/// All violations of all four checkers.
pub fn violations<T: Scalar>(
    instance: &ProblemInstance<T>,
    sel: &SelectionVector,
) -> Result<Vec<ConstraintViolation>, CoreError> {
    let mut out = check_resources(instance, sel)?;
    out.extend(check_availability(instance, sel)?);
    out.extend(check_movement_cap(instance, sel)?);
    out.extend(check_cardinality(instance, sel)?);
    Ok(out)
}

/// `true` iff every checker passes. A selection of the wrong length is never
/// feasible.
pub fn is_feasible<T: Scalar>(instance: &ProblemInstance<T>, sel: &SelectionVector) -> bool {
    if check_len(instance, sel).is_err() {
        return false;
    }
    let s = sel.count();
    let th = &instance.thresholds;
    if s < th.min_selected || s > th.max_selected {
        return false;
    }
    let mut high = 0;
    for i in sel.selected() {
        if !eligible(instance, i) {
            return false;
        }
        high += is_high_movement(instance, i) as usize;
    }
    high <= movement_cap(instance, s)
}

/// Scores a selection. Panics if `sel` does not match the instance length.
pub fn eval_objectives<T: Scalar>(
    instance: &ProblemInstance<T>,
    sel: &SelectionVector,
) -> ObjectiveVector<T> {
    let n = instance.clients.len();
    assert_eq!(sel.len(), n, "selection length must equal client count");
    let zero = T::zero();
    let s = sel.count();

    let f1 = if n == 0 {
        T::one()
    } else {
        T::one() - T::from_count(s) / T::from_count(n)
    };

    let total_moves = instance
        .clients
        .iter()
        .fold(zero, |acc, c| acc + c.movements);
    let selected_moves = sel
        .selected()
        .fold(zero, |acc, i| acc + instance.clients[i].movements);
    let f2 = if total_moves > zero {
        selected_moves / total_moves
    } else {
        zero
    };

    let (f3, f4, f5) = if s == 0 {
        (zero, zero, zero)
    } else {
        let s_t = T::from_count(s);
        let prio: u64 = sel
            .selected()
            .map(|i| instance.clients[i].priority as u64)
            .sum();
        let f3 = T::from_u64(prio).unwrap() / (T::from_count(PRIORITY_LEVELS as usize) * s_t);

        let areas: BTreeSet<usize> = sel
            .selected()
            .map(|i| instance.clients[i].area_id)
            .collect();
        let f4 = T::from_count(areas.len()) / T::from_count(instance.area_count.min(s).max(1));

        let f5 = if instance.requests.any() {
            let served = sel
                .selected()
                .filter(|&i| instance.requests.is_requested(instance.clients[i].area_id))
                .count();
            T::from_count(served) / s_t
        } else {
            T::one()
        };
        (f3, f4.min(T::one()), f5)
    };

    let mut v = ObjectiveVector {
        f1,
        f2,
        f3,
        f4,
        f5,
        scalar: zero,
    };
    v.scalar = v.rescalarize(&instance.weights.as_array());
    v
}

/// Pareto dominance in maximization form.
pub fn dominates<T: Scalar>(a: &ObjectiveVector<T>, b: &ObjectiveVector<T>) -> bool {
    dominates_components(&a.components(), &b.components())
}

pub fn dominates_components<T: PartialOrd>(a: &[T], b: &[T]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}
