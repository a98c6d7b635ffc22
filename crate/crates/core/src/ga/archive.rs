use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::{ProblemInstance, SelectionVector};
use crate::error::CoreError;
use crate::objective::{dominates, is_feasible, ObjectiveVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct ArchiveEntry<T> {
    #[serde(flatten)]
    pub selection: SelectionVector,
    #[serde(flatten)]
    pub objectives: ObjectiveVector<T>,
}

/// Mutually non-dominated set of feasible selections.
///
/// With a cap, overflow evicts the entry with the smallest crowding
/// contribution, never the entry holding the best scalar fitness. Serializes
/// as a bare JSON array of `{genes, f1..f5, scalar}` objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive<T> {
    entries: Vec<ArchiveEntry<T>>,
    cap: Option<usize>,
}

impl<T: Scalar> Default for ParetoArchive<T> {
    fn default() -> Self {
        Self::unbounded()
    }
}

impl<T: Scalar> ParetoArchive<T> {
    pub fn unbounded() -> Self {
        Self {
            entries: Vec::new(),
            cap: None,
        }
    }

    pub fn with_cap(cap: usize) -> Self {
        Self {
            entries: Vec::new(),
            cap: Some(cap.max(1)),
        }
    }

    /// Builds an unbounded archive from entries that are already mutually
    /// non-dominated.
    pub fn from_entries(entries: Vec<ArchiveEntry<T>>) -> Self {
        Self { entries, cap: None }
    }

    pub fn entries(&self) -> &[ArchiveEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }

    pub fn contains(&self, sel: &SelectionVector) -> bool {
        self.entries.iter().any(|e| &e.selection == sel)
    }

    pub fn best_scalar(&self) -> Option<T> {
        self.entries
            .iter()
            .map(|e| e.objectives.scalar)
            .fold(None, |best, s| match best {
                Some(b) if b >= s => Some(b),
                _ => Some(s),
            })
    }

    /// Entry with maximal scalar fitness; ties go to the lexicographically
    /// smallest gene string.
    pub fn recommended(&self) -> Option<&ArchiveEntry<T>> {
        self.entries.iter().reduce(|best, e| {
            let (a, b) = (e.objectives.scalar, best.objectives.scalar);
            if a > b || (a == b && e.selection.to_string() < best.selection.to_string()) {
                e
            } else {
                best
            }
        })
    }

    /// Checks feasibility, then offers the candidate. Returns whether it was
    /// kept.
    pub fn update(
        &mut self,
        instance: &ProblemInstance<T>,
        selection: SelectionVector,
        objectives: ObjectiveVector<T>,
    ) -> Result<bool, CoreError> {
        if !is_feasible(instance, &selection) {
            return Err(CoreError::InfeasibleCandidate);
        }
        Ok(self.offer(selection, objectives))
    }

    /// Inserts without the feasibility check. The candidate is kept iff no
    /// entry dominates it and it is not already present; entries it
    /// dominates are dropped.
    pub fn offer(&mut self, selection: SelectionVector, objectives: ObjectiveVector<T>) -> bool {
        if self
            .entries
            .iter()
            .any(|e| dominates(&e.objectives, &objectives) || e.selection == selection)
        {
            return false;
        }
        self.entries
            .retain(|e| !dominates(&objectives, &e.objectives));
        let key = selection.clone();
        self.entries.push(ArchiveEntry {
            selection,
            objectives,
        });
        if let Some(cap) = self.cap {
            while self.entries.len() > cap {
                self.evict_most_crowded();
            }
        }
        self.entries.iter().any(|e| e.selection == key)
    }

    /// Per entry, the sum over objectives of the gap to the nearest other
    /// entry in that objective.
    pub fn crowding_contributions(&self) -> Vec<T> {
        let n = self.entries.len();
        let comps: Vec<[T; 5]> = self
            .entries
            .iter()
            .map(|e| e.objectives.components())
            .collect();
        (0..n)
            .map(|i| {
                (0..5).fold(T::zero(), |acc, k| {
                    let gap = (0..n)
                        .filter(|&j| j != i)
                        .map(|j| (comps[i][k] - comps[j][k]).abs())
                        .fold(None, |m: Option<T>, g| Some(m.map_or(g, |m| m.min(g))));
                    acc + gap.unwrap_or(T::zero())
                })
            })
            .collect()
    }

    fn evict_most_crowded(&mut self) {
        let protected = self
            .recommended()
            .map(|best| best.selection.clone())
            .expect("non-empty archive");
        let crowding = self.crowding_contributions();
        let victim = (0..self.entries.len())
            .filter(|&i| self.entries[i].selection != protected)
            .min_by(|&a, &b| {
                crowding[a]
                    .partial_cmp(&crowding[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        if let Some(v) = victim {
            self.entries.remove(v);
        }
    }

    /// Objective points, for hypervolume computation.
    pub fn points(&self) -> Vec<[T; 5]> {
        self.entries
            .iter()
            .map(|e| e.objectives.components())
            .collect()
    }

    pub fn sort_by_genes(&mut self) {
        self.entries.sort_by_key(|e| e.selection.bits());
    }
}

impl<T: Scalar + Serialize + for<'a> Deserialize<'a>> Serialize for ParetoArchive<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de, T: Scalar + Serialize + for<'a> Deserialize<'a>> Deserialize<'de> for ParetoArchive<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Self::from_entries(Vec::<ArchiveEntry<T>>::deserialize(
            deserializer,
        )?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(c: [f64; 5]) -> ObjectiveVector<f64> {
        ObjectiveVector {
            f1: c[0],
            f2: c[1],
            f3: c[2],
            f4: c[3],
            f5: c[4],
            scalar: c.iter().sum::<f64>() / 5.0,
        }
    }

    fn s(mask: u64) -> SelectionVector {
        SelectionVector::from_mask(4, mask)
    }

    #[test]
    fn first_candidate_enters_empty_archive() {
        let mut a = ParetoArchive::unbounded();
        assert!(a.offer(s(1), ov([0.5; 5])));
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn dominated_candidate_is_rejected() {
        let mut a = ParetoArchive::unbounded();
        a.offer(s(1), ov([0.5; 5]));
        let before = a.clone();
        assert!(!a.offer(s(2), ov([0.4, 0.5, 0.5, 0.5, 0.5])));
        assert_eq!(a, before);
    }

    #[test]
    fn dominating_candidate_replaces_entries() {
        let mut a = ParetoArchive::unbounded();
        a.offer(s(1), ov([0.9, 0.1, 0.5, 0.5, 0.5]));
        a.offer(s(2), ov([0.1, 0.9, 0.5, 0.5, 0.5]));
        a.offer(s(3), ov([0.5, 0.5, 0.5, 0.5, 0.9]));
        assert_eq!(a.len(), 3);
        assert!(a.offer(s(4), ov([0.9, 0.9, 0.5, 0.5, 0.5])));
        assert_eq!(a.len(), 2);
        assert!(a.contains(&s(4)) && a.contains(&s(3)));
    }

    #[test]
    fn equal_vectors_coexist_but_duplicates_do_not() {
        let mut a = ParetoArchive::unbounded();
        assert!(a.offer(s(1), ov([0.5; 5])));
        assert!(a.offer(s(2), ov([0.5; 5])));
        assert!(!a.offer(s(2), ov([0.5; 5])));
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn cap_evicts_crowded_but_keeps_best() {
        let mut a = ParetoArchive::with_cap(2);
        a.offer(s(1), ov([1.0, 0.0, 0.0, 0.0, 0.0]));
        a.offer(s(2), ov([0.0, 1.0, 0.1, 0.0, 0.0]));
        a.offer(s(3), ov([0.0, 0.99, 0.11, 0.0, 0.0]));
        assert_eq!(a.len(), 2);
        assert!(a.contains(&s(1)));
    }

    #[test]
    fn recommendation_breaks_ties_lexicographically() {
        let mut a = ParetoArchive::unbounded();
        a.offer(SelectionVector::from_bits(&[1, 0, 0]), ov([0.5; 5]));
        a.offer(SelectionVector::from_bits(&[0, 1, 0]), ov([0.5; 5]));
        assert_eq!(a.recommended().unwrap().selection.to_string(), "010");
    }

    #[test]
    fn json_is_a_flat_array() {
        let mut a = ParetoArchive::unbounded();
        a.offer(SelectionVector::from_bits(&[1, 0]), ov([0.5; 5]));
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.starts_with(r#"[{"genes":[1,0],"f1":0.5"#), "{json}");
        let back: ParetoArchive<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.entries(), a.entries());
    }
}
