use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use fedeploy_core::rng::substream;

use crate::traces::VisitRecord;
use crate::world::{World, WorldConfig};

pub const TEST_FRACTION: f64 = 0.2;

/// Next-place prediction data of one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientDataset {
    pub user_id: usize,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl ClientDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Label counts over all records, indexed by place.
    pub fn label_histogram(&self, place_count: usize) -> Vec<usize> {
        let mut h = vec![0; place_count];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }

    /// Most frequent label (lowest id on ties) and its share of the records.
    pub fn modal_label(&self, place_count: usize) -> (usize, f64) {
        let h = self.label_histogram(place_count);
        let (label, &count) = h
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("at least one place");
        (label, count as f64 / self.len().max(1) as f64)
    }
}

/// Per-user mobility statistics that feed the client profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSummary {
    pub user_id: usize,
    pub record_count: usize,
    /// Visits per day over the trace window.
    pub movements: f64,
    /// Mean stay duration per area, zero for areas never visited.
    pub area_mean_stay_secs: Vec<f64>,
}

pub fn build_datasets(
    world: &World,
    traces: &[VisitRecord],
) -> (BTreeMap<usize, ClientDataset>, Vec<UserSummary>) {
    let cfg = &world.config;
    let mut by_user: BTreeMap<usize, Vec<&VisitRecord>> = BTreeMap::new();
    for v in traces {
        by_user.entry(v.user_id).or_default().push(v);
    }
    let mut datasets = BTreeMap::new();
    let mut summaries = Vec::with_capacity(by_user.len());
    for (&user, visits) in &by_user {
        datasets.insert(user, client_dataset(cfg, user, visits));
        summaries.push(summarize(cfg, user, visits));
    }
    (datasets, summaries)
}

fn min_max(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

fn scale(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

fn client_dataset(cfg: &WorldConfig, user: usize, visits: &[&VisitRecord]) -> ClientDataset {
    // the last visit has no recorded successor
    let rows = &visits[..visits.len().saturating_sub(1)];
    let dur = min_max(rows.iter().map(|v| v.duration_secs));
    let rate = min_max(rows.iter().map(|v| v.visit_rate));
    let features = rows
        .iter()
        .map(|v| {
            let mut x = vec![0.0; cfg.feature_len()];
            x[v.place_id] = 1.0;
            x[cfg.place_count + v.area_id] = 1.0;
            let tail = cfg.place_count + cfg.area_count;
            x[tail] = v.weekend as f64;
            x[tail + 1] = scale(v.duration_secs, dur);
            x[tail + 2] = scale(v.visit_rate, rate);
            x
        })
        .collect();
    let labels: Vec<usize> = rows.iter().map(|v| v.next_place_id).collect();
    let (train, test) = stratified_split(&labels, cfg.place_count, cfg.seed, user);
    ClientDataset {
        user_id: user,
        features,
        labels,
        train,
        test,
    }
}

/// Holds out about `TEST_FRACTION` of each label class; singleton classes
/// stay in training. Both index lists are sorted.
pub fn stratified_split(
    labels: &[usize],
    classes: usize,
    seed: u64,
    user: usize,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = substream(seed, &[3, user as u64]);
    let mut by_class = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut train = Vec::with_capacity(labels.len());
    let mut test = Vec::new();
    for mut idx in by_class {
        idx.shuffle(&mut rng);
        let k = if idx.len() < 2 {
            0
        } else {
            (idx.len() as f64 * TEST_FRACTION).round() as usize
        };
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    if test.is_empty() && train.len() > 1 {
        test.push(train.pop().expect("non-empty"));
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn summarize(cfg: &WorldConfig, user: usize, visits: &[&VisitRecord]) -> UserSummary {
    let mut total = vec![0.0; cfg.area_count];
    let mut count = vec![0usize; cfg.area_count];
    for v in visits {
        total[v.area_id] += v.duration_secs;
        count[v.area_id] += 1;
    }
    UserSummary {
        user_id: user,
        record_count: visits.len(),
        movements: visits.len() as f64 / cfg.trace_days as f64,
        area_mean_stay_secs: total
            .iter()
            .zip(&count)
            .map(|(&t, &c)| if c > 0 { t / c as f64 } else { 0.0 })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_disjoint_covering_and_stratified() {
        let labels: Vec<usize> = (0..100)
            .map(|i| {
                if i < 80 {
                    0
                } else if i < 99 {
                    1
                } else {
                    2
                }
            })
            .collect();
        let (train, test) = stratified_split(&labels, 3, 1, 0);
        assert_eq!(train.len() + test.len(), 100);
        assert!(train.iter().all(|i| !test.contains(i)));
        assert_eq!(test.iter().filter(|&&i| labels[i] == 0).count(), 16);
        assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 4);
        assert!(train.contains(&99));
    }

    #[test]
    fn three_hundred_records_over_ninety_days() {
        let cfg = WorldConfig::default();
        let v = VisitRecord {
            user_id: 0,
            place_id: 0,
            area_id: 0,
            day: 1,
            month: 1,
            year: 2010,
            weekend: 0,
            duration_secs: 10.0,
            visit_rate: 1.0,
            next_place_id: 0,
        };
        let visits: Vec<&VisitRecord> = std::iter::repeat_n(&v, 300).collect();
        let s = summarize(&cfg, 0, &visits);
        assert!((s.movements - 300.0 / 90.0).abs() < 1e-12);
        assert_eq!(s.area_mean_stay_secs[0], 10.0);
        assert_eq!(s.area_mean_stay_secs[1], 0.0);
    }
}
