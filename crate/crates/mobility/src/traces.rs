use std::collections::HashMap;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::LogNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fedeploy_core::rng::substream;

use crate::world::{UserModel, World};

pub const MEDIAN_STAY_SECS: f64 = 1800.0;
pub const STAY_LOG_SIGMA: f64 = 0.75;
/// Weekend multiplier on places outside the user's home area.
pub const WEEKEND_AWAY_BIAS: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub user_id: usize,
    pub place_id: usize,
    pub area_id: usize,
    pub day: u32,
    pub month: u32,
    pub year: i32,
    pub weekend: u8,
    pub duration_secs: f64,
    pub visit_rate: f64,
    pub next_place_id: usize,
}

fn trace_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2010, 1, 4)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

/// Chronological visits of every user, grouped by user id.
pub fn generate_traces(world: &World) -> Vec<VisitRecord> {
    world
        .users
        .par_iter()
        .map(|u| user_trace(world, u))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn user_trace(world: &World, user: &UserModel) -> Vec<VisitRecord> {
    let cfg = &world.config;
    let mut rng = substream(cfg.seed, &[2, user.user_id as u64]);
    let r = user.record_count;
    let slot = cfg.trace_days as f64 * 86_400.0 / r as f64;
    let stay = LogNormal::new(MEDIAN_STAY_SECS.ln(), STAY_LOG_SIGMA).expect("valid log-normal");

    let times: Vec<NaiveDateTime> = (0..r)
        .map(|j| {
            let offset = j as f64 * slot + rng.random_range(0.0..0.5) * slot;
            trace_start() + Duration::seconds(offset as i64)
        })
        .collect();
    let is_weekend = |t: &NaiveDateTime| matches!(t.weekday(), Weekday::Sat | Weekday::Sun);

    // r visited places plus the place that follows the last recorded visit
    let mut places = Vec::with_capacity(r + 1);
    let first = WeightedIndex::new(&user.transitions[user.favorites[0]]).expect("stochastic row");
    places.push(first.sample(&mut rng));
    for j in 1..=r {
        let weekend = times.get(j).is_some_and(is_weekend);
        let row: Vec<f64> = user.transitions[places[j - 1]]
            .iter()
            .enumerate()
            .map(|(p, &w)| {
                if weekend && world.place_area[p] != user.home_area {
                    w * WEEKEND_AWAY_BIAS
                } else {
                    w
                }
            })
            .collect();
        places.push(
            WeightedIndex::new(&row)
                .expect("stochastic row")
                .sample(&mut rng),
        );
    }

    let mut per_month: HashMap<(i32, u32), HashMap<usize, usize>> = HashMap::new();
    for (t, &p) in times.iter().zip(&places) {
        *per_month
            .entry((t.year(), t.month()))
            .or_default()
            .entry(p)
            .or_default() += 1;
    }

    (0..r)
        .map(|j| {
            let t = &times[j];
            let month = &per_month[&(t.year(), t.month())];
            let total: usize = month.values().sum();
            VisitRecord {
                user_id: user.user_id,
                place_id: places[j],
                area_id: world.place_area[places[j]],
                day: t.day(),
                month: t.month(),
                year: t.year(),
                weekend: is_weekend(t) as u8,
                duration_secs: stay.sample(&mut rng),
                visit_rate: month[&places[j]] as f64 / total as f64,
                next_place_id: places[j + 1],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate_world, WorldConfig};

    #[test]
    fn labels_follow_the_next_visit() {
        let world = generate_world(&WorldConfig {
            user_count: 5,
            ..WorldConfig::default()
        })
        .unwrap();
        let traces = generate_traces(&world);
        for u in 0..5 {
            let mine: Vec<_> = traces.iter().filter(|v| v.user_id == u).collect();
            assert_eq!(mine.len(), world.users[u].record_count);
            for w in mine.windows(2) {
                assert_eq!(w[0].next_place_id, w[1].place_id);
            }
        }
    }
}
