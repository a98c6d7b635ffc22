use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use fedeploy_core::rng::substream;

use crate::error::MobilityError;

/// Weight of the step along the place cycle between two favorites.
const CHAIN_WEIGHT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub user_count: usize,
    pub place_count: usize,
    pub area_count: usize,
    pub records_min: usize,
    pub records_max: usize,
    pub trace_days: u32,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            user_count: 100,
            place_count: 20,
            area_count: 6,
            records_min: 200,
            records_max: 1500,
            trace_days: 90,
            seed: 0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), MobilityError> {
        if self.user_count == 0 {
            return Err(MobilityError::config("user_count", "must be at least 1"));
        }
        if self.area_count == 0 {
            return Err(MobilityError::config("area_count", "must be at least 1"));
        }
        if self.place_count < self.area_count {
            return Err(MobilityError::config(
                "place_count",
                format!(
                    "{} is below area_count {}",
                    self.place_count, self.area_count
                ),
            ));
        }
        if self.place_count < 2 {
            return Err(MobilityError::config("place_count", "must be at least 2"));
        }
        if self.records_min < 2 {
            return Err(MobilityError::config("records_min", "must be at least 2"));
        }
        if self.records_min > self.records_max {
            return Err(MobilityError::config(
                "records_max",
                format!(
                    "{} is below records_min {}",
                    self.records_max, self.records_min
                ),
            ));
        }
        if self.trace_days == 0 {
            return Err(MobilityError::config("trace_days", "must be at least 1"));
        }
        Ok(())
    }

    /// Length of the feature vectors built from this world.
    pub fn feature_len(&self) -> usize {
        self.place_count + self.area_count + 3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserModel {
    pub user_id: usize,
    pub home_area: usize,
    /// Favorite places, strongest first.
    pub favorites: Vec<usize>,
    /// Number of visits in this user's trace.
    pub record_count: usize,
    /// Row-stochastic next-place matrix, `place_count x place_count`.
    pub transitions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub config: WorldConfig,
    /// Area of each place.
    pub place_area: Vec<usize>,
    /// Cyclic successor of each place. Users' favorites are runs along this
    /// cycle, so the step `p -> successor[p]` is common to everyone who
    /// frequents `p`.
    pub successor: Vec<usize>,
    pub users: Vec<UserModel>,
}

impl World {
    pub fn places_in_area(&self, area: usize) -> impl Iterator<Item = usize> + '_ {
        self.place_area
            .iter()
            .enumerate()
            .filter(move |(_, &a)| a == area)
            .map(|(p, _)| p)
    }
}

pub fn generate_world(cfg: &WorldConfig) -> Result<World, MobilityError> {
    cfg.validate()?;
    let p = cfg.place_count;
    let place_area: Vec<usize> = (0..p).map(|place| place % cfg.area_count).collect();

    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut substream(cfg.seed, &[0]));
    let mut successor = vec![0; p];
    for i in 0..p {
        successor[order[i]] = order[(i + 1) % p];
    }

    let users = (0..cfg.user_count)
        .map(|user| user_model(cfg, &place_area, &successor, user))
        .collect();
    Ok(World {
        config: cfg.clone(),
        place_area,
        successor,
        users,
    })
}

fn user_model(
    cfg: &WorldConfig,
    place_area: &[usize],
    successor: &[usize],
    user: usize,
) -> UserModel {
    let mut rng = substream(cfg.seed, &[1, user as u64]);
    let p = cfg.place_count;
    let home_area = rng.random_range(0..cfg.area_count);
    let home: Vec<usize> = (0..p).filter(|&q| place_area[q] == home_area).collect();

    let k = rng.random_range(3..=6).min(p);
    let mut favorites = vec![home[rng.random_range(0..home.len())]];
    while favorites.len() < k {
        favorites.push(successor[favorites[favorites.len() - 1]]);
    }
    // the first favorite dominates, the rest share a smaller mass
    let mut strength = vec![0.0; p];
    for (rank, &f) in favorites.iter().enumerate() {
        strength[f] = if rank == 0 {
            1.0
        } else {
            rng.random_range(0.15..0.7)
        };
    }

    let record_count = if cfg.records_min < cfg.records_max {
        rng.random_range(cfg.records_min + 1..=cfg.records_max)
    } else {
        cfg.records_max
    };

    let transitions = (0..p)
        .map(|from| {
            let mut row = strength.clone();
            if strength[from] > 0.0 && strength[successor[from]] > 0.0 {
                row[successor[from]] += CHAIN_WEIGHT;
            }
            row[from] = 0.0;
            let total: f64 = row.iter().sum();
            row.iter().map(|w| w / total).collect()
        })
        .collect();

    UserModel {
        user_id: user,
        home_area,
        favorites,
        record_count,
        transitions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_areas_hold_three_or_four_places() {
        let world = generate_world(&WorldConfig::default()).unwrap();
        assert_eq!(world.users.len(), 100);
        assert_eq!(world.place_area.len(), 20);
        for area in 0..6 {
            let n = world.places_in_area(area).count();
            assert!(n == 3 || n == 4, "area {area} holds {n}");
        }
    }

    #[test]
    fn rows_are_stochastic_without_self_loops() {
        let world = generate_world(&WorldConfig::default()).unwrap();
        for u in &world.users {
            assert!((3..=6).contains(&u.favorites.len()));
            for (from, row) in u.transitions.iter().enumerate() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert_eq!(row[from], 0.0);
            }
        }
        assert!(world.successor.iter().enumerate().all(|(i, &s)| i != s));
    }

    #[test]
    fn bad_configs_name_the_field() {
        let cfg = WorldConfig {
            records_min: 10,
            records_max: 5,
            ..WorldConfig::default()
        };
        let err = generate_world(&cfg).unwrap_err().to_string();
        assert!(err.contains("records_max"), "{err}");
        let cfg = WorldConfig {
            place_count: 3,
            ..WorldConfig::default()
        };
        assert!(generate_world(&cfg)
            .unwrap_err()
            .to_string()
            .contains("place_count"));
    }
}
