//! Seeded random problem instances for fixtures and property tests.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    AreaRequestVector, ClientProfile, DeploymentThresholds, ObjectiveWeights, ProblemInstance,
    UtilizationProfile, PRIORITY_LEVELS,
};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceShape {
    pub clients: usize,
    pub areas: usize,
    pub min_selected: usize,
    pub max_selected: usize,
    /// Chance that a client cannot host the service on some resource.
    pub overload_rate: f64,
    /// Chance that a client leaves its area before a round could finish.
    pub short_stay_rate: f64,
    pub round_time_secs: f64,
    pub movement_threshold: f64,
    pub high_movement_fraction: f64,
}

impl Default for InstanceShape {
    fn default() -> Self {
        Self {
            clients: 10,
            areas: 3,
            min_selected: 2,
            max_selected: 6,
            overload_rate: 0.15,
            short_stay_rate: 0.2,
            round_time_secs: 600.0,
            movement_threshold: 8.0,
            high_movement_fraction: 0.5,
        }
    }
}

pub fn random_instance(shape: &InstanceShape, seed: u64) -> ProblemInstance<f64> {
    let mut rng = rng_from_seed(seed);
    let n = shape.clients;
    let m = shape.areas.max(1);
    let mut clients = Vec::with_capacity(n);
    let mut utilizations = Vec::with_capacity(n);
    for id in 0..n {
        let mut client = ClientProfile {
            id,
            cpu_capacity: rng.random_range(1.0..8.0),
            memory_capacity: rng.random_range(1024.0..8192.0),
            disk_capacity: rng.random_range(4000.0..64000.0),
            battery_level: rng.random_range(20.0..100.0),
            availability_secs: rng
                .random_range(shape.round_time_secs..6.0 * shape.round_time_secs.max(1.0)),
            area_id: rng.random_range(0..m),
            movements: (rng.random_range(0.0f64..16.0) * 4.0).round() / 4.0,
            priority: rng.random_range(1..=PRIORITY_LEVELS),
            rounds_served: 0,
        };
        let util = UtilizationProfile {
            cpu: rng.random_range(0.2..1.0),
            memory: rng.random_range(128.0..1024.0),
            battery: rng.random_range(1.0..15.0),
            disk: rng.random_range(100.0..2000.0),
        };
        if rng.random_bool(shape.overload_rate) {
            match rng.random_range(0..4) {
                0 => client.cpu_capacity = util.cpu * 0.5,
                1 => client.memory_capacity = util.memory * 0.5,
                2 => client.disk_capacity = util.disk * 0.5,
                _ => client.battery_level = util.battery * 0.5,
            }
        }
        if rng.random_bool(shape.short_stay_rate) {
            client.availability_secs = rng.random_range(0.0..shape.round_time_secs);
        }
        clients.push(client);
        utilizations.push(util);
    }
    let requests = AreaRequestVector {
        requested: (0..m).map(|_| rng.random_bool(0.4) as u8).collect(),
    };
    ProblemInstance {
        clients,
        utilizations,
        requests,
        weights: ObjectiveWeights::uniform(),
        thresholds: DeploymentThresholds {
            min_round_time_secs: shape.round_time_secs,
            movement_threshold: shape.movement_threshold,
            high_movement_fraction: shape.high_movement_fraction,
            min_selected: shape.min_selected.min(n),
            max_selected: shape.max_selected.min(n),
        },
        area_count: m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_instance;

    #[test]
    fn generated_instances_are_valid_and_reproducible() {
        let shape = InstanceShape::default();
        for seed in 0..20 {
            let inst = random_instance(&shape, seed);
            assert!(
                validate_instance(&inst).is_ok(),
                "{}",
                validate_instance(&inst)
            );
            assert_eq!(inst, random_instance(&shape, seed));
        }
    }
}
