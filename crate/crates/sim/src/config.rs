use std::fmt;

use serde::{Deserialize, Serialize};

use fedeploy_core::{GaConfig, ObjectiveWeights};

use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Multi-objective GA over live client profiles; volunteers are onboarded
    /// as they are deployed.
    OnDemandGA,
    /// A fixed share of all clients, drawn uniformly, ignoring their state.
    VanillaRandom,
    /// Uniform draws from a fixed pre-configured subset of clients.
    StaticPreconfigured,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::OnDemandGA,
        Strategy::VanillaRandom,
        Strategy::StaticPreconfigured,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::OnDemandGA => "OnDemandGA",
            Strategy::VanillaRandom => "VanillaRandom",
            Strategy::StaticPreconfigured => "StaticPreconfigured",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-round cardinality bounds, interpolated linearly from `first` at round 1
/// to `last` at round `ramp_rounds` and constant afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClientSchedule {
    pub first: (usize, usize),
    pub last: (usize, usize),
    pub ramp_rounds: usize,
}

impl Default for ClientSchedule {
    fn default() -> Self {
        Self {
            first: (5, 5),
            last: (15, 20),
            ramp_rounds: 15,
        }
    }
}

impl ClientSchedule {
    /// `(min_selected, max_selected)` for a 1-based round.
    pub fn bounds(&self, round: usize) -> (usize, usize) {
        let round = round.max(1);
        if round >= self.ramp_rounds {
            return self.last;
        }
        let t = (round - 1) as f64 / (self.ramp_rounds - 1) as f64;
        let lerp = |a: usize, b: usize| (a as f64 + t * (b as f64 - a as f64)).round() as usize;
        (
            lerp(self.first.0, self.last.0),
            lerp(self.first.1, self.last.1),
        )
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.first.0 > self.first.1 || self.last.0 > self.last.1 {
            return Err(SimError::Config(
                "client_schedule: min_selected exceeds max_selected".into(),
            ));
        }
        if self.last.0 < self.first.0 || self.last.1 < self.first.1 {
            return Err(SimError::Config(
                "client_schedule: bounds must not decrease".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub strategy: Strategy,
    pub rounds_max: usize,
    /// A round is discarded when fewer than this share of deployed clients report.
    pub min_report_fraction: f64,
    pub round_time_secs: f64,
    /// Absolute accuracy target; derived from the centralized model when unset.
    pub target_accuracy: Option<f64>,
    /// Share of the centralized accuracy used as target when none is given.
    pub target_fraction: f64,
    /// Stop as soon as the target is reached instead of running all rounds.
    pub stop_at_target: bool,
    pub client_schedule: ClientSchedule,
    pub p_higher_priority_invite: f64,
    pub vanilla_fraction: f64,
    pub static_preconfigured_fraction: f64,
    pub local_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub hidden_layers: Vec<usize>,
    pub centralized_epochs: usize,
    /// Visits per day from which a client counts as high-movement.
    pub movement_threshold: f64,
    pub high_movement_fraction: f64,
    /// Volunteers the orchestrators containerize per round besides the
    /// deployed ones.
    pub onboard_per_round: usize,
    /// Share of devices that can never host the service.
    pub weak_device_fraction: f64,
    /// Weights of the five deployment objectives in the GA's scalar fitness.
    /// The default leaves out the priority objective: priorities rank clients
    /// by how well the global model already fits them, and rewarding that
    /// keeps redeploying the same users.
    pub objective_weights: ObjectiveWeights<f64>,
    pub ga: GaConfig,
    pub seed: u64,
    /// Seed of the world this config was written for, if pinned.
    pub world_seed: Option<u64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::OnDemandGA,
            rounds_max: 50,
            min_report_fraction: 0.8,
            round_time_secs: 600.0,
            target_accuracy: None,
            target_fraction: 0.9,
            stop_at_target: true,
            client_schedule: ClientSchedule::default(),
            p_higher_priority_invite: 0.05,
            vanilla_fraction: 0.1,
            static_preconfigured_fraction: 0.2,
            local_epochs: 3,
            learning_rate: 0.05,
            batch_size: 32,
            hidden_layers: vec![128, 256, 128],
            centralized_epochs: 20,
            movement_threshold: 12.0,
            high_movement_fraction: 0.5,
            onboard_per_round: 10,
            weak_device_fraction: 0.05,
            objective_weights: ObjectiveWeights {
                w1: 0.25,
                w2: 0.25,
                w3: 0.0,
                w4: 0.25,
                w5: 0.25,
            },
            ga: GaConfig::default(),
            seed: 0,
            world_seed: None,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SimError::Config(format!(
            "{name} must lie in [0,1], got {v}"
        )))
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.min_report_fraction > 0.0 && self.min_report_fraction <= 1.0) {
            return Err(SimError::Config(
                "min_report_fraction must lie in (0,1]".into(),
            ));
        }
        unit("target_fraction", self.target_fraction)?;
        unit("p_higher_priority_invite", self.p_higher_priority_invite)?;
        unit("vanilla_fraction", self.vanilla_fraction)?;
        unit(
            "static_preconfigured_fraction",
            self.static_preconfigured_fraction,
        )?;
        unit("high_movement_fraction", self.high_movement_fraction)?;
        unit("weak_device_fraction", self.weak_device_fraction)?;
        if let Some(t) = self.target_accuracy {
            unit("target_accuracy", t)?;
        }
        if self.round_time_secs < 0.0 {
            return Err(SimError::Config(
                "round_time_secs must be non-negative".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(SimError::Config("batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(SimError::Config("learning_rate must be positive".into()));
        }
        if self.hidden_layers.contains(&0) {
            return Err(SimError::Config("hidden_layers must be positive".into()));
        }
        if !self.objective_weights.sums_to_one()
            || self
                .objective_weights
                .as_array()
                .iter()
                .any(|w| !(0.0..=1.0).contains(w))
        {
            return Err(SimError::Config(
                "objective_weights must lie in [0,1] and sum to 1".into(),
            ));
        }
        self.client_schedule.validate()?;
        self.ga.validate()?;
        Ok(())
    }

    /// Deployment size of the random baselines: `ceil(vanilla_fraction * n)`.
    pub fn baseline_deploy_count(&self, n: usize) -> usize {
        ((self.vanilla_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_ramps_from_five_to_fifteen_twenty() {
        let s = ClientSchedule::default();
        assert_eq!(s.bounds(1), (5, 5));
        assert_eq!(s.bounds(15), (15, 20));
        assert_eq!(s.bounds(50), (15, 20));
        let mut prev = (0, 0);
        for r in 1..=20 {
            let b = s.bounds(r);
            assert!(b.0 >= prev.0 && b.1 >= prev.1 && b.0 <= b.1);
            prev = b;
        }
    }

    #[test]
    fn unknown_strategy_is_rejected() {
        let err = serde_json::from_str::<SimConfig>(r#"{"strategy":"Greedy"}"#).unwrap_err();
        assert!(err.to_string().contains("Greedy"));
        let cfg: SimConfig = serde_json::from_str(r#"{"strategy":"VanillaRandom"}"#).unwrap();
        assert_eq!(cfg.strategy, Strategy::VanillaRandom);
        assert_eq!(cfg.baseline_deploy_count(100), 10);
    }

    #[test]
    fn bad_fractions_fail_validation() {
        let cfg = SimConfig {
            min_report_fraction: 0.0,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(SimConfig::default().validate().is_ok());
    }
}
