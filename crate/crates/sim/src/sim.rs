//! Round-by-round simulation of the deployment architecture.
//!
//! Each round: orchestrators flag busy areas, the strategy picks clients, the
//! learning service is deployed, clients that stay reachable train locally,
//! and the server averages the updates unless too few arrive. Afterwards
//! idle clients are re-prioritized and every client advances one visit along
//! its mobility trace.

use std::collections::BTreeSet;

use ndarray::Array2;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use fedeploy_core::objective::resource_ok;
use fedeploy_core::rng::{derive_seed, substream};
use fedeploy_core::{
    solve, AreaRequestVector, ClientProfile, CoreError, DeploymentThresholds, GaConfig,
    ObjectiveVectorF64, ProblemInstanceF64, UtilizationProfile, PRIORITY_LEVELS,
};
use fedeploy_mobility::{VisitRecord, WorldData};

use crate::config::{SimConfig, Strategy};
use crate::data::{pool, ClientData};
use crate::error::SimError;
use crate::mlp::{Mlp, Real};
use crate::report::{required_reports, rounds_to_target, RoundReport};
use crate::train::{fedavg_aggregate, local_train, train_epochs, TrainConfig};

/// Stream keys; every random draw is tied to (seed, purpose, round, client).
mod key {
    pub const DEVICE: u64 = 1;
    pub const MODEL_INIT: u64 = 2;
    pub const START: u64 = 3;
    pub const STAY: u64 = 4;
    pub const BATTERY: u64 = 5;
    pub const INVITE: u64 = 6;
    pub const TRAIN: u64 = 7;
    pub const VANILLA: u64 = 8;
    pub const STATIC_SUBSET: u64 = 9;
    pub const STATIC_PICK: u64 = 10;
    pub const GA: u64 = 11;
    pub const CENTRAL: u64 = 12;
}

/// Mutable part of the simulation.
#[derive(Debug, Clone)]
pub struct WorldState<T> {
    /// Live profiles as seen at the start of the next round.
    pub clients: Vec<ClientProfile<f64>>,
    pub utilizations: Vec<UtilizationProfile<f64>>,
    pub requests: AreaRequestVector,
    pub global_model: Mlp<T>,
    /// Rounds completed so far.
    pub round_index: usize,
    /// Volunteers that already run the learning container.
    pub onboarded: Vec<bool>,
    /// Current visit of each client in its trace.
    pub cursor: Vec<usize>,
    pub accuracy: f64,
}

/// Flags areas whose present clients move noticeably more than the
/// population: mean movements above 1.25x the global mean.
pub fn orchestrator_monitor(
    clients: &[ClientProfile<f64>],
    area_count: usize,
) -> AreaRequestVector {
    if clients.is_empty() {
        return AreaRequestVector::none(area_count);
    }
    let global = clients.iter().map(|c| c.movements).sum::<f64>() / clients.len() as f64;
    let mut sum = vec![0.0; area_count];
    let mut count = vec![0usize; area_count];
    for c in clients {
        sum[c.area_id] += c.movements;
        count[c.area_id] += 1;
    }
    AreaRequestVector {
        requested: sum
            .iter()
            .zip(&count)
            .map(|(&s, &k)| {
                let mean = if k > 0 { s / k as f64 } else { 0.0 };
                (mean > 1.25 * global) as u8
            })
            .collect(),
    }
}

/// Priority levels `1..=PRIORITY_LEVELS` from local accuracies; higher
/// accuracy ranks higher and tied accuracies share a level.
pub fn priorities_from_accuracy(accuracies: &[f64]) -> Vec<u32> {
    let u = accuracies.len();
    let t = PRIORITY_LEVELS as usize;
    accuracies
        .iter()
        .map(|&a| {
            if u == 1 {
                return PRIORITY_LEVELS;
            }
            let rank = accuracies.iter().filter(|&&b| b < a).count();
            (1 + rank * (t - 1) / (u - 1)) as u32
        })
        .collect()
}

pub struct Simulation<T> {
    cfg: SimConfig,
    base_seed: u64,
    area_count: usize,
    traces: Vec<Vec<VisitRecord>>,
    data: Vec<ClientData<T>>,
    test_x: Array2<T>,
    test_y: Vec<usize>,
    static_subset: Vec<usize>,
    pub state: WorldState<T>,
}

/// Output of a full run.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub reports: Vec<RoundReport>,
    pub initial_accuracy: f64,
    pub target_accuracy: f64,
    pub centralized_accuracy: Option<f64>,
    pub rounds_to_target: Option<usize>,
}

/// Seed combining the world's and the run's seeds.
pub fn run_seed(world: &WorldData, cfg: &SimConfig) -> u64 {
    derive_seed(cfg.seed, &[world.world.config.seed])
}

fn layer_sizes(world: &WorldData, cfg: &SimConfig) -> Vec<usize> {
    let mut sizes = vec![world.world.config.feature_len()];
    sizes.extend(&cfg.hidden_layers);
    sizes.push(world.world.config.place_count);
    sizes
}

/// The untrained model every strategy and the centralized baseline start from.
pub fn initial_model<T: Real>(world: &WorldData, cfg: &SimConfig) -> Result<Mlp<T>, SimError> {
    Mlp::new(
        &layer_sizes(world, cfg),
        &mut substream(run_seed(world, cfg), &[key::MODEL_INIT]),
    )
}

fn client_data<T: Real>(world: &WorldData) -> Vec<ClientData<T>> {
    world
        .datasets
        .values()
        .map(ClientData::from_dataset)
        .collect()
}

fn pooled_test<T: Real>(data: &[ClientData<T>]) -> (Array2<T>, Vec<usize>) {
    pool(data.iter().map(|d| (d.x_test.view(), d.y_test.as_slice())))
}

/// Trains the same network on every client's training split at once and
/// evaluates it on the pooled test split.
pub fn centralized_train<T: Real>(
    world: &WorldData,
    cfg: &SimConfig,
) -> Result<(Mlp<T>, f64), SimError> {
    cfg.validate()?;
    let data: Vec<ClientData<T>> = client_data(world);
    let (x, y) = pool(
        data.iter()
            .map(|d| (d.x_train.view(), d.y_train.as_slice())),
    );
    let (tx, ty) = pooled_test(&data);
    let mut model = initial_model(world, cfg)?;
    let tc = TrainConfig {
        epochs: cfg.centralized_epochs,
        learning_rate: cfg.learning_rate,
        batch_size: cfg.batch_size,
    };
    train_epochs(
        &mut model,
        x.view(),
        &y,
        &tc,
        &mut substream(run_seed(world, cfg), &[key::CENTRAL]),
    );
    let acc = model.accuracy(tx.view(), &ty);
    Ok((model, acc))
}

pub fn run_experiment<T: Real>(
    world: &WorldData,
    cfg: &SimConfig,
) -> Result<ExperimentOutcome, SimError> {
    let (target, central) = match cfg.target_accuracy {
        Some(t) => (t, None),
        None => {
            let (_, acc) = centralized_train::<T>(world, cfg)?;
            (cfg.target_fraction * acc, Some(acc))
        }
    };
    let mut outcome = run_experiment_with_target::<T>(world, cfg, target)?;
    outcome.centralized_accuracy = central;
    Ok(outcome)
}

/// Runs rounds until `target` is reached (if the config stops there) or
/// `rounds_max` rounds have been played.
pub fn run_experiment_with_target<T: Real>(
    world: &WorldData,
    cfg: &SimConfig,
    target: f64,
) -> Result<ExperimentOutcome, SimError> {
    let mut sim = Simulation::<T>::new(world, cfg)?;
    let initial_accuracy = sim.state.accuracy;
    let mut reports = Vec::with_capacity(cfg.rounds_max);
    for _ in 0..cfg.rounds_max {
        let report = sim.run_round()?;
        let done = cfg.stop_at_target && report.accuracy >= target;
        reports.push(report);
        if done {
            break;
        }
    }
    Ok(ExperimentOutcome {
        rounds_to_target: rounds_to_target(&reports, target),
        reports,
        initial_accuracy,
        target_accuracy: target,
        centralized_accuracy: None,
    })
}

impl<T: Real> Simulation<T> {
    pub fn new(world: &WorldData, cfg: &SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        if let Some(s) = cfg.world_seed {
            if s != world.world.config.seed {
                return Err(SimError::Config(format!(
                    "config expects world seed {s}, world was generated with seed {}",
                    world.world.config.seed
                )));
            }
        }
        let n = world.world.users.len();
        let base_seed = run_seed(world, cfg);
        let area_count = world.world.config.area_count;

        let mut traces: Vec<Vec<VisitRecord>> = vec![Vec::new(); n];
        for v in &world.traces {
            traces[v.user_id].push(v.clone());
        }
        if let Some(u) = traces.iter().position(Vec::is_empty) {
            return Err(SimError::EmptyDataset(u));
        }
        let data: Vec<ClientData<T>> = client_data(world);
        let (test_x, test_y) = pooled_test(&data);

        let mut clients = Vec::with_capacity(n);
        let mut utilizations = Vec::with_capacity(n);
        let mut cursor = Vec::with_capacity(n);
        for (i, summary) in world.summaries.iter().enumerate() {
            let (profile, util) = device(base_seed, cfg, i, summary.movements);
            clients.push(profile);
            utilizations.push(util);
            cursor.push(
                substream(base_seed, &[key::START, i as u64]).random_range(0..traces[i].len()),
            );
        }

        let k = ((cfg.static_preconfigured_fraction * n as f64) - 1e-9)
            .ceil()
            .max(0.0) as usize;
        let mut static_subset = sample(
            &mut substream(base_seed, &[key::STATIC_SUBSET]),
            n,
            k.min(n),
        )
        .into_vec();
        static_subset.sort_unstable();

        let global_model = initial_model(world, cfg)?;
        let mut sim = Self {
            cfg: cfg.clone(),
            base_seed,
            area_count,
            traces,
            data,
            test_x,
            test_y,
            static_subset,
            state: WorldState {
                clients,
                utilizations,
                requests: AreaRequestVector::none(area_count),
                global_model,
                round_index: 0,
                onboarded: vec![false; n],
                cursor,
                accuracy: 0.0,
            },
        };
        sim.state.accuracy = sim.global_accuracy();
        sim.refresh_profiles(1);
        sim.update_priorities(&BTreeSet::new());
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn client_count(&self) -> usize {
        self.state.clients.len()
    }

    pub fn static_subset(&self) -> &[usize] {
        &self.static_subset
    }

    pub fn client_data(&self) -> &[ClientData<T>] {
        &self.data
    }

    pub fn global_accuracy(&self) -> f64 {
        self.state
            .global_model
            .accuracy(self.test_x.view(), &self.test_y)
    }

    /// Clients able to take part at the start of a round.
    pub fn available_clients(&self) -> usize {
        match self.cfg.strategy {
            Strategy::OnDemandGA => self.state.onboarded.iter().filter(|&&b| b).count(),
            Strategy::VanillaRandom => self.client_count(),
            Strategy::StaticPreconfigured => self.static_subset.len(),
        }
    }

    /// Time the client will still spend in its current area: the unfinished
    /// part of the current visit plus any directly following visits in the
    /// same area.
    fn remaining_stay(&self, client: usize, round: usize) -> f64 {
        let trace = &self.traces[client];
        let at = self.state.cursor[client];
        let area = trace[at].area_id;
        let frac: f64 =
            substream(self.base_seed, &[key::STAY, round as u64, client as u64]).random();
        let mut stay = frac * trace[at].duration_secs;
        for step in 1..trace.len() {
            let v = &trace[(at + step) % trace.len()];
            if v.area_id != area {
                break;
            }
            stay += v.duration_secs;
        }
        stay
    }

    fn refresh_profiles(&mut self, round: usize) {
        for i in 0..self.client_count() {
            let area = self.traces[i][self.state.cursor[i]].area_id;
            let stay = self.remaining_stay(i, round);
            let battery = substream(self.base_seed, &[key::BATTERY, round as u64, i as u64])
                .random_range(5.0..100.0);
            let c = &mut self.state.clients[i];
            c.area_id = area;
            c.availability_secs = stay;
            c.battery_level = battery;
        }
    }

    /// Deployment problem built from the live profiles for `round`.
    pub fn problem_instance(&self, round: usize) -> ProblemInstanceF64 {
        let n = self.client_count();
        let (lo, hi) = self.cfg.client_schedule.bounds(round);
        ProblemInstanceF64 {
            clients: self.state.clients.clone(),
            utilizations: self.state.utilizations.clone(),
            requests: self.state.requests.clone(),
            weights: self.cfg.objective_weights.clone(),
            thresholds: DeploymentThresholds {
                min_round_time_secs: self.cfg.round_time_secs,
                movement_threshold: self.cfg.movement_threshold,
                high_movement_fraction: self.cfg.high_movement_fraction,
                min_selected: lo.min(n),
                max_selected: hi.min(n),
            },
            area_count: self.area_count,
        }
    }

    /// Picks the clients for `round` under the configured strategy. An
    /// unsolvable deployment problem yields an empty selection.
    pub fn select_clients(
        &self,
        round: usize,
    ) -> Result<(Vec<usize>, Option<ObjectiveVectorF64>), SimError> {
        let n = self.client_count();
        let r = round as u64;
        match self.cfg.strategy {
            Strategy::OnDemandGA => {
                let instance = self.problem_instance(round);
                let ga = GaConfig {
                    seed: derive_seed(self.base_seed, &[key::GA, r]),
                    ..self.cfg.ga.clone()
                };
                match solve(&instance, &ga) {
                    Ok(sol) => Ok((
                        sol.recommended.selection.selected().collect(),
                        Some(sol.recommended.objectives),
                    )),
                    Err(CoreError::Infeasible { .. }) => Ok((Vec::new(), None)),
                    Err(e) => Err(e.into()),
                }
            }
            Strategy::VanillaRandom => {
                let k = self.cfg.baseline_deploy_count(n).min(n);
                let mut ids =
                    sample(&mut substream(self.base_seed, &[key::VANILLA, r]), n, k).into_vec();
                ids.sort_unstable();
                Ok((ids, None))
            }
            Strategy::StaticPreconfigured => {
                let pool = &self.static_subset;
                let k = self.cfg.baseline_deploy_count(n).min(pool.len());
                let mut ids: Vec<usize> = sample(
                    &mut substream(self.base_seed, &[key::STATIC_PICK, r]),
                    pool.len(),
                    k,
                )
                .into_iter()
                .map(|j| pool[j])
                .collect();
                ids.sort_unstable();
                Ok((ids, None))
            }
        }
    }

    /// Deployed clients that deliver an update: no higher-priority service
    /// claimed them, they stay in the area for a full round, and the device
    /// can host the service.
    pub fn simulate_dropouts(&self, selected: &[usize], round: usize) -> Vec<usize> {
        let p = self.cfg.p_higher_priority_invite;
        let instance_view = self.problem_instance(round);
        selected
            .iter()
            .copied()
            .filter(|&i| {
                let invited = substream(self.base_seed, &[key::INVITE, round as u64, i as u64])
                    .random_bool(p);
                let stays = self.state.clients[i].availability_secs >= self.cfg.round_time_secs;
                !invited && stays && resource_ok(&instance_view, i)
            })
            .collect()
    }

    /// Re-ranks clients that were not deployed by the accuracy of the global
    /// model on their local test data; deployed clients keep their priority
    /// and log one more served round.
    pub fn update_priorities(&mut self, deployed: &BTreeSet<usize>) {
        let idle: Vec<usize> = (0..self.client_count())
            .filter(|i| !deployed.contains(i))
            .collect();
        let model = &self.state.global_model;
        let acc: Vec<f64> = idle
            .par_iter()
            .map(|&i| model.accuracy(self.data[i].x_test.view(), &self.data[i].y_test))
            .collect();
        for (&i, p) in idle.iter().zip(priorities_from_accuracy(&acc)) {
            self.state.clients[i].priority = p;
        }
        for &i in deployed {
            self.state.clients[i].rounds_served += 1;
        }
    }

    fn onboard(&mut self, selected: &[usize]) {
        for &i in selected {
            self.state.onboarded[i] = true;
        }
        let requests = &self.state.requests;
        let mut waiting: Vec<usize> = (0..self.client_count())
            .filter(|&i| !self.state.onboarded[i])
            .collect();
        waiting.sort_by(|&a, &b| {
            let (ca, cb) = (&self.state.clients[a], &self.state.clients[b]);
            requests
                .is_requested(cb.area_id)
                .cmp(&requests.is_requested(ca.area_id))
                .then(cb.movements.total_cmp(&ca.movements))
                .then(a.cmp(&b))
        });
        for &i in waiting.iter().take(self.cfg.onboard_per_round) {
            self.state.onboarded[i] = true;
        }
    }

    pub fn run_round(&mut self) -> Result<RoundReport, SimError> {
        let round = self.state.round_index + 1;
        let available = self.available_clients();
        self.state.requests = orchestrator_monitor(&self.state.clients, self.area_count);

        let (selected, objectives) = self.select_clients(round)?;
        let reporters = self.simulate_dropouts(&selected, round);
        let deployed = selected.len();
        let discarded = reporters.len() < required_reports(deployed, self.cfg.min_report_fraction);

        if !discarded {
            let tc = TrainConfig {
                epochs: self.cfg.local_epochs,
                learning_rate: self.cfg.learning_rate,
                batch_size: self.cfg.batch_size,
            };
            let global = &self.state.global_model;
            let updates = reporters
                .par_iter()
                .map(|&i| {
                    let mut rng = substream(self.base_seed, &[key::TRAIN, round as u64, i as u64]);
                    local_train(global, &self.data[i], &tc, &mut rng)
                })
                .collect::<Result<Vec<_>, _>>()?;
            self.state.global_model = fedavg_aggregate(&updates)?;
            self.state.accuracy = self.global_accuracy();
        }

        let labels: BTreeSet<usize> = selected
            .iter()
            .flat_map(|&i| self.data[i].train_labels())
            .collect();
        let report = RoundReport {
            round,
            strategy: self.cfg.strategy,
            data_volume: selected.iter().map(|&i| self.data[i].train_len()).sum(),
            distinct_labels: labels.len(),
            selected_ids: selected.clone(),
            deployed,
            reported: reporters.len(),
            discarded,
            accuracy: self.state.accuracy,
            available,
            objectives,
        };

        let deployed_set: BTreeSet<usize> = selected.iter().copied().collect();
        self.update_priorities(&deployed_set);
        if self.cfg.strategy == Strategy::OnDemandGA {
            self.onboard(&selected);
        }
        for i in 0..self.client_count() {
            self.state.cursor[i] = (self.state.cursor[i] + 1) % self.traces[i].len();
        }
        self.state.round_index = round;
        self.refresh_profiles(round + 1);
        Ok(report)
    }
}

/// Device capacities and service footprint of one client. A share of devices
/// lacks room for the service on one resource.
fn device(
    seed: u64,
    cfg: &SimConfig,
    client: usize,
    movements: f64,
) -> (ClientProfile<f64>, UtilizationProfile<f64>) {
    let mut rng = substream(seed, &[key::DEVICE, client as u64]);
    let util = UtilizationProfile {
        cpu: rng.random_range(0.3..0.8),
        memory: rng.random_range(200.0..600.0),
        battery: rng.random_range(5.0..12.0),
        disk: rng.random_range(200.0..800.0),
    };
    let mut profile = ClientProfile {
        id: client,
        cpu_capacity: rng.random_range(1.0..4.0),
        memory_capacity: rng.random_range(1024.0..4096.0),
        disk_capacity: rng.random_range(2000.0..16000.0),
        battery_level: 100.0,
        availability_secs: 0.0,
        area_id: 0,
        movements,
        priority: 1,
        rounds_served: 0,
    };
    if rng.random_bool(cfg.weak_device_fraction) {
        let shortfall = rng.random_range(0.3..0.9);
        match rng.random_range(0..3) {
            0 => profile.cpu_capacity = util.cpu * shortfall,
            1 => profile.memory_capacity = util.memory * shortfall,
            _ => profile.disk_capacity = util.disk * shortfall,
        }
    }
    (profile, util)
}
