use std::collections::BTreeSet;

use fedeploy_core::{is_feasible, GaConfig, SelectionVector};
use fedeploy_mobility::{WorldConfig, WorldData};
use fedeploy_sim::sim::orchestrator_monitor;
use fedeploy_sim::{
    centralized_train, majority_baseline, required_reports, run_experiment_with_target, SimConfig,
    Simulation, Strategy,
};

fn small_world(seed: u64) -> WorldData {
    WorldData::generate(&WorldConfig {
        user_count: 40,
        records_min: 60,
        records_max: 160,
        seed,
        ..WorldConfig::default()
    })
    .unwrap()
}

fn quick(strategy: Strategy) -> SimConfig {
    SimConfig {
        strategy,
        rounds_max: 12,
        stop_at_target: false,
        hidden_layers: vec![16],
        local_epochs: 1,
        centralized_epochs: 10,
        ga: GaConfig {
            population_size: 20,
            generations: 15,
            ..GaConfig::default()
        },
        ..SimConfig::default()
    }
}

#[test]
fn rounds_are_discarded_exactly_when_too_few_clients_report() {
    let world = small_world(1);
    for strategy in Strategy::ALL {
        let out = run_experiment_with_target::<f32>(&world, &quick(strategy), 1.0).unwrap();
        let mut prev = out.initial_accuracy;
        for r in &out.reports {
            let need = required_reports(r.deployed, 0.8);
            assert_eq!(
                r.discarded,
                r.reported < need,
                "{strategy} round {}",
                r.round
            );
            assert!(r.reported <= r.deployed);
            if r.discarded {
                assert_eq!(r.accuracy, prev, "discarded round changed the model");
            }
            prev = r.accuracy;
        }
    }
}

#[test]
fn ga_deployments_satisfy_every_constraint() {
    let world = small_world(2);
    let cfg = quick(Strategy::OnDemandGA);
    let mut sim = Simulation::<f32>::new(&world, &cfg).unwrap();
    let n = sim.client_count();
    for _ in 0..cfg.rounds_max {
        let round = sim.state.round_index + 1;
        sim.state.requests = orchestrator_monitor(&sim.state.clients, 6);
        let (chosen, objectives) = sim.select_clients(round).unwrap();
        let instance = sim.problem_instance(round);
        if !chosen.is_empty() {
            assert!(objectives.is_some());
            assert!(is_feasible(
                &instance,
                &SelectionVector::from_indices(n, &chosen)
            ));
            let (lo, hi) = cfg.client_schedule.bounds(round);
            assert!(chosen.len() >= lo && chosen.len() <= hi);
            let mut high = 0;
            for &i in &chosen {
                let c = &sim.state.clients[i];
                let u = &sim.state.utilizations[i];
                assert!(u.cpu <= c.cpu_capacity);
                assert!(u.memory <= c.memory_capacity);
                assert!(u.disk <= c.disk_capacity);
                assert!(u.battery <= c.battery_level);
                assert!(c.availability_secs >= cfg.round_time_secs);
                high += (c.movements >= cfg.movement_threshold) as usize;
            }
            assert!(high as f64 <= (cfg.high_movement_fraction * chosen.len() as f64).ceil());
        }
        let report = sim.run_round().unwrap();
        assert_eq!(report.selected_ids, chosen);
        assert!(sim.state.global_model.is_finite());
    }
}

#[test]
fn first_ga_round_deploys_five_and_vanilla_deploys_a_tenth() {
    let world = WorldData::generate(&WorldConfig {
        records_min: 40,
        records_max: 80,
        seed: 3,
        ..WorldConfig::default()
    })
    .unwrap();
    let mut ga = Simulation::<f32>::new(&world, &quick(Strategy::OnDemandGA)).unwrap();
    assert_eq!(ga.run_round().unwrap().deployed, 5);
    let mut vanilla = Simulation::<f32>::new(&world, &quick(Strategy::VanillaRandom)).unwrap();
    for _ in 0..3 {
        assert_eq!(vanilla.run_round().unwrap().deployed, 10);
    }
    let mut fixed = Simulation::<f32>::new(&world, &quick(Strategy::StaticPreconfigured)).unwrap();
    let pool: BTreeSet<usize> = fixed.static_subset().iter().copied().collect();
    assert_eq!(pool.len(), 20);
    for _ in 0..3 {
        let r = fixed.run_round().unwrap();
        assert_eq!(r.deployed, 10);
        assert!(r.selected_ids.iter().all(|i| pool.contains(i)));
    }
}

#[test]
fn availability_grows_under_on_demand_and_is_flat_for_static() {
    let world = small_world(4);
    let ga = run_experiment_with_target::<f32>(&world, &quick(Strategy::OnDemandGA), 1.0).unwrap();
    assert_eq!(ga.reports[0].available, 0);
    for w in ga.reports.windows(2) {
        assert!(w[1].available >= w[0].available);
    }
    assert_eq!(ga.reports.last().unwrap().available, 40);

    let fixed =
        run_experiment_with_target::<f32>(&world, &quick(Strategy::StaticPreconfigured), 1.0)
            .unwrap();
    assert!(fixed.reports.iter().all(|r| r.available == 8));
}

#[test]
fn runs_are_reproducible() {
    let world = small_world(5);
    for strategy in Strategy::ALL {
        let cfg = quick(strategy);
        let a = run_experiment_with_target::<f32>(&world, &cfg, 1.0).unwrap();
        let b = run_experiment_with_target::<f32>(&world, &cfg, 1.0).unwrap();
        assert_eq!(a.reports, b.reports);
        let other = SimConfig { seed: 1, ..cfg };
        let c = run_experiment_with_target::<f32>(&world, &other, 1.0).unwrap();
        assert_ne!(a.reports, c.reports);
    }
}

#[test]
fn deployed_clients_all_report_without_invitations_or_departures() {
    let world = small_world(6);
    let cfg = SimConfig {
        p_higher_priority_invite: 0.0,
        round_time_secs: 0.0,
        ..quick(Strategy::OnDemandGA)
    };
    let out = run_experiment_with_target::<f32>(&world, &cfg, 1.0).unwrap();
    for r in &out.reports {
        assert!(r.deployed > 0);
        assert_eq!(r.reported, r.deployed);
        assert!(!r.discarded);
    }
}

#[test]
fn stopping_at_the_target_ends_the_run() {
    let world = small_world(7);
    let cfg = SimConfig {
        stop_at_target: true,
        ..quick(Strategy::VanillaRandom)
    };
    let out = run_experiment_with_target::<f32>(&world, &cfg, 0.0).unwrap();
    assert_eq!(out.reports.len(), 1);
    assert_eq!(out.rounds_to_target, Some(1));
}

#[test]
fn centralized_model_beats_the_majority_class() {
    let world = small_world(8);
    let cfg = quick(Strategy::OnDemandGA);
    let (model, acc) = centralized_train::<f32>(&world, &cfg).unwrap();
    assert!(model.is_finite());
    let sim = Simulation::<f32>::new(&world, &cfg).unwrap();
    let labels: Vec<usize> = sim
        .client_data()
        .iter()
        .flat_map(|d| d.y_test.iter().copied())
        .collect();
    assert!(acc > majority_baseline(&labels), "{acc}");
}

#[test]
fn mismatched_world_seed_is_rejected() {
    let world = small_world(9);
    let cfg = SimConfig {
        world_seed: Some(10),
        ..quick(Strategy::OnDemandGA)
    };
    assert!(Simulation::<f32>::new(&world, &cfg).is_err());
}
