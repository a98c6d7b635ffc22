use std::path::PathBuf;
use std::time::Instant;

use fedeploy_core::ga::{init_population, repair};
use fedeploy_core::objective::dominates;
use fedeploy_core::rng::rng_from_seed;
use fedeploy_core::synthetic::{random_instance, InstanceShape};
use fedeploy_core::{
    enumerate_pareto, hypervolume, is_feasible, solve, CoreError, GaConfig, ParetoArchiveF64,
    ProblemInstanceF64, SelectionVector,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn load(name: &str) -> ProblemInstanceF64 {
    ProblemInstanceF64::load(fixture(&format!("{name}.json"))).unwrap()
}

fn names() -> Vec<String> {
    std::iter::once("small10".to_string())
        .chain((1..10).map(|k| format!("small10_{k}")))
        .collect()
}

#[test]
fn committed_fronts_match_enumeration() {
    for name in names() {
        let inst = load(&name);
        let committed: ParetoArchiveF64 = serde_json::from_str(
            &std::fs::read_to_string(fixture(&format!("{name}.front.json"))).unwrap(),
        )
        .unwrap();
        let front = enumerate_pareto(&inst).unwrap();
        assert_eq!(front.entries(), committed.entries(), "{name}");
    }
}

#[test]
fn small10_archive_is_contained_in_exact_front() {
    let inst = load("small10");
    let front = enumerate_pareto(&inst).unwrap();
    let sol = solve(&inst, &GaConfig::default()).unwrap();
    for e in sol.archive.entries() {
        assert!(is_feasible(&inst, &e.selection));
        assert!(
            front.contains(&e.selection),
            "{} not Pareto-optimal",
            e.selection
        );
    }
    let ratio = hypervolume(&sol.archive, [0.0; 5]) / hypervolume(&front, [0.0; 5]);
    assert!(ratio >= 0.95, "hypervolume ratio {ratio}");
}

#[test]
fn solve_is_deterministic() {
    let inst = load("small10_4");
    let cfg = GaConfig {
        seed: 17,
        ..GaConfig::default()
    };
    let a = solve(&inst, &cfg).unwrap();
    let b = solve(&inst, &cfg).unwrap();
    assert_eq!(a.archive, b.archive);
    assert_eq!(a.recommended, b.recommended);
}

#[test]
fn zero_generations_keeps_initial_front() {
    let inst = load("small10_2");
    let cfg = GaConfig {
        generations: 0,
        seed: 3,
        ..GaConfig::default()
    };
    let sol = solve(&inst, &cfg).unwrap();
    let pop = init_population(&inst, &cfg, &mut rng_from_seed(cfg.seed)).unwrap();
    // expected: non-dominated subset of the distinct repaired initial selections
    let mut distinct: Vec<SelectionVector> = Vec::new();
    for s in pop {
        if !distinct.contains(&s) {
            distinct.push(s);
        }
    }
    let scored: Vec<_> = distinct
        .iter()
        .map(|s| (s.clone(), fedeploy_core::eval_objectives(&inst, s)))
        .collect();
    let expected: Vec<&SelectionVector> = scored
        .iter()
        .filter(|(_, o)| !scored.iter().any(|(_, p)| dominates(p, o)))
        .map(|(s, _)| s)
        .collect();
    assert_eq!(sol.archive.len(), expected.len());
    for s in expected {
        assert!(sol.archive.contains(s));
    }
    assert_eq!(sol.best_scalar_history.len(), 1);
}

#[test]
fn recommendation_has_max_scalar() {
    let inst = load("small10_6");
    let sol = solve(&inst, &GaConfig::default()).unwrap();
    let best = sol
        .archive
        .entries()
        .iter()
        .map(|e| e.objectives.scalar)
        .fold(f64::MIN, f64::max);
    assert_eq!(sol.recommended.objectives.scalar, best);
}

#[test]
fn archive_best_scalar_never_decreases() {
    for seed in 0..5 {
        let inst = random_instance(
            &InstanceShape {
                clients: 30,
                areas: 4,
                min_selected: 3,
                max_selected: 12,
                ..InstanceShape::default()
            },
            seed,
        );
        let sol = solve(
            &inst,
            &GaConfig {
                seed,
                ..GaConfig::default()
            },
        )
        .unwrap();
        for w in sol.best_scalar_history.windows(2) {
            assert!(w[1] >= w[0], "elitism broken: {:?}", w);
        }
        let entries = sol.archive.entries();
        for a in entries {
            for b in entries {
                assert!(!dominates(&a.objectives, &b.objectives));
            }
        }
        assert!(entries.len() <= 64);
    }
}

#[test]
fn initial_population_is_feasible_with_enough_genes() {
    let inst = random_instance(
        &InstanceShape {
            clients: 10,
            overload_rate: 0.0,
            short_stay_rate: 0.0,
            min_selected: 2,
            max_selected: 10,
            movement_threshold: 100.0,
            ..InstanceShape::default()
        },
        5,
    );
    let cfg = GaConfig::default();
    let pop = init_population(&inst, &cfg, &mut rng_from_seed(1)).unwrap();
    assert_eq!(pop.len(), cfg.population_size);
    for s in &pop {
        assert!(is_feasible(&inst, s));
        assert!(s.count() >= 2);
    }
    let again = init_population(&inst, &cfg, &mut rng_from_seed(1)).unwrap();
    assert_eq!(pop, again);
}

#[test]
fn unsolvable_instance_is_rejected() {
    let mut inst = load("small10");
    inst.thresholds.min_selected = 1;
    for c in &mut inst.clients {
        c.availability_secs = 10.0;
    }
    assert!(matches!(
        solve(&inst, &GaConfig::default()),
        Err(CoreError::Infeasible { .. })
    ));
}

#[test]
fn repaired_overload_had_a_same_area_substitute() {
    // Every overloaded fixture client repairs to a feasible selection; when a
    // capable same-area client exists, the repaired selection covers that area.
    let mut checked = 0;
    for (name, i) in names()
        .into_iter()
        .flat_map(|n| (0..10).map(move |i| (n.clone(), i)))
    {
        let inst = load(&name);
        if fedeploy_core::objective::resource_ok(&inst, i) {
            continue;
        }
        let area = inst.clients[i].area_id;
        let has_substitute = (0..inst.len()).any(|j| {
            j != i
                && inst.clients[j].area_id == area
                && fedeploy_core::objective::eligible(&inst, j)
        });
        let mut sel = SelectionVector::empty(inst.len());
        sel.set(i, true);
        let out = repair(&inst, &sel, &mut rng_from_seed(i as u64));
        assert!(is_feasible(&inst, &out.selection));
        assert!(!out.selection.get(i));
        if has_substitute {
            assert!(out
                .selection
                .selected()
                .any(|j| inst.clients[j].area_id == area));
            checked += 1;
        }
    }
    assert!(
        checked > 0,
        "fixture has no overloaded client with a substitute"
    );
}

#[test]
fn runtime_grows_at_most_linearly_in_generations() {
    let inst = random_instance(
        &InstanceShape {
            clients: 40,
            areas: 5,
            min_selected: 5,
            max_selected: 20,
            ..InstanceShape::default()
        },
        9,
    );
    let time = |generations| {
        let cfg = GaConfig {
            generations,
            ..GaConfig::default()
        };
        let start = Instant::now();
        solve(&inst, &cfg).unwrap();
        start.elapsed().as_secs_f64()
    };
    time(10);
    let short = time(40);
    let long = time(160);
    // 4x the generations; allow generous slack for timer noise
    assert!(
        long < short * 4.0 * 2.0 + 0.05,
        "40 gens {short}s, 160 gens {long}s"
    );
}
