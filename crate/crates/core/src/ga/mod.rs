//! Multi-objective genetic search over deployment selections.
//!
//! Scalar fitness (the weighted objective sum) drives tournament and survivor
//! selection; the archive keeps the non-dominated feasible selections seen so
//! far. Every offspring is repaired before it is scored.

mod archive;
mod operators;
mod repair;

pub use archive::{ArchiveEntry, ParetoArchive};
pub use operators::{
    bitflip_mutate, crossover_at, one_point_crossover, tournament_select, tournament_winner,
};
pub use repair::{check_solvable, repair, RepairOutcome};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ProblemInstance, SelectionVector};
use crate::error::CoreError;
use crate::objective::{eval_objectives, is_feasible, ObjectiveVector};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub tournament_size: usize,
    pub seed: u64,
    pub archive_cap: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 100,
            crossover_prob: 0.9,
            tournament_size: 2,
            seed: 0,
            archive_cap: 64,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.population_size < 2 {
            return Err(CoreError::Config(
                "population_size must be at least 2".into(),
            ));
        }
        if self.tournament_size < 2 {
            return Err(CoreError::Config(
                "tournament_size must be at least 2".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(CoreError::Config("crossover_prob must lie in [0,1]".into()));
        }
        if self.archive_cap == 0 {
            return Err(CoreError::Config("archive_cap must be positive".into()));
        }
        Ok(())
    }
}

/// Probability that an initial gene is set: `clamp(2*min_selected/n, 0.05, 0.5)`.
pub fn initial_gene_probability<T: Scalar>(instance: &ProblemInstance<T>) -> f64 {
    let n = instance.len().max(1) as f64;
    (2.0 * instance.thresholds.min_selected as f64 / n).clamp(0.05, 0.5)
}

/// Random, repaired initial population.
pub fn init_population<T: Scalar, R: Rng + ?Sized>(
    instance: &ProblemInstance<T>,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<Vec<SelectionVector>, CoreError> {
    check_solvable(instance)?;
    let n = instance.len();
    let q = initial_gene_probability(instance);
    Ok((0..cfg.population_size)
        .map(|_| {
            let mut sel = SelectionVector::empty(n);
            for i in 0..n {
                if rng.random_bool(q) {
                    sel.set(i, true);
                }
            }
            repair(instance, &sel, rng).selection
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub archive: ParetoArchive<T>,
    /// Archive entry with the highest scalar fitness.
    pub recommended: ArchiveEntry<T>,
    /// Best archived scalar fitness after initialization and after each
    /// generation.
    pub best_scalar_history: Vec<T>,
}

/// Runs the genetic search for `cfg.generations` generations.
pub fn solve<T: Scalar>(
    instance: &ProblemInstance<T>,
    cfg: &GaConfig,
) -> Result<Solution<T>, CoreError> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let population = init_population(instance, cfg, &mut rng)?;

    let mut scored: Vec<(SelectionVector, ObjectiveVector<T>)> = population
        .into_iter()
        .map(|s| {
            let o = eval_objectives(instance, &s);
            (s, o)
        })
        .collect();

    let mut archive = ParetoArchive::with_cap(cfg.archive_cap);
    for (s, o) in &scored {
        if is_feasible(instance, s) {
            archive.offer(s.clone(), *o);
        }
    }
    let mut history = vec![archive.best_scalar().unwrap_or_else(T::zero)];

    for _ in 0..cfg.generations {
        // mating pool drawn from the population and the archive together
        let pool: Vec<&SelectionVector> = scored
            .iter()
            .map(|(s, _)| s)
            .chain(archive.entries().iter().map(|e| &e.selection))
            .collect();
        let pool_scores: Vec<T> = scored
            .iter()
            .map(|(_, o)| o.scalar)
            .chain(archive.entries().iter().map(|e| e.objectives.scalar))
            .collect();

        let mut offspring = Vec::with_capacity(cfg.population_size);
        while offspring.len() < cfg.population_size {
            let a = tournament_select(&pool_scores, cfg.tournament_size, &mut rng)?;
            let b = tournament_select(&pool_scores, cfg.tournament_size, &mut rng)?;
            let (c1, c2) = one_point_crossover(pool[a], pool[b], &mut rng, cfg.crossover_prob)?;
            for child in [c1, c2] {
                if offspring.len() == cfg.population_size {
                    break;
                }
                let mutated = bitflip_mutate(&child, &mut rng);
                offspring.push(repair(instance, &mutated, &mut rng).selection);
            }
        }

        let offspring: Vec<(SelectionVector, ObjectiveVector<T>)> = offspring
            .into_iter()
            .map(|s| {
                let o = eval_objectives(instance, &s);
                (s, o)
            })
            .collect();
        for (s, o) in &offspring {
            if is_feasible(instance, s) {
                archive.offer(s.clone(), *o);
            }
        }

        // survivors: best scalars of population ∪ offspring, stable on ties
        scored.extend(offspring);
        scored.sort_by(|a, b| {
            b.1.scalar
                .partial_cmp(&a.1.scalar)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        scored.truncate(cfg.population_size);

        history.push(archive.best_scalar().unwrap_or_else(T::zero));
    }

    let recommended = archive
        .recommended()
        .cloned()
        .ok_or_else(|| CoreError::Config("search produced no feasible selection".into()))?;
    Ok(Solution {
        archive,
        recommended,
        best_scalar_history: history,
    })
}
