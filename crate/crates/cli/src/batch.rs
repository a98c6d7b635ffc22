//! Multi-seed experiment runs and their aggregation.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fedeploy_mobility::WorldData;
use fedeploy_sim::{
    centralized_train, run_experiment_with_target, Real, RoundReport, RunSummary, SimConfig,
    Strategy,
};

use crate::error::CliError;

/// One config run on one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub target_accuracy: f64,
    pub centralized_accuracy: Option<f64>,
    pub initial_accuracy: f64,
    pub summary: RunSummary,
    #[serde(skip)]
    pub reports: Vec<RoundReport>,
}

/// `cfg` with its run seed replaced.
pub fn with_seed(cfg: &SimConfig, seed: u64) -> SimConfig {
    SimConfig {
        seed,
        ..cfg.clone()
    }
}

/// Settings the centralized reference depends on.
fn reference_key(cfg: &SimConfig) -> String {
    format!(
        "{}|{:?}|{}|{}|{}",
        cfg.seed, cfg.hidden_layers, cfg.centralized_epochs, cfg.learning_rate, cfg.batch_size
    )
}

/// Runs every config on every seed against the same world. Returns
/// `runs[config][seed]`. Configs without an explicit target aim at
/// `target_fraction` of the centralized accuracy for the same seed; that
/// reference is trained once per distinct model setup.
pub fn run_batch<T: Real>(
    world: &WorldData,
    cfgs: &[SimConfig],
    seeds: &[u64],
) -> Result<Vec<Vec<SeedRun>>, CliError> {
    let jobs: Vec<SimConfig> = cfgs
        .iter()
        .flat_map(|c| seeds.iter().map(|&s| with_seed(c, s)))
        .collect();
    for cfg in &jobs {
        cfg.validate()?;
    }

    let mut wanted: BTreeMap<String, &SimConfig> = BTreeMap::new();
    for cfg in jobs.iter().filter(|c| c.target_accuracy.is_none()) {
        wanted.entry(reference_key(cfg)).or_insert(cfg);
    }
    let references: BTreeMap<String, f64> = wanted
        .into_par_iter()
        .map(|(key, cfg)| centralized_train::<T>(world, cfg).map(|(_, acc)| (key, acc)))
        .collect::<Result<_, _>>()?;

    let flat: Vec<SeedRun> = jobs
        .par_iter()
        .map(|cfg| {
            let central = cfg
                .target_accuracy
                .is_none()
                .then(|| references[&reference_key(cfg)]);
            let target = cfg
                .target_accuracy
                .unwrap_or_else(|| cfg.target_fraction * central.unwrap_or(0.0));
            let out = run_experiment_with_target::<T>(world, cfg, target)?;
            Ok(SeedRun {
                seed: cfg.seed,
                target_accuracy: target,
                centralized_accuracy: central,
                initial_accuracy: out.initial_accuracy,
                summary: RunSummary::from_reports(cfg.strategy, &out.reports, target),
                reports: out.reports,
            })
        })
        .collect::<Result<_, CliError>>()?;

    let mut it = flat.into_iter();
    Ok(cfgs
        .iter()
        .map(|_| it.by_ref().take(seeds.len()).collect())
        .collect())
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Averages over the seeds of one config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub label: String,
    pub strategy: Strategy,
    pub seeds: Vec<u64>,
    /// Runs that reached their target accuracy.
    pub reached_target: usize,
    /// Mean over the runs that reached the target.
    pub mean_rounds_to_target: Option<f64>,
    pub discard_fraction: f64,
    pub mean_available: f64,
    pub final_accuracy: f64,
    pub mean_data_volume: f64,
    pub mean_distinct_labels: f64,
    pub mean_target_accuracy: f64,
    pub runs: Vec<SeedRun>,
}

impl BatchSummary {
    pub fn new(label: &str, strategy: Strategy, runs: &[SeedRun]) -> Self {
        let reached: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.summary.rounds_to_target.map(|k| k as f64))
            .collect();
        Self {
            label: label.to_string(),
            strategy,
            seeds: runs.iter().map(|r| r.seed).collect(),
            reached_target: reached.len(),
            mean_rounds_to_target: (!reached.is_empty()).then(|| mean(reached.iter().copied())),
            discard_fraction: mean(runs.iter().map(|r| r.summary.discard_fraction)),
            mean_available: mean(runs.iter().map(|r| r.summary.mean_available)),
            final_accuracy: mean(runs.iter().map(|r| r.summary.final_accuracy)),
            mean_data_volume: mean(runs.iter().map(|r| r.summary.mean_data_volume)),
            mean_distinct_labels: mean(runs.iter().map(|r| r.summary.mean_distinct_labels)),
            mean_target_accuracy: mean(runs.iter().map(|r| r.target_accuracy)),
            runs: runs.to_vec(),
        }
    }
}

#[derive(Debug, Serialize)]
struct TableRow<'a> {
    config: &'a str,
    strategy: &'static str,
    seeds: usize,
    reached_target: usize,
    mean_rounds_to_target: Option<f64>,
    discard_fraction: f64,
    mean_available: f64,
    final_accuracy: f64,
    mean_data_volume: f64,
    mean_distinct_labels: f64,
}

impl<'a> From<&'a BatchSummary> for TableRow<'a> {
    fn from(s: &'a BatchSummary) -> Self {
        Self {
            config: &s.label,
            strategy: s.strategy.name(),
            seeds: s.seeds.len(),
            reached_target: s.reached_target,
            mean_rounds_to_target: s.mean_rounds_to_target,
            discard_fraction: s.discard_fraction,
            mean_available: s.mean_available,
            final_accuracy: s.final_accuracy,
            mean_data_volume: s.mean_data_volume,
            mean_distinct_labels: s.mean_distinct_labels,
        }
    }
}

pub fn write_summary_csv(path: &Path, summaries: &[BatchSummary]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    for s in summaries {
        w.serialize(TableRow::from(s))
            .map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Fixed-width text version of the summary table.
pub fn format_table(summaries: &[BatchSummary]) -> String {
    let mut out = format!(
        "{:<16} {:<20} {:>7} {:>12} {:>9} {:>10} {:>9} {:>9} {:>7}\n",
        "config",
        "strategy",
        "reached",
        "to_target",
        "discard",
        "available",
        "final acc",
        "volume",
        "labels"
    );
    for s in summaries {
        let rtt = s
            .mean_rounds_to_target
            .map_or_else(|| "-".to_string(), |v| format!("{v:.1}"));
        out.push_str(&format!(
            "{:<16} {:<20} {:>3}/{:<3} {:>12} {:>9.3} {:>10.1} {:>9.4} {:>9.0} {:>7.2}\n",
            s.label,
            s.strategy.name(),
            s.reached_target,
            s.seeds.len(),
            rtt,
            s.discard_fraction,
            s.mean_available,
            s.final_accuracy,
            s.mean_data_volume,
            s.mean_distinct_labels
        ));
    }
    out
}

#[derive(Debug, Serialize)]
struct MergedRow<'a> {
    config: &'a str,
    seed: u64,
    round: usize,
    strategy: &'static str,
    deployed: usize,
    reported: usize,
    discarded: bool,
    accuracy: f64,
    target_accuracy: f64,
    available: usize,
    data_volume: usize,
    distinct_labels: usize,
}

/// Every round of every run, one row each, for plotting.
pub fn write_merged_rounds_csv(
    path: &Path,
    labelled: &[(&str, &[SeedRun])],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    for (label, runs) in labelled {
        for run in *runs {
            for r in &run.reports {
                w.serialize(MergedRow {
                    config: label,
                    seed: run.seed,
                    round: r.round,
                    strategy: r.strategy.name(),
                    deployed: r.deployed,
                    reported: r.reported,
                    discarded: r.discarded,
                    accuracy: r.accuracy,
                    target_accuracy: run.target_accuracy,
                    available: r.available,
                    data_volume: r.data_volume,
                    distinct_labels: r.distinct_labels,
                })
                .map_err(|e| CliError::csv(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Serialize)]
struct MeanRow {
    round: usize,
    runs: usize,
    accuracy: f64,
    discarded: f64,
    available: f64,
    data_volume: f64,
    distinct_labels: f64,
}

/// Per-round means across seeds; a round only averages the runs that lasted
/// that long.
pub fn write_mean_rounds_csv(path: &Path, runs: &[SeedRun]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let longest = runs.iter().map(|r| r.reports.len()).max().unwrap_or(0);
    for k in 0..longest {
        let at: Vec<&RoundReport> = runs.iter().filter_map(|r| r.reports.get(k)).collect();
        w.serialize(MeanRow {
            round: k + 1,
            runs: at.len(),
            accuracy: mean(at.iter().map(|r| r.accuracy)),
            discarded: mean(at.iter().map(|r| r.discarded as u8 as f64)),
            available: mean(at.iter().map(|r| r.available as f64)),
            data_volume: mean(at.iter().map(|r| r.data_volume as f64)),
            distinct_labels: mean(at.iter().map(|r| r.distinct_labels as f64)),
        })
        .map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
