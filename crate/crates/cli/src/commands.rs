use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use fedeploy_core::{
    enumerate_pareto, hypervolume, solve, validate_instance, GaConfig, ProblemInstanceF64,
};
use fedeploy_mobility::{WorldConfig, WorldData};
use fedeploy_sim::{write_reports_csv, Real, SimConfig};

use crate::batch::{
    format_table, run_batch, write_mean_rounds_csv, write_merged_rounds_csv, write_summary_csv,
    BatchSummary, SeedRun,
};
use crate::error::CliError;
use crate::manifest::{read_json, write_json, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "fedeploy",
    version,
    about = "On-demand client deployment for federated learning"
)]
pub struct Cli {
    /// Base seed; overrides the seed in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// JSON config of the subcommand: world config for `generate`, GA config
    /// for `optimize`, simulation config for `simulate`. For `compare` it is
    /// added in front of the positional configs.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic mobility world with one dataset per client.
    Generate,
    /// Run the genetic solver on a problem instance.
    Optimize {
        /// Problem instance JSON.
        instance: PathBuf,
    },
    /// Enumerate the exact Pareto front of a small problem instance.
    Oracle {
        /// Problem instance JSON.
        instance: PathBuf,
    },
    /// Run one strategy on a generated world, once per seed.
    Simulate {
        /// Directory written by `generate`.
        world: PathBuf,
        /// Number of consecutive seeds to run, starting at the base seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, value_enum, default_value = "f32")]
        precision: Precision,
    },
    /// Run several simulation configs on the same world and seeds.
    Compare {
        /// Directory written by `generate`.
        world: PathBuf,
        /// Simulation configs to compare; the file stem labels each one.
        configs: Vec<PathBuf>,
        /// Number of consecutive seeds to run, starting at the base seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, value_enum, default_value = "f32")]
        precision: Precision,
    },
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_path();
    match &cli.command {
        Command::Generate => generate(cli.config.as_deref(), cli.seed, out),
        Command::Optimize { instance } => optimize(instance, cli.config.as_deref(), cli.seed, out),
        Command::Oracle { instance } => oracle(instance, out),
        Command::Simulate {
            world,
            seeds,
            precision,
        } => simulate(
            world,
            cli.config.as_deref(),
            cli.seed,
            *seeds,
            *precision,
            out,
        ),
        Command::Compare {
            world,
            configs,
            seeds,
            precision,
        } => {
            let all: Vec<PathBuf> = cli.config.iter().chain(configs).cloned().collect();
            compare(world, &all, cli.seed, *seeds, *precision, out)
        }
    }
}

fn load_or_default<T: serde::de::DeserializeOwned + Default>(
    path: Option<&Path>,
) -> Result<T, CliError> {
    path.map_or_else(|| Ok(T::default()), read_json)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn seed_list(base: u64, count: u64) -> Result<Vec<u64>, CliError> {
    if count == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    Ok((0..count).map(|k| base + k).collect())
}

pub fn generate(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg: WorldConfig = load_or_default(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let inputs: Vec<&Path> = config.into_iter().collect();
    let mut manifest = RunManifest::begin("generate", &inputs);
    manifest.seeds = vec![cfg.seed];
    manifest.config = json!({ "world": cfg });

    let world = WorldData::generate(&cfg)?;
    create_dir(out)?;
    let written = world.save(out)?;
    manifest.add_outputs(out, written);
    manifest.finish(out)?;
    println!(
        "generated {} clients, {} visits into {}",
        world.datasets.len(),
        world.traces.len(),
        out.display()
    );
    Ok(())
}

fn load_instance(path: &Path) -> Result<ProblemInstanceF64, CliError> {
    let instance: ProblemInstanceF64 = read_json(path)?;
    let report = validate_instance(&instance);
    if !report.is_ok() {
        return Err(CliError::Usage(format!(
            "{}: invalid instance\n{report}",
            path.display()
        )));
    }
    Ok(instance)
}

pub const ARCHIVE_FILE: &str = "archive.json";
pub const RECOMMENDATION_FILE: &str = "recommendation.json";
pub const FRONT_FILE: &str = "front.json";

pub fn optimize(
    instance_path: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(), CliError> {
    let mut cfg: GaConfig = load_or_default(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let instance = load_instance(instance_path)?;
    let inputs: Vec<&Path> = std::iter::once(instance_path).chain(config).collect();
    let mut manifest = RunManifest::begin("optimize", &inputs);
    manifest.seeds = vec![cfg.seed];
    manifest.config = json!({ "ga": cfg });

    let mut solution = solve(&instance, &cfg)?;
    solution.archive.sort_by_genes();
    create_dir(out)?;
    let archive_path = out.join(ARCHIVE_FILE);
    write_json(&archive_path, &solution.archive)?;
    let rec_path = out.join(RECOMMENDATION_FILE);
    write_json(&rec_path, &solution.recommended)?;
    manifest.add_outputs(out, [archive_path, rec_path]);
    manifest.finish(out)?;
    println!(
        "archive of {} selections; recommended {} (scalar {:.6})",
        solution.archive.len(),
        solution.recommended.selection,
        solution.recommended.objectives.scalar
    );
    Ok(())
}

pub fn oracle(instance_path: &Path, out: &Path) -> Result<(), CliError> {
    let instance = load_instance(instance_path)?;
    let mut manifest = RunManifest::begin("oracle", &[instance_path]);
    manifest.config = json!({});
    let front = enumerate_pareto(&instance)?;
    create_dir(out)?;
    let path = out.join(FRONT_FILE);
    write_json(&path, &front)?;
    manifest.add_outputs(out, [path]);
    manifest.finish(out)?;
    println!(
        "exact front of {} selections, hypervolume {:.6}",
        front.len(),
        hypervolume(&front, [0.0; 5])
    );
    Ok(())
}

fn run_precision(
    precision: Precision,
    world: &WorldData,
    cfgs: &[SimConfig],
    seeds: &[u64],
) -> Result<Vec<Vec<SeedRun>>, CliError> {
    fn go<T: Real>(
        world: &WorldData,
        cfgs: &[SimConfig],
        seeds: &[u64],
    ) -> Result<Vec<Vec<SeedRun>>, CliError> {
        run_batch::<T>(world, cfgs, seeds)
    }
    match precision {
        Precision::F32 => go::<f32>(world, cfgs, seeds),
        Precision::F64 => go::<f64>(world, cfgs, seeds),
    }
}

pub const SUMMARY_FILE: &str = "summary.json";
pub const MEAN_ROUNDS_FILE: &str = "mean_rounds.csv";
pub const COMPARE_CSV: &str = "compare.csv";
pub const COMPARE_JSON: &str = "compare.json";
pub const MERGED_ROUNDS_FILE: &str = "rounds.csv";

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed_{seed}"))
}

pub fn simulate(
    world_dir: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    seeds: u64,
    precision: Precision,
    out: &Path,
) -> Result<(), CliError> {
    let cfg: SimConfig = load_or_default(config)?;
    let seeds = seed_list(seed.unwrap_or(cfg.seed), seeds)?;
    let world = WorldData::load(world_dir)?;
    let inputs: Vec<&Path> = std::iter::once(world_dir).chain(config).collect();
    let mut manifest = RunManifest::begin("simulate", &inputs);
    manifest.seeds = seeds.clone();
    manifest.config = json!({ "world": world.world.config, "sim": cfg });

    let runs = run_precision(precision, &world, std::slice::from_ref(&cfg), &seeds)?
        .pop()
        .unwrap_or_default();
    create_dir(out)?;
    let mut written = Vec::new();
    for run in &runs {
        let dir = seed_dir(out, run.seed);
        create_dir(&dir)?;
        let csv_path = dir.join("rounds.csv");
        write_reports_csv(&csv_path, &run.reports)?;
        let json_path = dir.join("rounds.json");
        write_json(&json_path, &run.reports)?;
        written.extend([csv_path, json_path]);
    }
    let summary = BatchSummary::new(cfg.strategy.name(), cfg.strategy, &runs);
    let path = out.join(SUMMARY_FILE);
    write_json(&path, &summary)?;
    written.push(path);
    let path = out.join(MEAN_ROUNDS_FILE);
    write_mean_rounds_csv(&path, &runs)?;
    written.push(path);
    manifest.add_outputs(out, written);
    manifest.finish(out)?;
    print!("{}", format_table(std::slice::from_ref(&summary)));
    Ok(())
}

fn label_of(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

pub fn compare(
    world_dir: &Path,
    configs: &[PathBuf],
    seed: Option<u64>,
    seeds: u64,
    precision: Precision,
    out: &Path,
) -> Result<(), CliError> {
    if configs.len() < 2 {
        return Err(CliError::Usage(
            "compare needs at least two simulation configs".into(),
        ));
    }
    let cfgs: Vec<SimConfig> = configs
        .iter()
        .map(|p| read_json(p))
        .collect::<Result<_, _>>()?;
    let world = WorldData::load(world_dir)?;
    let world_seed = world.world.config.seed;
    for (cfg, path) in cfgs.iter().zip(configs) {
        if let Some(s) = cfg.world_seed.filter(|&s| s != world_seed) {
            return Err(CliError::Usage(format!(
                "{} was written for world seed {s}, {} holds world seed {world_seed}",
                path.display(),
                world_dir.display()
            )));
        }
    }
    let seeds = seed_list(seed.unwrap_or(cfgs[0].seed), seeds)?;
    let inputs: Vec<&Path> = std::iter::once(world_dir)
        .chain(configs.iter().map(PathBuf::as_path))
        .collect();
    let mut manifest = RunManifest::begin("compare", &inputs);
    manifest.seeds = seeds.clone();
    manifest.config = json!({ "world": world.world.config, "sims": cfgs });

    let runs = run_precision(precision, &world, &cfgs, &seeds)?;
    let labels: Vec<String> = configs.iter().map(|p| label_of(p)).collect();
    let summaries: Vec<BatchSummary> = runs
        .iter()
        .zip(&cfgs)
        .zip(&labels)
        .map(|((r, c), l)| BatchSummary::new(l, c.strategy, r))
        .collect();

    create_dir(out)?;
    let table = out.join(COMPARE_CSV);
    write_summary_csv(&table, &summaries)?;
    let full = out.join(COMPARE_JSON);
    write_json(&full, &summaries)?;
    let merged = out.join(MERGED_ROUNDS_FILE);
    let labelled: Vec<(&str, &[SeedRun])> = labels
        .iter()
        .map(String::as_str)
        .zip(runs.iter().map(Vec::as_slice))
        .collect();
    write_merged_rounds_csv(&merged, &labelled)?;
    manifest.add_outputs(out, [table, full, merged]);
    manifest.finish(out)?;
    print!("{}", format_table(&summaries));
    Ok(())
}
