//! On-disk layout of a generated world.
//!
//! ```text
//! <dir>/world.json            places, areas and per-user mobility models
//! <dir>/traces.csv            every visit, grouped by user
//! <dir>/datasets/client_NNN.json
//! <dir>/summary.json          per-user movement and stay statistics
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::dataset::{build_datasets, ClientDataset, UserSummary};
use crate::error::MobilityError;
use crate::traces::{generate_traces, VisitRecord};
use crate::world::{generate_world, World, WorldConfig};

pub const WORLD_FILE: &str = "world.json";
pub const TRACES_FILE: &str = "traces.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DATASET_DIR: &str = "datasets";

#[derive(Debug, Clone, PartialEq)]
pub struct WorldData {
    pub world: World,
    pub traces: Vec<VisitRecord>,
    pub datasets: BTreeMap<usize, ClientDataset>,
    pub summaries: Vec<UserSummary>,
}

impl WorldData {
    pub fn generate(cfg: &WorldConfig) -> Result<Self, MobilityError> {
        let world = generate_world(cfg)?;
        let traces = generate_traces(&world);
        let (datasets, summaries) = build_datasets(&world, &traces);
        Ok(Self {
            world,
            traces,
            datasets,
            summaries,
        })
    }

    /// Writes the world and returns the paths of every file written.
    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>, MobilityError> {
        let data_dir = dir.join(DATASET_DIR);
        fs::create_dir_all(&data_dir).map_err(|e| MobilityError::io(&data_dir, e))?;
        let mut written = Vec::with_capacity(self.datasets.len() + 3);

        let path = dir.join(WORLD_FILE);
        write_json(&path, &self.world)?;
        written.push(path);

        let path = dir.join(TRACES_FILE);
        write_traces_csv(&path, &self.traces)?;
        written.push(path);

        let path = dir.join(SUMMARY_FILE);
        write_json(&path, &self.summaries)?;
        written.push(path);

        for (user, ds) in &self.datasets {
            let path = data_dir.join(dataset_file_name(*user));
            write_json(&path, ds)?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn load(dir: &Path) -> Result<Self, MobilityError> {
        let world: World = read_json(&dir.join(WORLD_FILE))?;
        let traces = read_traces_csv(&dir.join(TRACES_FILE))?;
        let summaries: Vec<UserSummary> = read_json(&dir.join(SUMMARY_FILE))?;
        let mut datasets = BTreeMap::new();
        for u in &world.users {
            let ds: ClientDataset =
                read_json(&dir.join(DATASET_DIR).join(dataset_file_name(u.user_id)))?;
            datasets.insert(u.user_id, ds);
        }
        let data = Self {
            world,
            traces,
            datasets,
            summaries,
        };
        data.check_consistency()?;
        Ok(data)
    }

    fn check_consistency(&self) -> Result<(), MobilityError> {
        let n = self.world.users.len();
        if self.summaries.len() != n || self.datasets.len() != n {
            return Err(MobilityError::Inconsistent(format!(
                "{n} users but {} summaries and {} datasets",
                self.summaries.len(),
                self.datasets.len()
            )));
        }
        let width = self.world.config.feature_len();
        for ds in self.datasets.values() {
            if ds.features.iter().any(|x| x.len() != width) {
                return Err(MobilityError::Inconsistent(format!(
                    "client {} has feature vectors of the wrong length",
                    ds.user_id
                )));
            }
        }
        Ok(())
    }
}

pub fn dataset_file_name(user: usize) -> String {
    format!("client_{user:03}.json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), MobilityError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| MobilityError::json(path, e))?;
    fs::write(path, text + "\n").map_err(|e| MobilityError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, MobilityError> {
    let text = fs::read_to_string(path).map_err(|e| MobilityError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| MobilityError::json(path, e))
}

pub fn write_traces_csv(path: &Path, traces: &[VisitRecord]) -> Result<(), MobilityError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| MobilityError::csv(path, e))?;
    for v in traces {
        w.serialize(v).map_err(|e| MobilityError::csv(path, e))?;
    }
    w.flush().map_err(|e| MobilityError::io(path, e))
}

pub fn read_traces_csv(path: &Path) -> Result<Vec<VisitRecord>, MobilityError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| MobilityError::csv(path, e))?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| MobilityError::csv(path, e))
}
