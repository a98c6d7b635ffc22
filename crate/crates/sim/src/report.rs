use std::path::Path;

use serde::{Deserialize, Serialize};

use fedeploy_core::ObjectiveVectorF64;

use crate::config::Strategy;
use crate::error::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub strategy: Strategy,
    pub selected_ids: Vec<usize>,
    pub deployed: usize,
    pub reported: usize,
    pub discarded: bool,
    /// Global test accuracy after the round.
    pub accuracy: f64,
    /// Clients able to take part when the round started.
    pub available: usize,
    /// Training records held by the deployed clients.
    pub data_volume: usize,
    /// Label classes present in the deployed clients' training data.
    pub distinct_labels: usize,
    /// Objectives of the chosen selection, for the GA strategy only.
    pub objectives: Option<ObjectiveVectorF64>,
}

/// Smallest number of reports that keeps a round with `deployed` clients.
/// A round with nobody deployed is always discarded.
pub fn required_reports(deployed: usize, min_report_fraction: f64) -> usize {
    let need = (min_report_fraction * deployed as f64 - 1e-9)
        .ceil()
        .max(0.0) as usize;
    need.max(1)
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    round: usize,
    strategy: String,
    deployed: usize,
    reported: usize,
    discarded: bool,
    accuracy: f64,
    available: usize,
    data_volume: usize,
    distinct_labels: usize,
    f1: Option<f64>,
    f2: Option<f64>,
    f3: Option<f64>,
    f4: Option<f64>,
    f5: Option<f64>,
    scalar: Option<f64>,
}

impl From<&RoundReport> for CsvRow {
    fn from(r: &RoundReport) -> Self {
        let o = r.objectives.as_ref();
        Self {
            round: r.round,
            strategy: r.strategy.name().to_string(),
            deployed: r.deployed,
            reported: r.reported,
            discarded: r.discarded,
            accuracy: r.accuracy,
            available: r.available,
            data_volume: r.data_volume,
            distinct_labels: r.distinct_labels,
            f1: o.map(|v| v.f1),
            f2: o.map(|v| v.f2),
            f3: o.map(|v| v.f3),
            f4: o.map(|v| v.f4),
            f5: o.map(|v| v.f5),
            scalar: o.map(|v| v.scalar),
        }
    }
}

pub const CSV_COLUMNS: [&str; 15] = [
    "round",
    "strategy",
    "deployed",
    "reported",
    "discarded",
    "accuracy",
    "available",
    "data_volume",
    "distinct_labels",
    "f1",
    "f2",
    "f3",
    "f4",
    "f5",
    "scalar",
];

/// One row per round, columns as in [`CSV_COLUMNS`].
pub fn write_reports_csv<'a>(
    path: &Path,
    reports: impl IntoIterator<Item = &'a RoundReport>,
) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| SimError::csv(path, e))?;
    let mut empty = true;
    for r in reports {
        w.serialize(CsvRow::from(r))
            .map_err(|e| SimError::csv(path, e))?;
        empty = false;
    }
    if empty {
        w.write_record(CSV_COLUMNS)
            .map_err(|e| SimError::csv(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

/// Aggregate view of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub strategy: Strategy,
    pub rounds: usize,
    pub rounds_to_target: Option<usize>,
    pub discard_fraction: f64,
    pub mean_available: f64,
    pub final_accuracy: f64,
    pub mean_data_volume: f64,
    pub mean_distinct_labels: f64,
}

impl RunSummary {
    pub fn from_reports(strategy: Strategy, reports: &[RoundReport], target: f64) -> Self {
        let n = reports.len().max(1) as f64;
        let mean = |f: &dyn Fn(&RoundReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Self {
            strategy,
            rounds: reports.len(),
            rounds_to_target: rounds_to_target(reports, target),
            discard_fraction: mean(&|r| r.discarded as u8 as f64),
            mean_available: mean(&|r| r.available as f64),
            final_accuracy: reports.last().map_or(0.0, |r| r.accuracy),
            mean_data_volume: mean(&|r| r.data_volume as f64),
            mean_distinct_labels: mean(&|r| r.distinct_labels as f64),
        }
    }
}

/// First round whose accuracy reaches `target`.
pub fn rounds_to_target(reports: &[RoundReport], target: f64) -> Option<usize> {
    reports
        .iter()
        .find(|r| r.accuracy >= target)
        .map(|r| r.round)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_threshold_arithmetic() {
        assert_eq!(required_reports(5, 0.8), 4);
        assert!(!(4 < required_reports(5, 0.8)));
        assert!(3 < required_reports(5, 0.8));
        assert_eq!(required_reports(10, 0.8), 8);
        assert_eq!(required_reports(0, 0.8), 1);
    }
}
