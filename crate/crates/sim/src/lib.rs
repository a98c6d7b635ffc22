//! Federated learning simulator for on-demand client deployment.
//!
//! Volunteers carry next-place prediction data generated by
//! `fedeploy-mobility`. Three strategies decide who trains each round:
//! multi-objective GA deployment over live device profiles, uniform random
//! selection, and random selection from a fixed pre-configured pool. A
//! centrally trained model on pooled data gives the reference accuracy.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod mlp;
pub mod report;
pub mod sim;
pub mod train;

pub use config::{ClientSchedule, SimConfig, Strategy};
pub use data::{majority_baseline, ClientData};
pub use error::SimError;
pub use mlp::{Mlp, Real};
pub use report::{required_reports, write_reports_csv, RoundReport, RunSummary};
pub use sim::{
    centralized_train, orchestrator_monitor, run_experiment, run_experiment_with_target,
    ExperimentOutcome, Simulation, WorldState,
};
pub use train::{fedavg_aggregate, fedavg_weights, local_train, TrainConfig};

pub type MlpF32 = Mlp<f32>;
pub type MlpF64 = Mlp<f64>;
