//! Multi-criteria client deployment for federated learning.
//!
//! A deployment round picks which volunteer devices receive the learning
//! service. Candidates must have spare CPU, memory, disk and battery, stay in
//! their area long enough to finish a round, and only a bounded share may be
//! high-movement devices. Among feasible selections, five objectives trade off
//! deployment size, data volume, client priority, area diversity and
//! orchestrator requests.
//!
//! The model is generic over the scalar type; the `*F64`/`*F32` aliases below
//! fix it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod ga;
pub mod objective;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod synthetic;

pub use domain::{
    validate_instance, AreaRequestVector, ClientProfile, DeploymentThresholds, InstanceIssue,
    ObjectiveWeights, ProblemInstance, SelectionVector, UtilizationProfile, ValidationReport,
    PRIORITY_LEVELS,
};
pub use error::CoreError;
pub use ga::{solve, ArchiveEntry, GaConfig, ParetoArchive, RepairOutcome, Solution};
pub use objective::{
    check_availability, check_cardinality, check_movement_cap, check_resources, dominates,
    eval_objectives, is_feasible, ConstraintFamily, ConstraintViolation, ObjectiveVector,
    ViolationKind,
};
pub use oracle::{enumerate_pareto, hypervolume};
pub use scalar::Scalar;

pub type ProblemInstanceF64 = ProblemInstance<f64>;
pub type ProblemInstanceF32 = ProblemInstance<f32>;
pub type ClientProfileF64 = ClientProfile<f64>;
pub type ObjectiveVectorF64 = ObjectiveVector<f64>;
pub type ObjectiveVectorF32 = ObjectiveVector<f32>;
pub type ParetoArchiveF64 = ParetoArchive<f64>;
pub type ParetoArchiveF32 = ParetoArchive<f32>;
pub type SolutionF64 = Solution<f64>;
