//! Synthetic mobility traces shaped like a phone-sensing campaign.
//!
//! Places are grouped into areas. Every user walks a personal Markov chain
//! concentrated on a handful of favorite places, which makes next-place labels
//! strongly user-specific. Each user's trace becomes one client dataset for
//! next-place prediction.

pub mod dataset;
pub mod error;
pub mod io;
pub mod traces;
pub mod world;

pub use dataset::{build_datasets, stratified_split, ClientDataset, UserSummary};
pub use error::MobilityError;
pub use io::WorldData;
pub use traces::{generate_traces, VisitRecord};
pub use world::{generate_world, UserModel, World, WorldConfig};
