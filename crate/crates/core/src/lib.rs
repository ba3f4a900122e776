//! Discrete-time Skip Graph simulator under churn.
//!
//! The crate is split along the simulator's layers:
//!
//! * [`overlay`]: identities, locality-aware name IDs, lookup tables and the
//!   search-for-numerical-ID routing step.
//! * [`predictors`]: per-node availability predictors (fixed-size De Bruijn
//!   graphs, the sliding-window variant, Lifetime and LUDP).
//! * [`stabilizers`]: timeout-failure recovery (Interlaced backup tables,
//!   Kademlia-style buckets, DKS successor lists, or nothing).
//! * [`churn`]: session lengths, arrivals and the uniform churn model.
//! * [`engine`]: the slot loop, search execution and metric collection.
//! * [`analytics`]: closed-form success-probability framework.
//! * [`runner`]: experiment matrices, config files and reports.

pub mod analytics;
pub mod churn;
pub mod engine;
pub mod error;
pub mod overlay;
pub mod predictors;
pub mod runner;
pub mod stabilizers;

pub use error::{Error, Result};
