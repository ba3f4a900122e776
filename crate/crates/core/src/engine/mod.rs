//! Discrete time-slot simulation of a Skip Graph under churn.

mod config;
mod metrics;
mod sim;

pub use config::{RejoinMode, SimConfig};
pub use metrics::{aggregate, PredictorError, RunMetrics, SlotMetrics};
pub use sim::{rtt, run_all, run_topology, ResolveRecord, SearchOutcome, TopologyRun};
