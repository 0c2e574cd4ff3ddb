//! Discrete-round simulator for clustering protocols (LEACH, DEEC and
//! Ad-LEACH) in two-level heterogeneous wireless sensor networks.
//!
//! A run deploys nodes over a rectangular field with the base station at
//! its center, then repeats election, association, one TDMA data frame
//! and aggregation until every node has spent its battery.

pub mod config;
pub mod energy;
pub mod engine;
pub mod error;
pub mod layout;
pub mod protocol;
pub mod report;

pub use config::{parse_config, EnergyScope, RMode, ScenarioConfig};
pub use energy::{aggregate_energy, d0_threshold, debit, rx_energy, tx_energy, EnergyDebit, RadioParams};
pub use engine::{run_simulation, scope_of, Network, RoundMetrics, RunSummary, Scope, SimulationOutput};
pub use error::{Error, Result};
pub use layout::{
    partition_field, place_nodes, total_initial_energy, FieldLayout, HeterogeneityConfig, NodeKind, NodeState, Point,
    Rect,
};
pub use protocol::{
    average_energy, elect_cluster_heads, election_threshold, estimate_r, leach_probability, reference_probability,
    ElectionContext, ProtocolKind,
};
pub use report::{emit_round_csv, emit_summary_json, ROUND_CSV_HEADER};
