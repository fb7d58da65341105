//! Experiment orchestration: run configs, the optimisation loop, result
//! files and comparison tables.

pub mod compare;
pub mod config;
pub mod output;
pub mod run;
pub mod snapshot;

pub use compare::{compare, expand, run_all, score, CellStats, SummaryTable};
pub use config::{Algorithm, Profile, RunConfig, CONFIG_VERSION};
pub use output::{parse_results_csv, results_csv, write_run, ResultRow};
pub use run::{run, run_baseline, run_on, run_seqmo, LossRecord, RunOutcome};
pub use snapshot::{emit_snapshots, parse_snapshots, snapshots_to_jsonl, Role, Snapshot, SnapshotPoint};
