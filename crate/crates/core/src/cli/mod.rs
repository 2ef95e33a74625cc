//! Configuration, experiment orchestration and artifacts behind the
//! `redeploy` binary.

mod config;
mod experiment;
mod manifest;
mod presets;
mod report;

pub use config::{
    load_config, Costs, Counts, DistanceBonus, ExperimentConfig, Method, MethodChoice, Network, NetworkChoice, Planner, Robust, ScheduleKind,
    Secondment, Simulator, Sites, Transitions,
};
pub use experiment::{
    plan_one_week, run_experiment, run_task, tasks, testing_path, testing_paths, write_metric_files, write_testing_data, ExperimentOutput,
    RunOptions, Task, COST_CURVES, MANIFEST, SUMMARY, WEEKLY_METRICS,
};
pub use manifest::{checksum_files, sha256_hex, FileChecksum, RunManifest, WorkerSeeds};
pub use presets::{preset, PRESETS};
pub use report::{rebuild_report, render_plan, render_summary};
