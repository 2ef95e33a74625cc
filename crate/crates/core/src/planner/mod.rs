//! Weekly planning and daily deployment by rolling-horizon re-optimization,
//! randomized rounding and adaptive selection of the robust radius.

mod rolling;
mod rounding;
mod source;

pub use rolling::{
    audit_records, deploy_day, plan_week, robust_grid, run_horizon, select_robust_param, simulate_week, subhorizon,
    write_audit, AuditRecord, DayDecision, DayOutcome, GroundTruth, PlannerConfig, RobustSchedule, Trajectory,
    WeekOutcome, WeekPlan,
};
pub use rounding::{randomized_round, RoundingMode};
pub use source::{StaticTraining, TrainingSource};
