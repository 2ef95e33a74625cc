//! Plans the same simulated path on both network designs and prints the
//! evaluator's comparison table.
//!
//! cargo run --example network_comparison -- [weeks]

use redeploy::evaluator::{compare_scenarios, evaluate_cell, write_summary_csv, CellKey};
use redeploy::model::{CostParams, NetworkConfig};
use redeploy::planner::{run_horizon, GroundTruth, PlannerConfig, RobustSchedule, RoundingMode};
use redeploy::simulator::{generate_testing_path, RollingForecaster, SimulatorConfig};
use redeploy::uncertainty::BoxOptions;

const HUB: usize = 3;

fn main() -> redeploy::Result<()> {
    let weeks: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let sim = SimulatorConfig::four_site(1.5);
    let path = generate_testing_path(&sim, weeks, 4)?;
    let truth = GroundTruth { demand: &path.demand, capacity: &path.capacity };

    let mut results = Vec::new();
    for (label, net) in [("hs", NetworkConfig::four_site().hub_and_spoke(HUB)), ("fc", NetworkConfig::four_site().fully_connected())] {
        let cfg = PlannerConfig {
            costs: CostParams::calibrated(7, 4),
            network: net.clone(),
            horizon: 7,
            training_paths: 5,
            sets: 1,
            schedule: RobustSchedule::Fixed { epsilon: 0.0 },
            rounding: RoundingMode::Randomized,
            box_options: BoxOptions::default(),
        };
        let mut training = RollingForecaster::new(&path.trace, sim.ratios, 3, 7, 2)?;
        let traj = run_horizon(&cfg, truth, weeks, &mut training, 0, 9)?;
        let key = CellKey { method: "saa".into(), network: label.into(), secondment: "baseline".into(), seed: 4 };
        results.push(evaluate_cell(key, &[vec![Some(&traj)]], weeks, &net, Some(HUB), 0.0)?);
    }
    let table = compare_scenarios(&results, &[]);
    write_summary_csv(std::io::stdout().lock(), &table)?;
    Ok(())
}
