//! Runs the rolling-horizon planner on one simulated surge path and prints
//! the weekly cost, robust radius and transfers.
//!
//! cargo run --example rolling_horizon -- [weeks] [saa|sro] [fc|hs]

use std::time::Instant;

use redeploy::model::{CostParams, NetworkConfig};
use redeploy::planner::{run_horizon, GroundTruth, PlannerConfig, RobustSchedule, RoundingMode};
use redeploy::simulator::{generate_testing_path, RollingForecaster, SimulatorConfig};
use redeploy::uncertainty::BoxOptions;

fn main() -> redeploy::Result<()> {
    let mut args = std::env::args().skip(1);
    let weeks: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let method = args.next().unwrap_or_else(|| "sro".into());
    let network = args.next().unwrap_or_else(|| "fc".into());

    let sim = SimulatorConfig::four_site(1.5);
    let path = generate_testing_path(&sim, weeks, 1)?;
    let base = NetworkConfig::four_site();
    let net = if network == "hs" { base.hub_and_spoke(3) } else { base.fully_connected() };
    let schedule = if method == "saa" {
        RobustSchedule::Fixed { epsilon: 0.0 }
    } else {
        RobustSchedule::Adaptive { step_scale: 2.0 }
    };
    let cfg = PlannerConfig {
        costs: CostParams::calibrated(7, 4),
        network: net,
        horizon: 7,
        training_paths: 5,
        sets: 1,
        schedule,
        rounding: RoundingMode::Randomized,
        box_options: BoxOptions::default(),
    };
    let mut training = RollingForecaster::new(&path.trace, sim.ratios, 3, 7, 2)?;
    let truth = GroundTruth { demand: &path.demand, capacity: &path.capacity };
    let start = Instant::now();
    let traj = run_horizon(&cfg, truth, weeks, &mut training, 0, 3)?;
    println!("week  radius      cost  transfers");
    for w in &traj.weeks {
        let transfers: f64 = w.days.iter().map(|d| d.deployed.total()).sum();
        println!("{:>4}  {:>6.1}  {:>8.2}  {:>9}", w.week, w.epsilon, w.cost(), transfers);
    }
    let mean = traj.weeks.iter().map(|w| w.cost()).sum::<f64>() / weeks as f64;
    println!("mean weekly cost {mean:.2} in {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
