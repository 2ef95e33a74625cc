//! Simulates surge scenarios on the four-site network and prints the weekly
//! mean nurse demand next to the generated capacity.
//!
//! cargo run --example surge_paths -- [paths] [peak_factor]

use redeploy::simulator::{generate_testing_path, SimulatorConfig};

fn main() -> redeploy::Result<()> {
    let mut args = std::env::args().skip(1);
    let paths: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let peak: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1.5);
    let cfg = SimulatorConfig::four_site(peak);
    let weeks = 27;
    let l = cfg.locations();
    let mut demand = vec![vec![0.0; l]; weeks];
    let mut capacity = vec![vec![0.0; l]; weeks];
    for seed in 0..paths {
        let p = generate_testing_path(&cfg, weeks, seed)?;
        for w in 0..weeks {
            for i in 0..l {
                demand[w][i] += (0..7).map(|d| p.demand.get(w * 7 + d, i)).sum::<f64>() / 7.0 / paths as f64;
                capacity[w][i] += p.capacity.week(w + 1)[i] as f64 / paths as f64;
            }
        }
    }
    println!("week  {}", ["West", "East", "South", "Central"].map(|n| format!("{n:>16}")).join(""));
    for w in 0..weeks {
        let cells: String = (0..l).map(|i| format!("{:>8.1}/{:<7.1}", demand[w][i], capacity[w][i])).collect();
        println!("{:>4}  {cells}", w + 1);
    }
    Ok(())
}
