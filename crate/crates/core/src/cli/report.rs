//! Text rendering and summary rebuilds.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use super::experiment::{write_metric_files, WEEKLY_METRICS};
use crate::error::{Error, Result};
use crate::evaluator::{compare_scenarios, read_weekly_csv, CellResult, ComparisonTable};
use crate::model::NetworkConfig;
use crate::planner::WeekPlan;

/// Re-reads the weekly metrics under `dir` and rewrites the summary and
/// cost-curve CSVs.
pub fn rebuild_report(dir: &Path) -> Result<(Vec<CellResult>, ComparisonTable)> {
    let path = dir.join(WEEKLY_METRICS);
    let file = File::open(&path).map_err(|e| Error::from(e).context(format!("opening {}", path.display())))?;
    let results = read_weekly_csv(BufReader::new(file))?;
    let table = compare_scenarios(&results, &[]);
    write_metric_files(dir, &results, &table)?;
    Ok((results, table))
}

/// Cost, transfers and miles per scenario, averaged over seeds.
pub fn render_summary(table: &ComparisonTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<6} {:<8} {:<12} {:>10} {:>10} {:>12}", "method", "network", "secondment", "cost", "transfers", "miles");
    for (s, m) in &table.cells {
        let _ = writeln!(
            out,
            "{:<6} {:<8} {:<12} {:>10.2} {:>10.2} {:>12.2}",
            s.method, s.network, s.secondment, m.cost, m.deployed_transfers, m.transferred_miles
        );
    }
    for d in table.deltas.iter().filter(|d| d.metric == "cost") {
        let pct = d.percent.map_or("-".to_string(), |p| format!("{p:+.1}%"));
        let _ = writeln!(
            out,
            "cost {}/{}/{} -> {}/{}/{}: {pct}",
            d.base.method, d.base.network, d.base.secondment, d.other.method, d.other.network, d.other.secondment
        );
    }
    out
}

/// Nonzero planned transfers per day.
pub fn render_plan(net: &NetworkConfig, plan: &WeekPlan) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "objective {:.4}", plan.objective);
    for (t, day) in plan.plan.iter().enumerate() {
        let moves: Vec<String> =
            day.nonzero().map(|(i, j, v)| format!("{} -> {}: {v}", net.names[i], net.names[j])).collect();
        let _ = writeln!(out, "day {}: {}", t + 1, if moves.is_empty() { "none".to_string() } else { moves.join(", ") });
    }
    out
}
