//! Out-of-sample metrics: weekly cost by component, deployed transfers,
//! transferred miles, and comparison tables across scenarios.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::NetworkConfig;
use crate::planner::{DayOutcome, Trajectory, WeekOutcome};

/// Cost components and flow statistics of one week, or their average.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeeklyMetrics {
    pub cost: f64,
    pub planned: f64,
    pub emergency: f64,
    /// With the refund sign: negative when plans are cancelled.
    pub cancellation: f64,
    pub shortage: f64,
    pub coordination: f64,
    /// Fee actually paid for cancellations once refunds are netted out.
    pub cancellation_fee: f64,
    pub deployed_transfers: f64,
    pub transferred_miles: f64,
}

impl WeeklyMetrics {
    pub const NAMES: [&'static str; 9] = [
        "cost",
        "planned",
        "emergency",
        "cancellation",
        "shortage",
        "coordination",
        "cancellation_fee",
        "deployed_transfers",
        "transferred_miles",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.cost,
            self.planned,
            self.emergency,
            self.cancellation,
            self.shortage,
            self.coordination,
            self.cancellation_fee,
            self.deployed_transfers,
            self.transferred_miles,
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::NAMES.iter().position(|n| *n == name).map(|k| self.values()[k])
    }

    fn from_values(v: [f64; 9]) -> Self {
        WeeklyMetrics {
            cost: v[0],
            planned: v[1],
            emergency: v[2],
            cancellation: v[3],
            shortage: v[4],
            coordination: v[5],
            cancellation_fee: v[6],
            deployed_transfers: v[7],
            transferred_miles: v[8],
        }
    }

    /// Entry-wise mean.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a WeeklyMetrics>) -> WeeklyMetrics {
        let mut acc = [0.0; 9];
        let mut n = 0usize;
        for m in items {
            for (a, v) in acc.iter_mut().zip(m.values()) {
                *a += v;
            }
            n += 1;
        }
        if n > 0 {
            for a in &mut acc {
                *a /= n as f64;
            }
        }
        Self::from_values(acc)
    }
}

/// Deployments and miles over `days`; each deployment counts once, on the
/// day it starts.
pub fn count_transfers_and_miles(days: &[DayOutcome], network: &NetworkConfig) -> (f64, f64) {
    let mut transfers = 0.0;
    let mut miles = 0.0;
    for d in days {
        for (i, j, v) in d.deployed.nonzero() {
            transfers += v;
            miles += v * network.distance[i][j];
        }
    }
    (transfers, miles)
}

/// Flat weekly charge `coordination_cost` when any deployment of the week
/// bypasses `hub`.
pub fn coordination_charge(week: &WeekOutcome, hub: Option<usize>, coordination_cost: f64) -> f64 {
    if coordination_cost == 0.0 {
        return 0.0;
    }
    let Some(hub) = hub else { return 0.0 };
    let bypass = week.days.iter().any(|d| d.deployed.nonzero().any(|(i, j, _)| i != hub && j != hub));
    if bypass {
        coordination_cost
    } else {
        0.0
    }
}

/// Metrics of one simulated week.
pub fn week_metrics(week: &WeekOutcome, network: &NetworkConfig, hub: Option<usize>, coordination_cost: f64) -> WeeklyMetrics {
    let mut m = WeeklyMetrics::default();
    for d in &week.days {
        m.planned += d.planned_cost;
        m.emergency += d.cost.emergency;
        m.cancellation += d.cost.cancellation;
        m.shortage += d.cost.shortage;
        m.cancellation_fee += d.cost.cancellation_fee_paid();
    }
    m.coordination = coordination_charge(week, hub, coordination_cost);
    m.cost = m.planned + m.emergency + m.cancellation + m.shortage + m.coordination;
    let (t, mi) = count_transfers_and_miles(&week.days, network);
    m.deployed_transfers = t;
    m.transferred_miles = mi;
    m
}

/// Trajectories of one experiment cell, `runs[m][h]` for training set `m`
/// and testing path `h`; `None` marks a run that did not finish.
pub type RunGrid<'a> = [Vec<Option<&'a Trajectory>>];

/// `(1/MH) Σ_m Σ_h` of the week-`week` metrics.
pub fn weekly_cost(runs: &RunGrid<'_>, week: usize, network: &NetworkConfig, hub: Option<usize>, coordination_cost: f64) -> Result<WeeklyMetrics> {
    let mut missing = Vec::new();
    let mut items = Vec::new();
    for (m, row) in runs.iter().enumerate() {
        for (h, t) in row.iter().enumerate() {
            match t.and_then(|t| t.weeks.iter().find(|w| w.week == week)) {
                Some(w) => items.push(week_metrics(w, network, hub, coordination_cost)),
                None => missing.push(format!("(m={m}, h={h})")),
            }
        }
    }
    if !missing.is_empty() {
        return Err(invalid(format!("week {week} missing for {}", missing.join(", "))));
    }
    if items.is_empty() {
        return Err(invalid("no trajectories to evaluate"));
    }
    Ok(WeeklyMetrics::mean(&items))
}

/// Labels of one experiment cell.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub method: String,
    pub network: String,
    pub secondment: String,
    pub seed: u64,
}

/// Weekly series of one cell and its average over weeks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub key: CellKey,
    pub weekly: Vec<WeeklyMetrics>,
    pub aggregate: WeeklyMetrics,
    /// Mean robust radius per week over the cell's runs.
    pub epsilons: Vec<f64>,
}

/// Evaluates every week of a cell.
pub fn evaluate_cell(
    key: CellKey,
    runs: &RunGrid<'_>,
    weeks: usize,
    network: &NetworkConfig,
    hub: Option<usize>,
    coordination_cost: f64,
) -> Result<CellResult> {
    let weekly = (1..=weeks).map(|w| weekly_cost(runs, w, network, hub, coordination_cost)).collect::<Result<Vec<_>>>()?;
    let aggregate = WeeklyMetrics::mean(&weekly);
    let mut epsilons = vec![0.0; weeks];
    let count = runs.iter().flatten().count().max(1) as f64;
    for t in runs.iter().flatten().flatten() {
        for w in &t.weeks {
            if (1..=weeks).contains(&w.week) {
                epsilons[w.week - 1] += w.epsilon / count;
            }
        }
    }
    Ok(CellResult { key, weekly, aggregate, epsilons })
}

/// Scenario of a comparison: a cell key without the seed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub method: String,
    pub network: String,
    pub secondment: String,
}

impl Scenario {
    pub fn of(key: &CellKey) -> Self {
        Scenario { method: key.method.clone(), network: key.network.clone(), secondment: key.secondment.clone() }
    }
}

/// Relative change of `metric` from `base` to `other`, in percent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub metric: String,
    pub base: Scenario,
    pub other: Scenario,
    /// `None` when either side is absent or the base is zero.
    pub percent: Option<f64>,
}

/// Seed-averaged aggregates per scenario plus pairwise percentage changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub cells: BTreeMap<Scenario, WeeklyMetrics>,
    pub deltas: Vec<Delta>,
}

impl ComparisonTable {
    pub fn value(&self, scenario: &Scenario, metric: &str) -> Option<f64> {
        self.cells.get(scenario).and_then(|m| m.get(metric))
    }
}

pub fn percent_change(base: f64, other: f64) -> Option<f64> {
    (base != 0.0).then(|| (other - base) / base * 100.0)
}

/// Averages cells over seeds and computes, for every metric, the change
/// between scenarios that differ in exactly one of method, network or
/// secondment, plus any explicitly `requested` pairs (which may be absent).
pub fn compare_scenarios(results: &[CellResult], requested: &[(Scenario, Scenario)]) -> ComparisonTable {
    let mut groups: BTreeMap<Scenario, Vec<&WeeklyMetrics>> = BTreeMap::new();
    for r in results {
        groups.entry(Scenario::of(&r.key)).or_default().push(&r.aggregate);
    }
    let cells: BTreeMap<Scenario, WeeklyMetrics> = groups.into_iter().map(|(k, v)| (k, WeeklyMetrics::mean(v))).collect();
    let keys: Vec<&Scenario> = cells.keys().collect();
    let mut pairs: Vec<(Scenario, Scenario)> = Vec::new();
    for (x, a) in keys.iter().enumerate() {
        for b in &keys[x + 1..] {
            let diffs = (a.method != b.method) as u8 + (a.network != b.network) as u8 + (a.secondment != b.secondment) as u8;
            if diffs == 1 {
                pairs.push(((*a).clone(), (*b).clone()));
            }
        }
    }
    for p in requested {
        if !pairs.contains(p) {
            pairs.push(p.clone());
        }
    }
    let mut deltas = Vec::new();
    for (base, other) in pairs {
        for metric in WeeklyMetrics::NAMES {
            let percent = match (cells.get(&base).and_then(|m| m.get(metric)), cells.get(&other).and_then(|m| m.get(metric))) {
                (Some(a), Some(b)) => percent_change(a, b),
                _ => None,
            };
            deltas.push(Delta { metric: metric.to_string(), base: base.clone(), other: other.clone(), percent });
        }
    }
    ComparisonTable { cells, deltas }
}

#[derive(Serialize)]
struct WeeklyRow<'a> {
    method: &'a str,
    network: &'a str,
    secondment: &'a str,
    seed: u64,
    week: usize,
    metric: &'a str,
    value: f64,
}

/// One row per (method, network, secondment, seed, week, metric).
pub fn write_weekly_csv<W: Write>(writer: W, results: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in results {
        for (k, m) in r.weekly.iter().enumerate() {
            let values = m.values();
            for (name, value) in WeeklyMetrics::NAMES.iter().zip(values) {
                w.serialize(WeeklyRow {
                    method: &r.key.method,
                    network: &r.key.network,
                    secondment: &r.key.secondment,
                    seed: r.key.seed,
                    week: k + 1,
                    metric: name,
                    value,
                })?;
            }
            w.serialize(WeeklyRow {
                method: &r.key.method,
                network: &r.key.network,
                secondment: &r.key.secondment,
                seed: r.key.seed,
                week: k + 1,
                metric: "epsilon",
                value: r.epsilons[k],
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Weekly cost per cell as one column per week, for plotting.
pub fn write_cost_curves_csv<W: Write>(writer: W, results: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let weeks = results.iter().map(|r| r.weekly.len()).max().unwrap_or(0);
    let mut header = vec!["method".to_string(), "network".into(), "secondment".into(), "seed".into()];
    header.extend((1..=weeks).map(|k| format!("week_{k}")));
    w.write_record(&header)?;
    for r in results {
        let mut row = vec![r.key.method.clone(), r.key.network.clone(), r.key.secondment.clone(), r.key.seed.to_string()];
        row.extend((0..weeks).map(|k| r.weekly.get(k).map_or(String::new(), |m| format!("{}", m.cost))));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Summary table: one row per scenario and metric, averaged over seeds;
/// then the pairwise changes. Absent values are empty fields.
pub fn write_summary_csv<W: Write>(writer: W, table: &ComparisonTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["kind", "metric", "method", "network", "secondment", "vs_method", "vs_network", "vs_secondment", "value"])?;
    let fmt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v}"));
    for (s, m) in &table.cells {
        for (name, value) in WeeklyMetrics::NAMES.iter().zip(m.values()) {
            w.write_record(["mean", name, &s.method, &s.network, &s.secondment, "", "", "", &fmt(Some(value))])?;
        }
    }
    for d in &table.deltas {
        w.write_record([
            "percent_change",
            &d.metric,
            &d.base.method,
            &d.base.network,
            &d.base.secondment,
            &d.other.method,
            &d.other.network,
            &d.other.secondment,
            &fmt(d.percent),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back the rows of [`write_weekly_csv`] into cell results.
pub fn read_weekly_csv<R: std::io::Read>(reader: R) -> Result<Vec<CellResult>> {
    #[derive(Deserialize)]
    struct Row {
        method: String,
        network: String,
        secondment: String,
        seed: u64,
        week: usize,
        metric: String,
        value: f64,
    }
    let mut cells: BTreeMap<CellKey, BTreeMap<usize, (WeeklyMetrics, f64)>> = BTreeMap::new();
    for rec in csv::Reader::from_reader(reader).deserialize() {
        let r: Row = rec?;
        let key = CellKey { method: r.method, network: r.network, secondment: r.secondment, seed: r.seed };
        let entry = cells.entry(key).or_default().entry(r.week).or_default();
        if r.metric == "epsilon" {
            entry.1 = r.value;
            continue;
        }
        let k = WeeklyMetrics::NAMES
            .iter()
            .position(|n| *n == r.metric)
            .ok_or_else(|| invalid(format!("unknown metric {}", r.metric)))?;
        let mut v = entry.0.values();
        v[k] = r.value;
        entry.0 = WeeklyMetrics::from_values(v);
    }
    Ok(cells
        .into_iter()
        .map(|(key, weeks)| {
            let weekly: Vec<WeeklyMetrics> = weeks.values().map(|v| v.0).collect();
            let epsilons = weeks.values().map(|v| v.1).collect();
            CellResult { aggregate: WeeklyMetrics::mean(&weekly), key, weekly, epsilons }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArcFlows, DeploymentCost};

    fn day(deployed: &[(usize, usize, f64)], planned_cost: f64, cost: DeploymentCost) -> DayOutcome {
        let mut d = ArcFlows::zeros(4);
        for &(i, j, v) in deployed {
            d.set(i, j, v);
        }
        DayOutcome { day: 1, demand: vec![0.0; 4], planned: d.clone(), deployed: d, imbalance: vec![0.0; 4], planned_cost, cost }
    }

    fn week(days: Vec<DayOutcome>) -> WeekOutcome {
        WeekOutcome { week: 1, epsilon: 0.0, capacity: vec![1; 4], plan_objective: 0.0, days, candidates: vec![] }
    }

    fn key(method: &str, network: &str) -> CellKey {
        CellKey { method: method.into(), network: network.into(), secondment: "baseline".into(), seed: 0 }
    }

    fn cell(method: &str, network: &str, cost: f64) -> CellResult {
        let m = WeeklyMetrics { cost, ..Default::default() };
        CellResult { key: key(method, network), weekly: vec![m], aggregate: m, epsilons: vec![0.0] }
    }

    #[test]
    fn single_planned_transfer() {
        let net = NetworkConfig::four_site();
        let t = Trajectory { weeks: vec![week(vec![day(&[(0, 3, 1.0)], 2.2, DeploymentCost::default())])] };
        let grid = vec![vec![Some(&t)]];
        let m = weekly_cost(&grid, 1, &net, Some(3), 0.0).unwrap();
        assert!((m.cost - 2.2).abs() < 1e-12);
        assert_eq!((m.deployed_transfers, m.transferred_miles), (1.0, 62.0));
    }

    #[test]
    fn components_add_up() {
        let net = NetworkConfig::four_site();
        let c = DeploymentCost { emergency: 2.8, cancellation: -2.09, shortage: 30.0, cancelled_value: 2.2 };
        let w = week(vec![day(&[(0, 1, 2.0)], 4.4, c), day(&[], 0.0, DeploymentCost::default())]);
        let m = week_metrics(&w, &net, Some(3), 250.0);
        assert_eq!(m.coordination, 250.0);
        assert!((m.cost - (4.4 + 2.8 - 2.09 + 30.0 + 250.0)).abs() < 1e-12);
        assert!((m.cancellation_fee - 0.11).abs() < 1e-12);
    }

    #[test]
    fn miles_per_deployment() {
        let net = NetworkConfig::four_site();
        assert_eq!(count_transfers_and_miles(&[], &net), (0.0, 0.0));
        let days = [day(&[(0, 3, 2.0)], 0.0, DeploymentCost::default())];
        assert_eq!(count_transfers_and_miles(&days, &net), (2.0, 124.0));
        // Routing West to East through the hub doubles the legs.
        let via_hub = [day(&[(0, 3, 1.0), (3, 1, 1.0)], 0.0, DeploymentCost::default())];
        let direct = [day(&[(0, 1, 1.0)], 0.0, DeploymentCost::default())];
        assert_eq!(count_transfers_and_miles(&via_hub, &net), (2.0, 62.0 + 56.0));
        assert_eq!(count_transfers_and_miles(&direct, &net), (1.0, 88.0));
    }

    #[test]
    fn hub_routes_pay_no_coordination() {
        let w = week(vec![day(&[(0, 3, 1.0), (3, 2, 1.0)], 0.0, DeploymentCost::default())]);
        assert_eq!(coordination_charge(&w, Some(3), 250.0), 0.0);
        assert_eq!(coordination_charge(&w, None, 250.0), 0.0);
    }

    #[test]
    fn missing_runs_are_listed() {
        let net = NetworkConfig::four_site();
        let t = Trajectory { weeks: vec![week(vec![])] };
        let grid = vec![vec![Some(&t), None]];
        let err = weekly_cost(&grid, 1, &net, None, 0.0).unwrap_err().to_string();
        assert!(err.contains("(m=0, h=1)"), "{err}");
    }

    #[test]
    fn deltas() {
        let t = compare_scenarios(&[cell("saa", "hs", 900.0), cell("saa", "fc", 600.0)], &[]);
        let d = t.deltas.iter().find(|d| d.metric == "cost").unwrap();
        assert_eq!(d.base.network, "fc");
        assert!((d.percent.unwrap() - 50.0).abs() < 1e-12);
        assert!((percent_change(900.0, 600.0).unwrap() + 33.333_333_333).abs() < 1e-6);
        let same = compare_scenarios(&[cell("saa", "fc", 600.0), cell("sro", "fc", 600.0)], &[]);
        assert_eq!(same.deltas[0].percent, Some(0.0));
    }

    #[test]
    fn absent_cells_stay_absent() {
        let fc = Scenario { method: "saa".into(), network: "fc".into(), secondment: "baseline".into() };
        let hs = Scenario { network: "hs".into(), ..fc.clone() };
        let t = compare_scenarios(&[cell("saa", "fc", 600.0)], &[(hs.clone(), fc.clone())]);
        assert_eq!(t.value(&hs, "cost"), None);
        assert!(t.deltas.iter().all(|d| d.percent.is_none()));
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l.starts_with("percent_change,cost,saa,hs") && l.ends_with(',')));
    }

    #[test]
    fn weekly_csv_round_trip() {
        let mut a = cell("sro", "fc", 612.5);
        a.weekly.push(WeeklyMetrics { cost: 1.0, shortage: 1.0, ..Default::default() });
        a.epsilons.push(5.0);
        a.aggregate = WeeklyMetrics::mean(&a.weekly);
        let mut buf = Vec::new();
        write_weekly_csv(&mut buf, std::slice::from_ref(&a)).unwrap();
        assert_eq!(read_weekly_csv(&buf[..]).unwrap(), vec![a]);
    }
}
