//! Experiment orchestration: testing data, one planner run per
//! (method, network, testing path, training set), metrics and artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method, Network};
use super::manifest::{checksum_files, RunManifest, WorkerSeeds};
use crate::error::{invalid, Error, Result};
use crate::evaluator::{compare_scenarios, evaluate_cell, write_cost_curves_csv, write_summary_csv, write_weekly_csv, CellKey, CellResult, ComparisonTable};
use crate::planner::{plan_week, run_horizon, write_audit, GroundTruth, TrainingSource, Trajectory, WeekPlan};
use crate::seed::{child_seed, rng_for};
use crate::simulator::{
    generate_testing_path, read_trace_csv, write_capacity_csv, write_demand_csv, write_trace_csv, RollingForecaster, TestingPath,
};

const TESTING_STREAM: u64 = 1;
const TRAINING_STREAM: u64 = 2;
const ROUNDING_STREAM: u64 = 3;

pub const WEEKLY_METRICS: &str = "weekly_metrics.csv";
pub const SUMMARY: &str = "summary.csv";
pub const COST_CURVES: &str = "cost_curves.csv";
pub const MANIFEST: &str = "manifest.json";

/// One planner run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub method: Method,
    pub network: Network,
    /// Testing path.
    pub h: usize,
    /// Training set.
    pub m: usize,
}

impl Task {
    pub fn seeds(&self, base: u64) -> WorkerSeeds {
        WorkerSeeds {
            method: self.method,
            network: self.network,
            h: self.h,
            m: self.m,
            training: child_seed(base, &[TRAINING_STREAM, self.h as u64]),
            rounding: child_seed(base, &[ROUNDING_STREAM, self.h as u64, self.m as u64]),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Artifacts go here; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 0 and 1 both mean sequential.
    pub jobs: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub results: Vec<CellResult>,
    pub comparison: ComparisonTable,
    pub manifest: RunManifest,
}

/// Testing path `h` of the experiment, from its own seed stream.
pub fn testing_path(cfg: &ExperimentConfig, h: usize) -> Result<TestingPath> {
    generate_testing_path(&cfg.simulator_config(), cfg.counts.weeks, child_seed(cfg.seed, &[TESTING_STREAM, h as u64]))
}

/// The `H` testing paths: simulated, or rebuilt from the frozen trace file.
pub fn testing_paths(cfg: &ExperimentConfig) -> Result<Vec<TestingPath>> {
    let sim = cfg.simulator_config();
    let h = cfg.counts.testing_paths;
    match &cfg.freeze_paths {
        Some(path) => {
            let file = File::open(path).map_err(|e| Error::from(e).context(format!("opening {}", path.display())))?;
            let traces = read_trace_csv(file, sim.period())?;
            if traces.len() < h {
                return Err(invalid(format!("{} holds {} traces, {h} testing paths requested", path.display(), traces.len())));
            }
            traces.into_iter().take(h).map(|t| TestingPath::from_trace(t, &sim, cfg.counts.weeks)).collect()
        }
        None => (0..h).map(|k| testing_path(cfg, k)).collect(),
    }
}

/// Writes the testing data as trace, demand and capacity CSVs.
pub fn write_testing_data(dir: &Path, cfg: &ExperimentConfig, paths: &[TestingPath]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let traces: Vec<_> = paths.iter().map(|p| p.trace.clone()).collect();
    let demand: Vec<_> = paths.iter().map(|p| p.demand.clone()).collect();
    let capacity: Vec<_> = paths.iter().map(|p| p.capacity.clone()).collect();
    let files = [dir.join("trace.csv"), dir.join("demand.csv"), dir.join("capacity.csv")];
    write_trace_csv(BufWriter::new(File::create(&files[0])?), &traces)?;
    write_demand_csv(BufWriter::new(File::create(&files[1])?), &demand, 1)?;
    write_capacity_csv(BufWriter::new(File::create(&files[2])?), &capacity, cfg.counts.horizon as usize)?;
    Ok(files.to_vec())
}

pub fn tasks(cfg: &ExperimentConfig) -> Vec<Task> {
    let mut out = Vec::new();
    for method in cfg.method.methods() {
        for network in cfg.network.networks() {
            for h in 0..cfg.counts.testing_paths {
                for m in 0..cfg.counts.training_sets {
                    out.push(Task { method, network, h, m });
                }
            }
        }
    }
    out
}

/// Runs one task over all weeks of its testing path.
pub fn run_task(cfg: &ExperimentConfig, path: &TestingPath, task: Task) -> Result<Trajectory> {
    let seeds = task.seeds(cfg.seed);
    let planner = cfg.planner_config(task.method, task.network);
    let sim = cfg.simulator_config();
    let mut training =
        RollingForecaster::new(&path.trace, sim.ratios, cfg.simulator.window_weeks, cfg.counts.horizon as usize, seeds.training)?;
    let truth = GroundTruth { demand: &path.demand, capacity: &path.capacity };
    run_horizon(&planner, truth, cfg.counts.weeks, &mut training, task.m, seeds.rounding)
}

/// Runs `f` over `0..n` on `jobs` threads; stops handing out work after the
/// first failure and returns the failure with the lowest index.
fn parallel_map<T: Send>(n: usize, jobs: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let work = || loop {
        if failed.load(Ordering::Relaxed) {
            break;
        }
        let k = next.fetch_add(1, Ordering::Relaxed);
        if k >= n {
            break;
        }
        let r = f(k);
        if r.is_err() {
            failed.store(true, Ordering::Relaxed);
        }
        slots.lock().expect("result slots")[k] = Some(r);
    };
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(work);
            }
        });
    }
    let slots = slots.into_inner().expect("result slots");
    if let Some(e) = slots.iter().position(|r| matches!(r, Some(Err(_)))) {
        let mut slots = slots;
        return Err(slots.swap_remove(e).and_then(Result::err).expect("failed slot"));
    }
    Ok(slots.into_iter().map(|r| r.and_then(Result::ok).expect("every task ran")).collect())
}

/// Runs the experiment; with an output directory writes testing data,
/// trajectory logs, metric CSVs, the summary table and the manifest.
/// On failure the manifest is still written, marked incomplete.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let all = tasks(cfg);
    let mut manifest = RunManifest::new(cfg, all.iter().map(|t| t.seeds(cfg.seed)).collect());
    let mut written = Vec::new();
    let outcome = run_inner(cfg, opts, &all, &mut written);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.complete = outcome.is_ok();
    if let Err(e) = &outcome {
        manifest.error = Some(e.to_string());
    }
    if let Some(dir) = &opts.out_dir {
        manifest.files = checksum_files(dir, &written)?;
        manifest.write(&dir.join(MANIFEST))?;
    }
    let (results, comparison) = outcome?;
    Ok(ExperimentOutput { results, comparison, manifest })
}

fn run_inner(cfg: &ExperimentConfig, opts: &RunOptions, all: &[Task], written: &mut Vec<PathBuf>) -> Result<(Vec<CellResult>, ComparisonTable)> {
    let paths = testing_paths(cfg)?;
    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir)?;
        written.extend(write_testing_data(&dir.join("testing"), cfg, &paths)?);
    }

    let run = parallel_map(all.len(), opts.jobs, |k| {
        let t = all[k];
        run_task(cfg, &paths[t.h], t)
            .map_err(|e| e.context(format!("method {} network {} h={} m={}", t.method.label(), t.network.label(), t.h, t.m)))
    });
    let trajectories = run?;

    if let Some(dir) = &opts.out_dir {
        let logs = dir.join("logs");
        fs::create_dir_all(&logs)?;
        for (t, traj) in all.iter().zip(&trajectories) {
            let p = logs.join(format!("{}_{}_h{}_m{}.jsonl", t.method.label(), t.network.label(), t.h, t.m));
            let mut w = BufWriter::new(File::create(&p)?);
            write_audit(&mut w, traj)?;
            w.flush()?;
            written.push(p);
        }
    }

    let mut results = Vec::new();
    for method in cfg.method.methods() {
        for network in cfg.network.networks() {
            let mut grid: Vec<Vec<Option<&Trajectory>>> = vec![vec![None; cfg.counts.testing_paths]; cfg.counts.training_sets];
            for (t, traj) in all.iter().zip(&trajectories) {
                if t.method == method && t.network == network {
                    grid[t.m][t.h] = Some(traj);
                }
            }
            let key = CellKey {
                method: method.label().into(),
                network: network.label().into(),
                secondment: cfg.secondment.label().into(),
                seed: cfg.seed,
            };
            let net = cfg.network_config(network);
            results.push(evaluate_cell(key, &grid, cfg.counts.weeks, &net, Some(cfg.sites.hub), cfg.costs.coordination_cost)?);
        }
    }
    let comparison = compare_scenarios(&results, &[]);
    if let Some(dir) = &opts.out_dir {
        written.extend(write_metric_files(dir, &results, &comparison)?);
    }
    Ok((results, comparison))
}

/// Writes the weekly metrics, summary and cost-curve CSVs.
pub fn write_metric_files(dir: &Path, results: &[CellResult], comparison: &ComparisonTable) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [dir.join(WEEKLY_METRICS), dir.join(SUMMARY), dir.join(COST_CURVES)];
    write_weekly_csv(BufWriter::new(File::create(&files[0])?), results)?;
    write_summary_csv(BufWriter::new(File::create(&files[1])?), comparison)?;
    write_cost_curves_csv(BufWriter::new(File::create(&files[2])?), results)?;
    Ok(files.to_vec())
}

/// Plans `week` of testing path 0 with training set 0, at radius
/// `epsilon`.
pub fn plan_one_week(cfg: &ExperimentConfig, network: Network, week: usize, epsilon: f64) -> Result<WeekPlan> {
    cfg.validate()?;
    if week == 0 || week > cfg.counts.weeks {
        return Err(invalid(format!("week {week} is outside 1..={}", cfg.counts.weeks)));
    }
    let path = testing_paths(cfg)?.swap_remove(0);
    let task = Task { method: Method::Sro, network, h: 0, m: 0 };
    let seeds = task.seeds(cfg.seed);
    let planner = cfg.planner_config(Method::Saa, network);
    let sim = cfg.simulator_config();
    let mut training =
        RollingForecaster::new(&path.trace, sim.ratios, cfg.simulator.window_weeks, cfg.counts.horizon as usize, seeds.training)?;
    let all = training.weekly(week, cfg.counts.training_paths)?;
    let set = all.chunks(cfg.counts.training_paths / cfg.counts.training_sets).swap_remove(0);
    let net = planner.network.clone().with_capacity(path.capacity.week(week).to_vec());
    let mut rng = rng_for(seeds.rounding, &[week as u64, 0, 1]);
    plan_week(&net, &planner.costs, planner.horizon, &set, epsilon, planner.box_options, planner.rounding, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order_and_reports_first_failure() {
        let ok = parallel_map(20, 4, |k| Ok(k * k)).unwrap();
        assert_eq!(ok, (0..20).map(|k| k * k).collect::<Vec<_>>());
        let err = parallel_map(20, 1, |k| if k >= 3 { Err(invalid(format!("task {k}"))) } else { Ok(k) }).unwrap_err();
        assert!(err.to_string().contains("task 3"));
    }

    #[test]
    fn every_worker_has_its_own_stream() {
        let cfg = ExperimentConfig::default();
        let seeds: Vec<_> = tasks(&cfg).iter().map(|t| t.seeds(cfg.seed)).collect();
        let mut rounding: Vec<u64> = seeds.iter().filter(|s| s.method == Method::Saa && s.network == Network::FullyConnected).map(|s| s.rounding).collect();
        rounding.sort_unstable();
        rounding.dedup();
        assert_eq!(rounding.len(), cfg.counts.testing_paths * cfg.counts.training_sets);
        // Methods and networks share testing data and draws.
        let a = Task { method: Method::Saa, network: Network::HubAndSpoke, h: 2, m: 1 }.seeds(7);
        let b = Task { method: Method::Sro, network: Network::FullyConnected, h: 2, m: 1 }.seeds(7);
        assert_eq!((a.training, a.rounding), (b.training, b.rounding));
    }
}
