use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rounding::{round_flows, round_plan, RoundingMode};
use super::source::TrainingSource;
use crate::error::{invalid, Error, Result};
use crate::lp::{solve_sro_ldr, Formulation, LdrInstance};
use crate::model::{deployment_cost, imbalance, planned_cost, ArcFlows, CostParams, DeploymentCost, NetworkConfig, SecondmentState};
use crate::seed::rng_for;
use crate::simulator::CapacitySchedule;
use crate::uncertainty::{build_uncertainty_sets, BoxOptions, DemandPath, SamplePathSet};

/// Robust radius used each week.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RobustSchedule {
    /// The same radius every week; `0` is sample average approximation.
    Fixed { epsilon: f64 },
    /// Start at zero and re-select each week from a grid around the last
    /// radius, `step_scale` widening the grid.
    Adaptive { step_scale: f64 },
}

/// Everything the planner needs besides the data.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig {
    /// Network; its capacity is replaced by the weekly schedule.
    pub network: NetworkConfig,
    pub costs: CostParams,
    /// Days per week.
    pub horizon: u32,
    /// Training paths drawn per request, split evenly over `sets`.
    pub training_paths: usize,
    pub sets: usize,
    pub schedule: RobustSchedule,
    pub rounding: RoundingMode,
    pub box_options: BoxOptions,
}

impl PlannerConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut errs = self.network.violations();
        errs.extend(self.costs.violations(self.network.num_locations()));
        if self.horizon == 0 {
            errs.push("horizon must be at least one day".into());
        } else if self.network.max_secondment() > self.horizon {
            errs.push("secondments may not be longer than the weekly horizon".into());
        }
        if self.costs.days() < self.horizon as usize {
            errs.push("cost parameters must cover every day of the horizon".into());
        }
        if self.sets == 0 || self.training_paths == 0 || !self.training_paths.is_multiple_of(self.sets) {
            errs.push(format!(
                "training paths ({}) must be a positive multiple of the number of sets ({})",
                self.training_paths, self.sets
            ));
        }
        match self.schedule {
            RobustSchedule::Fixed { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => {
                errs.push("fixed robust radius must be finite and nonnegative".into())
            }
            RobustSchedule::Adaptive { step_scale } if !(step_scale >= 0.0 && step_scale.is_finite()) => {
                errs.push("robust step scale must be finite and nonnegative".into())
            }
            _ => {}
        }
        errs
    }

    fn set_size(&self) -> usize {
        self.training_paths / self.sets
    }
}

/// Rounded weekly plan and the LP it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeekPlan {
    pub fractional: Vec<ArcFlows>,
    pub plan: Vec<ArcFlows>,
    pub objective: f64,
}

/// Solves the weekly decision-rule LP from an empty state and rounds the
/// planned transfers.
#[allow(clippy::too_many_arguments)]
pub fn plan_week<R: Rng + ?Sized>(
    network: &NetworkConfig,
    costs: &CostParams,
    horizon: u32,
    training: &SamplePathSet,
    epsilon: f64,
    options: BoxOptions,
    rounding: RoundingMode,
    rng: &mut R,
) -> Result<WeekPlan> {
    if training.is_empty() {
        return Err(invalid("weekly planning needs at least one training path"));
    }
    let boxes = build_uncertainty_sets(training, epsilon, options)?;
    let state = SecondmentState::for_network(network);
    let inst = LdrInstance {
        network,
        costs,
        horizon,
        first_day: 1,
        boxes: &boxes,
        state: &state,
        fixed_plan: None,
        formulation: Formulation::Auto,
    };
    let (sol, _) = solve_sro_ldr(&inst)?;
    let plan = round_plan(network, &state, &sol.a, rounding, 1, horizon, rng)?;
    Ok(WeekPlan { fractional: sol.a, plan, objective: sol.objective_value })
}

/// Fractional and implemented deployments of one day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayDecision {
    pub fractional: ArcFlows,
    pub action: ArcFlows,
}

/// Sub-horizon length of a re-solve on `day`.
pub fn subhorizon(network: &NetworkConfig, day: u32, horizon: u32) -> usize {
    network.max_secondment().min(horizon - day + 1) as usize
}

/// Re-solves days `day..day + S` with the committed `plan` fixed, today's
/// demand pinned to `observed` and secondments in `state`, then implements
/// only today's rounded deployment.
#[allow(clippy::too_many_arguments)]
pub fn deploy_day<R: Rng + ?Sized>(
    network: &NetworkConfig,
    costs: &CostParams,
    horizon: u32,
    plan: &[ArcFlows],
    state: &SecondmentState,
    day: u32,
    observed: &[f64],
    training: &SamplePathSet,
    epsilon: f64,
    options: BoxOptions,
    rounding: RoundingMode,
    rng: &mut R,
) -> Result<DayDecision> {
    let len = subhorizon(network, day, horizon);
    if training.is_empty() || training.horizon() < len {
        return Err(invalid(format!("day {day} needs training paths covering {len} days")));
    }
    if plan.len() != horizon as usize {
        return Err(Error::Shape(format!("plan covers {} days, horizon is {horizon}", plan.len())));
    }
    let window = if training.horizon() == len {
        training.clone()
    } else {
        SamplePathSet::new(training.paths().iter().map(|p| p.window(0, len)).collect())?
    };
    let mut boxes = build_uncertainty_sets(&window, epsilon, options)?;
    for b in &mut boxes {
        b.pin_day(0, observed);
    }
    let first = day as usize - 1;
    let inst = LdrInstance {
        network,
        costs,
        horizon,
        first_day: day,
        boxes: &boxes,
        state,
        fixed_plan: Some(&plan[first..first + len]),
        formulation: Formulation::Auto,
    };
    let (sol, _) = solve_sro_ldr(&inst)?;
    let today = DemandPath::new(vec![observed.to_vec()])?;
    let fractional = sol.deployment(&today, 0);
    let mut rounded = round_flows(network, &fractional, rounding, rng);
    let mut single = [rounded.flows];
    super::rounding::repair_capacity(network, state, &mut single, std::slice::from_mut(&mut rounded.raised), day, horizon)?;
    let [action] = single;
    Ok(DayDecision { fractional, action })
}

/// Realized outcome of one day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayOutcome {
    pub day: u32,
    pub demand: Vec<f64>,
    pub planned: ArcFlows,
    pub deployed: ArcFlows,
    /// Demand minus on-site staff after deployment.
    pub imbalance: Vec<f64>,
    pub planned_cost: f64,
    pub cost: DeploymentCost,
}

impl DayOutcome {
    pub fn total(&self) -> f64 {
        self.planned_cost + self.cost.total()
    }
}

/// One simulated week.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeekOutcome {
    pub week: usize,
    pub epsilon: f64,
    pub capacity: Vec<u32>,
    pub plan_objective: f64,
    pub days: Vec<DayOutcome>,
    /// Radii evaluated on the previous week and their costs.
    #[serde(default)]
    pub candidates: Vec<(f64, f64)>,
}

impl WeekOutcome {
    /// Planned plus deployment cost of the week.
    pub fn cost(&self) -> f64 {
        self.days.iter().map(DayOutcome::total).sum()
    }
}

/// All weeks of one testing path under one training set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub weeks: Vec<WeekOutcome>,
}

/// Realized demand of days `1..` and the weekly capacity.
#[derive(Clone, Copy, Debug)]
pub struct GroundTruth<'a> {
    pub demand: &'a DemandPath,
    pub capacity: &'a CapacitySchedule,
}

/// Stream tags for rounding draws.
const PLAN_STREAM: u64 = 1;
const DEPLOY_STREAM: u64 = 2;

/// Runs `week` with radius `epsilon` for training set `set`. Rounding draws
/// depend on `(seed, week, day)` only, so replaying a week with the same
/// radius reproduces it.
pub fn simulate_week(
    cfg: &PlannerConfig,
    truth: GroundTruth<'_>,
    week: usize,
    epsilon: f64,
    training: &mut dyn TrainingSource,
    set: usize,
    seed: u64,
) -> Result<WeekOutcome> {
    let t_len = cfg.horizon;
    let offset = (week - 1) * t_len as usize;
    if truth.demand.horizon() < offset + t_len as usize || truth.capacity.weeks() < week {
        return Err(Error::Shape(format!("ground truth does not cover week {week}")));
    }
    let capacity = truth.capacity.week(week).to_vec();
    let net = cfg.network.clone().with_capacity(capacity.clone());
    let size = cfg.set_size();
    let pick = |all: SamplePathSet| -> Result<SamplePathSet> {
        all.chunks(size).into_iter().nth(set).ok_or_else(|| invalid(format!("training set {set} does not exist")))
    };

    let weekly = pick(training.weekly(week, cfg.training_paths)?)?;
    let mut rng = rng_for(seed, &[week as u64, 0, PLAN_STREAM]);
    let planned = plan_week(&net, &cfg.costs, t_len, &weekly, epsilon, cfg.box_options, cfg.rounding, &mut rng)
        .map_err(|e| e.context(format!("planning week {week}")))?;

    let mut state = SecondmentState::for_network(&net);
    let mut days = Vec::with_capacity(t_len as usize);
    for day in 1..=t_len {
        let observed = truth.demand.day(offset + day as usize - 1);
        let len = subhorizon(&net, day, t_len);
        let fresh = pick(training.daily(week, day, len, cfg.training_paths)?)?;
        let mut rng = rng_for(seed, &[week as u64, day as u64, DEPLOY_STREAM]);
        let decision = deploy_day(
            &net,
            &cfg.costs,
            t_len,
            &planned.plan,
            &state,
            day,
            observed,
            &fresh,
            epsilon,
            cfg.box_options,
            cfg.rounding,
            &mut rng,
        )
        .map_err(|e| e.context(format!("week {week} day {day}")))?;
        let a = &planned.plan[day as usize - 1];
        let delta = imbalance(&state, &decision.action, observed, &capacity);
        let cost = deployment_cost(&net, &cfg.costs, a, &decision.action, &delta, day, t_len);
        days.push(DayOutcome {
            day,
            demand: observed.to_vec(),
            planned: a.clone(),
            deployed: decision.action.clone(),
            imbalance: delta,
            planned_cost: planned_cost(&net, &cfg.costs, a, day, t_len),
            cost,
        });
        state = state.advance(&net, &decision.action, day, t_len);
    }
    Ok(WeekOutcome { week, epsilon, capacity, plan_objective: planned.objective, days, candidates: Vec::new() })
}

/// Candidate radii `(ε − 5υ)⁺, (ε − 5υ)⁺ + 5, …, ε + 5υ`.
pub fn robust_grid(previous: f64, step_scale: f64) -> Vec<f64> {
    const STEP: f64 = 5.0;
    let lo = (previous - STEP * step_scale).max(0.0);
    let hi = previous + STEP * step_scale;
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let v = lo + STEP * k as f64;
        if v > hi + 1e-9 {
            break;
        }
        out.push(v);
        k += 1;
    }
    out
}

/// Radius with the lowest cost; ties go to the smaller radius.
pub fn select_robust_param(evaluated: &[(f64, f64)]) -> Option<f64> {
    evaluated
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
        .map(|(eps, _)| eps)
}

/// Rolling-horizon run over `weeks` weeks of one testing path with training
/// set `set`. Under an adaptive schedule every week after the first replays
/// the previous week under each grid radius and keeps the cheapest.
pub fn run_horizon(
    cfg: &PlannerConfig,
    truth: GroundTruth<'_>,
    weeks: usize,
    training: &mut dyn TrainingSource,
    set: usize,
    seed: u64,
) -> Result<Trajectory> {
    let errs = cfg.violations();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    if set >= cfg.sets {
        return Err(invalid(format!("training set {set} out of range for {} sets", cfg.sets)));
    }
    let mut traj = Trajectory::default();
    for week in 1..=weeks {
        let (epsilon, candidates) = match (cfg.schedule, traj.weeks.last()) {
            (RobustSchedule::Fixed { epsilon }, _) => (epsilon, Vec::new()),
            (RobustSchedule::Adaptive { .. }, None) => (0.0, Vec::new()),
            (RobustSchedule::Adaptive { step_scale }, Some(prev)) => {
                let mut evaluated = Vec::new();
                for eps in robust_grid(prev.epsilon, step_scale) {
                    let cost = if eps == prev.epsilon {
                        prev.cost()
                    } else {
                        simulate_week(cfg, truth, week - 1, eps, training, set, seed)
                            .map_err(|e| e.context(format!("replaying week {} with radius {eps}", week - 1)))?
                            .cost()
                    };
                    evaluated.push((eps, cost));
                }
                (select_robust_param(&evaluated).unwrap_or(prev.epsilon), evaluated)
            }
        };
        let mut outcome = simulate_week(cfg, truth, week, epsilon, training, set, seed)?;
        outcome.candidates = candidates;
        traj.weeks.push(outcome);
    }
    Ok(traj)
}

/// One line of the audit trail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum AuditRecord {
    Week { week: usize, epsilon: f64, plan_objective: f64, cost: f64 },
    Arc { week: usize, day: u32, from: usize, to: usize, planned: f64, deployed: f64, emergency: f64, cancelled: f64 },
    Site { week: usize, day: u32, location: usize, demand: f64, imbalance: f64, shortage: f64 },
    Day { week: usize, day: u32, planned_cost: f64, emergency_cost: f64, cancellation_cost: f64, shortage_cost: f64 },
}

/// Audit records of a trajectory: per week, per nonzero arc-day, per
/// site-day and per day.
pub fn audit_records(traj: &Trajectory) -> Vec<AuditRecord> {
    let mut out = Vec::new();
    for w in &traj.weeks {
        out.push(AuditRecord::Week { week: w.week, epsilon: w.epsilon, plan_objective: w.plan_objective, cost: w.cost() });
        for d in &w.days {
            let n = d.planned.size();
            for from in 0..n {
                for to in 0..n {
                    let (planned, deployed) = (d.planned.get(from, to), d.deployed.get(from, to));
                    if planned != 0.0 || deployed != 0.0 {
                        out.push(AuditRecord::Arc {
                            week: w.week,
                            day: d.day,
                            from,
                            to,
                            planned,
                            deployed,
                            emergency: (deployed - planned).max(0.0),
                            cancelled: (planned - deployed).max(0.0),
                        });
                    }
                }
            }
            for (location, (&demand, &imbalance)) in d.demand.iter().zip(&d.imbalance).enumerate() {
                out.push(AuditRecord::Site { week: w.week, day: d.day, location, demand, imbalance, shortage: imbalance.max(0.0) });
            }
            out.push(AuditRecord::Day {
                week: w.week,
                day: d.day,
                planned_cost: d.planned_cost,
                emergency_cost: d.cost.emergency,
                cancellation_cost: d.cost.cancellation,
                shortage_cost: d.cost.shortage,
            });
        }
    }
    out
}

/// Writes [`audit_records`] as JSON lines.
pub fn write_audit<W: Write>(mut writer: W, traj: &Trajectory) -> Result<()> {
    for r in audit_records(traj) {
        serde_json::to_writer(&mut writer, &r)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
