use serde::{Deserialize, Serialize};

use super::arrivals::{generate_arrival_rates, ArrivalModelParams, SurgeShape};
use super::capacity::{generate_capacity, CapacityParams, CapacitySchedule};
use super::census::{
    simulate_census, steady_state_census, CensusState, NurseRatios, TransitionMatrix, TransitionModel, ADJUSTED_TRANSITIONS, ARRIVAL_SPLIT,
    UNITS,
};
use super::training::PatientTrace;
use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::uncertainty::DemandPath;

/// Fitted lag coefficients of the arrival recursion, lags 1 to 7.
pub const AR_COEFFICIENTS: [f64; 7] = [0.061, -0.165, -0.042, -0.072, -0.148, 0.035, 0.588];

/// Relative settled arrival rate by day of week, first day of the run first.
pub const DAY_OF_WEEK_PROFILE: [f64; 7] = [1.08, 1.06, 1.03, 1.0, 0.98, 0.92, 0.93];

/// Settled mean arrival rate per site (West, East, South, Central) divided
/// by the site's location scale.
pub const SITE_LEVELS: [f64; 4] = [310.0, 94.0, 81.0, 289.0];

/// Day-of-week levels `κ` under which the noise-free AR recursion settles at
/// `level · profile[y]`: `κ_y = level · (g_y − Σ_l φ_l g_{y−l})`.
pub fn settled_day_levels(level: f64, profile: &[f64], ar_coefs: &[f64]) -> Vec<f64> {
    let y_len = profile.len() as i64;
    (0..profile.len())
        .map(|y| {
            let lagged: f64 = ar_coefs
                .iter()
                .enumerate()
                .map(|(l, phi)| phi * profile[(y as i64 - l as i64 - 1).rem_euclid(y_len) as usize])
                .sum();
            level * (profile[y] - lagged)
        })
        .collect()
}

/// Everything needed to generate ground-truth demand and capacity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatorConfig {
    pub arrivals: ArrivalModelParams,
    pub transitions: TransitionModel,
    #[serde(default)]
    pub ratios: NurseRatios,
    pub capacity: CapacityParams,
    /// History days simulated before day 1.
    pub warmup_days: usize,
    /// Census at the start of the first history day; the rounded expected
    /// steady state when absent.
    #[serde(default)]
    pub initial_census: Option<CensusState>,
}

impl SimulatorConfig {
    /// Four-site network with surge peak `peak_factor`.
    pub fn four_site(peak_factor: f64) -> Self {
        let distance = crate::model::NetworkConfig::four_site().distance;
        let day_levels = SITE_LEVELS.iter().map(|&k| settled_day_levels(k, &DAY_OF_WEEK_PROFILE, &AR_COEFFICIENTS)).collect();
        SimulatorConfig {
            arrivals: ArrivalModelParams {
                ar_coefs: vec![AR_COEFFICIENTS.to_vec(); 4],
                period: 7,
                day_levels,
                location_scale: vec![0.3, 0.4, 0.5, 1.0],
                surge: SurgeShape { start: 1.0, peak: 49.0, end: 119.0, peak_factor },
                spatial_decay: 6.5,
                spatial_lag: 7,
                spatial_window: 7,
                spatial_seed_fraction: 0.1,
                distance,
                noise_multiplier: 1.0,
                spread_multiplier: 1.0,
                surge_scales_memory: false,
                history: None,
            },
            transitions: TransitionModel::uniform(4, 7, ARRIVAL_SPLIT, ADJUSTED_TRANSITIONS),
            ratios: NurseRatios::default(),
            capacity: CapacityParams::four_site(),
            warmup_days: 21,
            initial_census: None,
        }
    }

    /// Swaps in another transition matrix and rescales the arrival levels by
    /// the ratio of expected nurse-days per arrival, so that the settled
    /// demand stays where it was.
    pub fn with_transitions(mut self, matrix: TransitionMatrix) -> Self {
        let per_arrival = |split: &[f64; UNITS], m: &TransitionMatrix| -> f64 {
            let n = steady_state_census(1.0, split, m);
            (0..UNITS).map(|u| n[u] / self.ratios.patients_per_nurse[u]).sum()
        };
        for i in 0..self.locations() {
            let split = self.transitions.arrival_split[i];
            let scale = per_arrival(&split, &self.transitions.weekly_mean(i)) / per_arrival(&split, &matrix);
            for k in &mut self.arrivals.day_levels[i] {
                *k *= scale;
            }
            for day in &mut self.transitions.probs[i] {
                *day = matrix;
            }
        }
        self
    }

    pub fn period(&self) -> usize {
        self.arrivals.period
    }

    pub fn locations(&self) -> usize {
        self.arrivals.locations()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut errs = self.arrivals.violations();
        errs.extend(self.transitions.violations());
        errs.extend(self.capacity.violations());
        let l = self.locations();
        if self.transitions.locations() != l || self.capacity.initial.len() != l {
            errs.push(format!("arrivals, transitions and capacity must all cover {l} locations"));
        }
        if self.transitions.period() != self.period() {
            errs.push("transitions must have one matrix per day of the arrival period".into());
        }
        if self.ratios.patients_per_nurse.iter().any(|&r| !(r > 0.0)) {
            errs.push("ratios.patients_per_nurse must be positive".into());
        }
        if let Some(c) = &self.initial_census {
            if c.counts.len() != l {
                errs.push(format!("initial_census must cover {l} locations"));
            }
        }
        errs
    }

    /// Expected census at the stationary arrival level, rounded.
    pub fn steady_census(&self) -> CensusState {
        let level = self.arrivals.stationary_level();
        let counts = (0..self.locations())
            .map(|i| {
                let n = steady_state_census(level[i], &self.transitions.arrival_split[i], &self.transitions.weekly_mean(i));
                let mut out = [0u64; UNITS];
                for u in 0..UNITS {
                    out[u] = n[u].round().max(0.0) as u64;
                }
                out
            })
            .collect();
        CensusState { counts }
    }
}

/// One ground-truth scenario: the full patient trace, the demand of days
/// `1..=weeks·period` and the weekly capacity derived from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestingPath {
    pub trace: PatientTrace,
    pub demand: DemandPath,
    pub capacity: CapacitySchedule,
}

impl TestingPath {
    /// Rebuilds demand and capacity from a recorded trace.
    pub fn from_trace(trace: PatientTrace, config: &SimulatorConfig, weeks: usize) -> Result<Self> {
        let days = weeks * config.period();
        if trace.first_day > 1 || trace.last_day() + 1 < days as i64 {
            return Err(Error::Shape(format!("trace does not cover days 1..={days}")));
        }
        let demand = trace.demand(1, days, &config.ratios)?;
        let capacity = generate_capacity(&demand, &config.capacity, weeks, config.period())?;
        Ok(TestingPath { trace, demand, capacity })
    }
}

/// Simulates history and `weeks` weeks of ground truth from `seed`.
pub fn generate_testing_path(config: &SimulatorConfig, weeks: usize, seed: u64) -> Result<TestingPath> {
    let errs = config.violations();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let first_day = 1 - config.warmup_days as i64;
    let days = config.warmup_days + weeks * config.period();
    let mut rng = rng_for(seed, &[0x7e57]);
    let arrivals = generate_arrival_rates(&config.arrivals, first_day, days, &mut rng);
    let initial = config.initial_census.clone().unwrap_or_else(|| config.steady_census());
    let first_dow = config.arrivals.day_of_week(first_day);
    let traj = simulate_census(&initial, &arrivals.count, &config.transitions, first_dow, &mut rng);
    let trace = PatientTrace { first_day, period: config.period(), census: traj.states, flows: traj.flows };
    TestingPath::from_trace(trace, config, weeks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::ESTIMATED_TRANSITIONS;

    #[test]
    fn swapped_transitions_keep_settled_demand() {
        let base = SimulatorConfig::four_site(1.0);
        let other = base.clone().with_transitions(ESTIMATED_TRANSITIONS);
        let demand = |c: &SimulatorConfig| {
            let level = c.arrivals.stationary_level();
            (0..4)
                .map(|i| {
                    let n = steady_state_census(level[i], &c.transitions.arrival_split[i], &c.transitions.weekly_mean(i));
                    (0..UNITS).map(|u| n[u] / c.ratios.patients_per_nurse[u]).sum::<f64>()
                })
                .collect::<Vec<f64>>()
        };
        for (a, b) in demand(&base).iter().zip(demand(&other)) {
            assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
        }
        assert!(other.arrivals.day_levels[0][0] < base.arrivals.day_levels[0][0] / 2.0);
    }

    #[test]
    fn default_config_is_valid() {
        assert!(SimulatorConfig::four_site(1.5).violations().is_empty());
        let mut bad = SimulatorConfig::four_site(1.5);
        bad.capacity.initial.pop();
        assert!(!bad.violations().is_empty());
    }

    #[test]
    fn same_seed_same_path() {
        let cfg = SimulatorConfig::four_site(1.5);
        let a = generate_testing_path(&cfg, 2, 5).unwrap();
        let b = generate_testing_path(&cfg, 2, 5).unwrap();
        let c = generate_testing_path(&cfg, 2, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.demand, c.demand);
        assert_eq!(a.demand.horizon(), 14);
        assert_eq!(a.trace.first_day, -20);
        assert_eq!(a.capacity.weeks(), 2);
    }

    #[test]
    fn conservation_along_trace() {
        let cfg = SimulatorConfig::four_site(1.5);
        let p = generate_testing_path(&cfg, 3, 1).unwrap();
        for (k, f) in p.trace.flows.iter().enumerate() {
            let before = p.trace.census[k].total();
            let after = p.trace.census[k + 1].total();
            assert_eq!(after + f.discharged(), before + f.admitted_total());
        }
    }
}
