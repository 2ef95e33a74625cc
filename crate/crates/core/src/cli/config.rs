//! Experiment configuration: one TOML file, nested sections per module.
//!
//! A file may name a `scenario` preset; keys present in the file override
//! the preset. See `docs/config.md` for the schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::manifest::RunManifest;
use super::presets::preset;
use crate::error::{Error, Result};
use crate::model::{CostParams, NetworkConfig, SecondmentScenario};
use crate::planner::{PlannerConfig, RobustSchedule, RoundingMode};
use crate::simulator::{
    settled_day_levels, ArrivalModelParams, CapacityParams, NurseRatios, SimulatorConfig, SurgeShape, TransitionModel, ADJUSTED_TRANSITIONS,
    ARRIVAL_SPLIT, AR_COEFFICIENTS, DAY_OF_WEEK_PROFILE, ESTIMATED_TRANSITIONS, SITE_LEVELS,
};
use crate::uncertainty::BoxOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Saa,
    Sro,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Saa => "saa",
            Method::Sro => "sro",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Saa,
    Sro,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Saa => vec![Method::Saa],
            MethodChoice::Sro => vec![Method::Sro],
            MethodChoice::Both => vec![Method::Saa, Method::Sro],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Network {
    HubAndSpoke,
    FullyConnected,
}

impl Network {
    pub fn label(self) -> &'static str {
        match self {
            Network::HubAndSpoke => "hs",
            Network::FullyConnected => "fc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkChoice {
    HubAndSpoke,
    FullyConnected,
    Both,
}

impl NetworkChoice {
    pub fn networks(self) -> Vec<Network> {
        match self {
            NetworkChoice::HubAndSpoke => vec![Network::HubAndSpoke],
            NetworkChoice::FullyConnected => vec![Network::FullyConnected],
            NetworkChoice::Both => vec![Network::FullyConnected, Network::HubAndSpoke],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Secondment {
    Baseline,
    OneDay,
    ThreeDay,
    SevenDay,
    /// Full `ω[i][j]` matrix; the diagonal is ignored.
    Custom(Vec<Vec<u32>>),
}

impl Secondment {
    pub fn label(&self) -> &'static str {
        match self {
            Secondment::Baseline => "baseline",
            Secondment::OneDay => "one_day",
            Secondment::ThreeDay => "three_day",
            Secondment::SevenDay => "seven_day",
            Secondment::Custom(_) => "custom",
        }
    }
}

/// `H`, `Ĥ`, `M`, `W`, `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Counts {
    pub testing_paths: usize,
    pub training_paths: usize,
    pub training_sets: usize,
    pub weeks: usize,
    pub horizon: u32,
}

impl Default for Counts {
    fn default() -> Self {
        Counts { testing_paths: 30, training_paths: 25, training_sets: 5, weeks: 27, horizon: 7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Adaptive,
    Fixed,
}

/// Robust radius schedule of the SRO runs; SAA always uses radius 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Robust {
    pub schedule: ScheduleKind,
    /// `υ` of the adaptive grid.
    pub step_scale: f64,
    /// Radius of the fixed schedule.
    pub epsilon: f64,
}

impl Default for Robust {
    fn default() -> Self {
        Robust { schedule: ScheduleKind::Adaptive, step_scale: 2.0, epsilon: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Costs {
    pub premium: f64,
    pub emergency_multiplier: f64,
    pub cancellation_fee: f64,
    pub shortage_cost: f64,
    /// Weekly charge when any deployment bypasses the hub; evaluation only.
    pub coordination_cost: f64,
}

impl Default for Costs {
    fn default() -> Self {
        Costs { premium: 1.0, emergency_multiplier: 1.6, cancellation_fee: 0.05, shortage_cost: 15.0, coordination_cost: 0.0 }
    }
}

/// Transfer bonus growing with distance from `min` on the closest pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceBonus {
    pub min: f64,
    pub per_mile: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sites {
    /// Index of the hub (West, East, South, Central).
    pub hub: usize,
    /// Replaces the calibrated bonus table when present.
    pub distance_bonus: Option<DistanceBonus>,
}

impl Default for Sites {
    fn default() -> Self {
        Sites { hub: 3, distance_bonus: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transitions {
    Adjusted,
    Estimated,
}

/// Ground-truth generator parameters of the four-site network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Simulator {
    pub peak_factor: f64,
    pub surge_start: f64,
    pub surge_peak: f64,
    pub surge_end: f64,
    /// Settled mean arrivals per site divided by `location_scale`.
    pub site_levels: Vec<f64>,
    pub location_scale: Vec<f64>,
    pub day_of_week_profile: Vec<f64>,
    pub ar_coefs: Vec<f64>,
    pub noise_multiplier: f64,
    pub spread_multiplier: f64,
    pub spatial_decay: f64,
    pub spatial_lag: usize,
    pub spatial_window: usize,
    pub spatial_seed_fraction: f64,
    pub surge_scales_memory: bool,
    pub transitions: Transitions,
    pub patients_per_nurse: [f64; 3],
    pub capacity_initial: Vec<f64>,
    pub capacity_adjustment: Vec<f64>,
    pub capacity_up: f64,
    pub capacity_down: f64,
    pub warmup_days: usize,
    /// Weeks of history behind each training-path estimate.
    pub window_weeks: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        let cap = CapacityParams::four_site();
        Simulator {
            peak_factor: 1.5,
            surge_start: 1.0,
            surge_peak: 49.0,
            surge_end: 119.0,
            site_levels: SITE_LEVELS.to_vec(),
            location_scale: vec![0.3, 0.4, 0.5, 1.0],
            day_of_week_profile: DAY_OF_WEEK_PROFILE.to_vec(),
            ar_coefs: AR_COEFFICIENTS.to_vec(),
            noise_multiplier: 1.0,
            spread_multiplier: 1.0,
            spatial_decay: 6.5,
            spatial_lag: 7,
            spatial_window: 7,
            spatial_seed_fraction: 0.1,
            surge_scales_memory: false,
            transitions: Transitions::Adjusted,
            patients_per_nurse: NurseRatios::default().patients_per_nurse,
            capacity_initial: cap.initial,
            capacity_adjustment: cap.adjustment,
            capacity_up: cap.up,
            capacity_down: cap.down,
            warmup_days: 21,
            window_weeks: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Planner {
    pub rounding: RoundingMode,
    pub clip_support: bool,
}

impl Default for Planner {
    fn default() -> Self {
        Planner { rounding: RoundingMode::Randomized, clip_support: true }
    }
}

/// A complete experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub method: MethodChoice,
    pub network: NetworkChoice,
    pub secondment: Secondment,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Trace CSV that replaces the simulated testing paths.
    pub freeze_paths: Option<PathBuf>,
    pub counts: Counts,
    pub robust: Robust,
    pub costs: Costs,
    pub sites: Sites,
    pub simulator: Simulator,
    pub planner: Planner,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: "baseline".into(),
            method: MethodChoice::Both,
            network: NetworkChoice::Both,
            secondment: Secondment::Baseline,
            seed: 0,
            out_dir: PathBuf::from("out"),
            freeze_paths: None,
            counts: Counts::default(),
            robust: Robust::default(),
            costs: Costs::default(),
            sites: Sites::default(),
            simulator: Simulator::default(),
            planner: Planner::default(),
        }
    }
}

const LOCATIONS: usize = 4;

impl ExperimentConfig {
    /// Parses TOML text on top of the preset it names.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
        let name = match file.get("scenario") {
            Some(toml::Value::String(s)) => s.clone(),
            Some(_) => return Err(Error::Config(vec!["scenario: expected a preset name".into()])),
            None => "baseline".into(),
        };
        let base = preset(&name).ok_or_else(|| Error::Config(vec![format!("scenario: unknown preset `{name}`")]))?;
        let mut merged = toml::Table::try_from(&base).map_err(|e| Error::Internal(e.to_string()))?;
        merge(&mut merged, file);
        let cfg: ExperimentConfig =
            toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Every rule the configuration breaks, as `field.path: reason`.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let c = &self.counts;
        for (name, v) in [
            ("counts.testing_paths", c.testing_paths),
            ("counts.training_paths", c.training_paths),
            ("counts.training_sets", c.training_sets),
            ("counts.weeks", c.weeks),
            ("counts.horizon", c.horizon as usize),
        ] {
            if v == 0 {
                errs.push(format!("{name}: must be at least 1"));
            }
        }
        if c.training_sets > 0 && !c.training_paths.is_multiple_of(c.training_sets) {
            errs.push(format!(
                "counts.training_paths: {} is not divisible by counts.training_sets = {}",
                c.training_paths, c.training_sets
            ));
        }
        if c.horizon as usize != self.simulator.day_of_week_profile.len() {
            errs.push("counts.horizon: must equal the length of simulator.day_of_week_profile".into());
        }
        let k = &self.costs;
        if !(k.premium > 0.0 && k.premium.is_finite()) {
            errs.push("costs.premium: must be positive".into());
        }
        if !(k.emergency_multiplier >= 1.0 && k.emergency_multiplier.is_finite()) {
            errs.push("costs.emergency_multiplier: must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&k.cancellation_fee) {
            errs.push(format!("costs.cancellation_fee: {} is not a fraction in [0, 1]", k.cancellation_fee));
        }
        if !(k.shortage_cost >= 0.0 && k.shortage_cost.is_finite()) {
            errs.push("costs.shortage_cost: must be nonnegative".into());
        }
        if !(k.coordination_cost >= 0.0 && k.coordination_cost.is_finite()) {
            errs.push("costs.coordination_cost: must be nonnegative".into());
        }
        let r = &self.robust;
        if !(r.step_scale >= 0.0 && r.step_scale.is_finite()) {
            errs.push("robust.step_scale: must be nonnegative".into());
        }
        if !(r.epsilon >= 0.0 && r.epsilon.is_finite()) {
            errs.push("robust.epsilon: must be nonnegative".into());
        }
        if self.sites.hub >= LOCATIONS {
            errs.push(format!("sites.hub: {} is not a location index below {LOCATIONS}", self.sites.hub));
        }
        if let Some(b) = &self.sites.distance_bonus {
            if !(b.min >= 0.0 && b.per_mile >= 0.0) {
                errs.push("sites.distance_bonus: min and per_mile must be nonnegative".into());
            }
        }
        if let Secondment::Custom(m) = &self.secondment {
            if m.len() != LOCATIONS || m.iter().any(|r| r.len() != LOCATIONS) {
                errs.push(format!("secondment.custom: must be a {LOCATIONS}x{LOCATIONS} matrix"));
            } else if m.iter().enumerate().any(|(i, r)| r.iter().enumerate().any(|(j, &w)| i != j && w == 0)) {
                errs.push("secondment.custom: off-diagonal lengths must be at least 1".into());
            }
        }
        let s = &self.simulator;
        for (name, len) in [
            ("simulator.site_levels", s.site_levels.len()),
            ("simulator.location_scale", s.location_scale.len()),
            ("simulator.capacity_initial", s.capacity_initial.len()),
            ("simulator.capacity_adjustment", s.capacity_adjustment.len()),
        ] {
            if len != LOCATIONS {
                errs.push(format!("{name}: expected {LOCATIONS} entries, got {len}"));
            }
        }
        if s.window_weeks == 0 {
            errs.push("simulator.window_weeks: must be at least 1".into());
        } else if s.warmup_days < s.window_weeks * c.horizon as usize {
            errs.push(format!(
                "simulator.warmup_days: {} days cannot fill a {}-week estimation window",
                s.warmup_days, s.window_weeks
            ));
        }
        if !(s.surge_start <= s.surge_peak && s.surge_peak <= s.surge_end) {
            errs.push("simulator: surge_start <= surge_peak <= surge_end required".into());
        }
        if let Some(p) = &self.freeze_paths {
            if !p.exists() {
                errs.push(format!("freeze_paths: {} does not exist", p.display()));
            }
        }
        if errs.is_empty() {
            for n in self.network.networks() {
                errs.extend(self.planner_config(Method::Saa, n).violations().into_iter().map(|e| format!("{}: {e}", n.label())));
            }
            errs.extend(self.simulator_config().violations().into_iter().map(|e| format!("simulator: {e}")));
        }
        errs
    }

    pub fn network_config(&self, network: Network) -> NetworkConfig {
        let hub = self.sites.hub;
        let mut net = NetworkConfig::four_site();
        if let Some(b) = &self.sites.distance_bonus {
            net = net.with_distance_bonus(b.min, b.per_mile);
        }
        net = match &self.secondment {
            Secondment::Baseline => net.with_secondment_scenario(hub, SecondmentScenario::Baseline),
            Secondment::OneDay => net.with_secondment_scenario(hub, SecondmentScenario::OneDay),
            Secondment::ThreeDay => net.with_secondment_scenario(hub, SecondmentScenario::ThreeDay),
            Secondment::SevenDay => net.with_secondment_scenario(hub, SecondmentScenario::SevenDay),
            Secondment::Custom(m) => {
                let mut n = net;
                for (i, row) in m.iter().enumerate() {
                    for (j, &w) in row.iter().enumerate() {
                        n.secondment[i][j] = if i == j { 1 } else { w };
                    }
                }
                n
            }
        };
        match network {
            Network::HubAndSpoke => net.hub_and_spoke(hub),
            Network::FullyConnected => net.fully_connected(),
        }
    }

    pub fn cost_params(&self) -> CostParams {
        let k = &self.costs;
        let mut c = CostParams::uniform(
            self.counts.horizon as usize,
            LOCATIONS,
            k.premium,
            k.emergency_multiplier,
            k.cancellation_fee,
            k.shortage_cost,
        );
        c.coordination_cost = k.coordination_cost;
        c
    }

    pub fn planner_config(&self, method: Method, network: Network) -> PlannerConfig {
        let schedule = match (method, self.robust.schedule) {
            (Method::Saa, _) => RobustSchedule::Fixed { epsilon: 0.0 },
            (Method::Sro, ScheduleKind::Adaptive) => RobustSchedule::Adaptive { step_scale: self.robust.step_scale },
            (Method::Sro, ScheduleKind::Fixed) => RobustSchedule::Fixed { epsilon: self.robust.epsilon },
        };
        PlannerConfig {
            network: self.network_config(network),
            costs: self.cost_params(),
            horizon: self.counts.horizon,
            training_paths: self.counts.training_paths,
            sets: self.counts.training_sets,
            schedule,
            rounding: self.planner.rounding,
            box_options: BoxOptions { clip_support: self.planner.clip_support },
        }
    }

    pub fn simulator_config(&self) -> SimulatorConfig {
        let s = &self.simulator;
        let period = s.day_of_week_profile.len();
        let day_levels = s.site_levels.iter().map(|&k| settled_day_levels(k, &s.day_of_week_profile, &s.ar_coefs)).collect();
        let cfg = SimulatorConfig {
            arrivals: ArrivalModelParams {
                ar_coefs: vec![s.ar_coefs.clone(); LOCATIONS],
                period,
                day_levels,
                location_scale: s.location_scale.clone(),
                surge: SurgeShape { start: s.surge_start, peak: s.surge_peak, end: s.surge_end, peak_factor: s.peak_factor },
                spatial_decay: s.spatial_decay,
                spatial_lag: s.spatial_lag,
                spatial_window: s.spatial_window,
                spatial_seed_fraction: s.spatial_seed_fraction,
                distance: NetworkConfig::four_site().distance,
                noise_multiplier: s.noise_multiplier,
                spread_multiplier: s.spread_multiplier,
                surge_scales_memory: s.surge_scales_memory,
                history: None,
            },
            transitions: TransitionModel::uniform(LOCATIONS, period, ARRIVAL_SPLIT, ADJUSTED_TRANSITIONS),
            ratios: NurseRatios { patients_per_nurse: s.patients_per_nurse },
            capacity: CapacityParams {
                initial: s.capacity_initial.clone(),
                adjustment: s.capacity_adjustment.clone(),
                up: s.capacity_up,
                down: s.capacity_down,
            },
            warmup_days: s.warmup_days,
            initial_census: None,
        };
        match s.transitions {
            Transitions::Adjusted => cfg,
            Transitions::Estimated => cfg.with_transitions(ESTIMATED_TRANSITIONS),
        }
    }
}

/// Overlays `top` on `base`, recursing into tables.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) if k != "secondment" => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Reads and validates `path`: a TOML experiment file, or the JSON manifest
/// of an earlier run to repeat it.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    if path.extension().is_some_and(|e| e == "json") {
        let m = RunManifest::read(path).map_err(|e| e.context(format!("reading manifest {}", path.display())))?;
        m.config.validate()?;
        return Ok(m.config);
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    ExperimentConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default_profile() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.costs.cancellation_fee, 0.05);
        assert_eq!(cfg.costs.emergency_multiplier, 1.6);
        assert_eq!(cfg.costs.shortage_cost, 15.0);
        let c = &cfg.counts;
        assert_eq!((c.testing_paths, c.training_paths, c.training_sets, c.weeks, c.horizon), (30, 25, 5, 27, 7));
    }

    #[test]
    fn out_of_range_fee_is_rejected() {
        let err = ExperimentConfig::from_toml("[costs]\ncancellation_fee = 1.5\n").unwrap_err().to_string();
        assert!(err.contains("costs.cancellation_fee"), "{err}");
    }

    #[test]
    fn indivisible_training_sets_are_rejected() {
        let err = ExperimentConfig::from_toml("[counts]\ntraining_paths = 25\ntraining_sets = 4\n").unwrap_err().to_string();
        assert!(err.contains("divisible"), "{err}");
    }

    #[test]
    fn every_failure_is_listed() {
        let text = "[costs]\ncancellation_fee = 2.0\npremium = -1.0\n[counts]\nweeks = 0\n";
        match ExperimentConfig::from_toml(text).unwrap_err() {
            Error::Config(errs) => assert_eq!(errs.len(), 3, "{errs:?}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("colour = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("[costs]\npremuim = 1.0\n").is_err());
        assert!(ExperimentConfig::from_toml("scenario = \"nope\"\n").is_err());
    }

    #[test]
    fn file_overrides_preset() {
        let cfg = ExperimentConfig::from_toml("scenario = \"higher_peak\"\n[simulator]\nwindow_weeks = 2\n").unwrap();
        assert_eq!(cfg.simulator.peak_factor, 1.7);
        assert_eq!(cfg.robust.step_scale, 5.0);
        assert_eq!(cfg.simulator.window_weeks, 2);
    }

    #[test]
    fn custom_secondment_round_trips() {
        let text = "network = \"fully_connected\"\n[secondment]\ncustom = [[1,1,1,1],[1,1,3,1],[1,3,1,1],[1,1,1,1]]\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let net = cfg.network_config(Network::FullyConnected);
        assert_eq!(net.secondment[1][2], 3);
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn missing_frozen_paths_are_rejected() {
        let err = ExperimentConfig::from_toml("freeze_paths = \"/no/such/file.csv\"\n").unwrap_err().to_string();
        assert!(err.contains("freeze_paths"), "{err}");
    }

    #[test]
    fn simulator_block_reproduces_the_shipped_generator() {
        assert_eq!(ExperimentConfig::default().simulator_config(), SimulatorConfig::four_site(1.5));
    }
}
