//! Shipped scenario presets.

use super::config::{DistanceBonus, ExperimentConfig, Transitions};

pub const PRESETS: [&str; 6] =
    ["baseline", "special_one_shortage", "low_transfer_cost", "higher_peak", "six_week_window", "estimated_transitions"];

/// The named preset, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let mut cfg = ExperimentConfig { scenario: name.to_string(), ..ExperimentConfig::default() };
    match name {
        "baseline" => {}
        // Only West runs short: Central settles well below its capacity.
        "special_one_shortage" => cfg.simulator.site_levels[3] = 180.0,
        "low_transfer_cost" => cfg.sites.distance_bonus = Some(DistanceBonus { min: 0.1, per_mile: 0.01 }),
        "higher_peak" => {
            cfg.simulator.peak_factor = 1.7;
            cfg.robust.step_scale = 5.0;
        }
        "six_week_window" => {
            cfg.simulator.window_weeks = 6;
            cfg.simulator.warmup_days = 42;
        }
        "estimated_transitions" => cfg.simulator.transitions = Transitions::Estimated,
        _ => return None,
    }
    Some(cfg)
}
