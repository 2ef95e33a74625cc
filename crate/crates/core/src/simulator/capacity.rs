use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::uncertainty::DemandPath;

/// Weekly staffing adjustment: capacity moves by `up · b_i · D` when the
/// weekly mean demand rose by `D`, by `down · b_i · D` when it fell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityParams {
    /// Capacity of the first two weeks.
    pub initial: Vec<f64>,
    /// `b_i`.
    pub adjustment: Vec<f64>,
    pub up: f64,
    pub down: f64,
}

impl CapacityParams {
    pub fn four_site() -> Self {
        CapacityParams {
            initial: vec![40.0, 120.0, 110.0, 130.0],
            adjustment: vec![0.11, 0.17, 0.17, 0.115],
            up: 2.0,
            down: 0.8,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.initial.len() != self.adjustment.len() {
            errs.push("capacity.initial and capacity.adjustment must have one entry per location".into());
        }
        if self.initial.iter().chain(&self.adjustment).chain([&self.up, &self.down]).any(|&v| !(v >= 0.0 && v.is_finite())) {
            errs.push("capacity parameters must be finite and nonnegative".into());
        }
        errs
    }
}

/// Integer nurse capacity per week and location.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacitySchedule {
    /// `weekly[w][i]`, week `w + 1`.
    pub weekly: Vec<Vec<u32>>,
}

impl CapacitySchedule {
    /// Capacity of 1-based `week`.
    pub fn week(&self, week: usize) -> &[u32] {
        &self.weekly[week - 1]
    }

    pub fn weeks(&self) -> usize {
        self.weekly.len()
    }
}

/// Capacity for weeks `1..=weeks` from the demand of days `1..=weeks·period`
/// (only the first `(weeks − 1)·period` days are read). Levels are kept
/// fractional internally and rounded on output.
pub fn generate_capacity(demand: &DemandPath, params: &CapacityParams, weeks: usize, period: usize) -> Result<CapacitySchedule> {
    let l = params.initial.len();
    if demand.locations() != l {
        return Err(invalid(format!("demand has {} locations, capacity parameters {l}", demand.locations())));
    }
    if weeks > 2 && demand.horizon() < (weeks - 1) * period {
        return Err(invalid(format!("capacity for {weeks} weeks needs {} days of demand", (weeks - 1) * period)));
    }
    let weekly_mean = |w: usize, i: usize| (0..period).map(|d| demand.get((w - 1) * period + d, i)).sum::<f64>() / period as f64;
    let mut level = params.initial.clone();
    let mut weekly = Vec::with_capacity(weeks);
    for w in 1..=weeks {
        if w >= 3 {
            for i in 0..l {
                let diff = weekly_mean(w - 1, i) - weekly_mean(w - 2, i);
                let step = if diff >= 0.0 { params.up } else { params.down };
                level[i] = (level[i] + step * params.adjustment[i] * diff).max(0.0);
            }
        }
        weekly.push(level.iter().map(|&c| c.round() as u32).collect());
    }
    Ok(CapacitySchedule { weekly })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weekly_demand(levels: &[[f64; 4]]) -> DemandPath {
        DemandPath::new(levels.iter().flat_map(|w| std::iter::repeat_n(w.to_vec(), 7)).collect()).unwrap()
    }

    #[test]
    fn flat_demand_keeps_initial_capacity() {
        let d = weekly_demand(&[[50.0, 60.0, 70.0, 140.0]; 5]);
        let c = generate_capacity(&d, &CapacityParams::four_site(), 5, 7).unwrap();
        assert!(c.weekly.iter().all(|w| w == &vec![40, 120, 110, 130]));
    }

    #[test]
    fn rise_and_fall_are_asymmetric() {
        let d = weekly_demand(&[[0.0; 4], [10.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0; 4]]);
        let p = CapacityParams { initial: vec![40.0; 4], adjustment: vec![0.5; 4], up: 2.0, down: 0.8 };
        let c = generate_capacity(&d, &p, 4, 7).unwrap();
        assert_eq!(c.week(3)[0], 50);
        assert_eq!(c.week(4)[0], 46);
        assert_eq!(c.week(4)[1], 40);
    }

    #[test]
    fn increase_scales_with_adjustment() {
        let d = weekly_demand(&[[50.0, 60.0, 70.0, 140.0], [60.0, 60.0, 70.0, 140.0], [60.0, 60.0, 70.0, 140.0]]);
        let c = generate_capacity(&d, &CapacityParams::four_site(), 3, 7).unwrap();
        // 40 + 2 · 0.11 · 10
        assert_eq!(c.week(3), &[42, 120, 110, 130]);
    }
}
