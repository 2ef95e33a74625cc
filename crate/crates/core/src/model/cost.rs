use serde::{Deserialize, Serialize};

use super::flows::ArcFlows;
use super::network::NetworkConfig;
use crate::error::{invalid, Result};

/// Wage, penalty and fee parameters of the transfer cost model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Daily premium for working away from home.
    pub premium: f64,
    /// Emergency premium multiplier, one entry per day of the horizon.
    pub emergency_multiplier: Vec<f64>,
    /// Fraction of the planned value charged when a plan is cancelled.
    pub cancellation_fee: f64,
    /// Shortage penalty per nurse-day, indexed `[day][location]`.
    pub shortage_cost: Vec<Vec<f64>>,
    /// Weekly charge when any deployment bypasses the hub; applied by the
    /// evaluator, not optimized by the planner.
    #[serde(default)]
    pub coordination_cost: f64,
}

impl CostParams {
    pub fn uniform(days: usize, locations: usize, premium: f64, multiplier: f64, fee: f64, shortage: f64) -> Self {
        CostParams {
            premium,
            emergency_multiplier: vec![multiplier; days],
            cancellation_fee: fee,
            shortage_cost: vec![vec![shortage; locations]; days],
            coordination_cost: 0.0,
        }
    }

    /// p = 1, θ = 1.6, η = 0.05, s = 15.
    pub fn calibrated(days: usize, locations: usize) -> Self {
        Self::uniform(days, locations, 1.0, 1.6, 0.05, 15.0)
    }

    pub fn days(&self) -> usize {
        self.emergency_multiplier.len()
    }

    pub fn validate(&self, locations: usize) -> Result<()> {
        let errs = self.violations(locations);
        if errs.is_empty() {
            Ok(())
        } else {
            Err(invalid(errs.join("; ")))
        }
    }

    pub fn violations(&self, locations: usize) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.premium > 0.0 && self.premium.is_finite()) {
            errs.push("premium must be positive".into());
        }
        if self.emergency_multiplier.iter().any(|&m| !(m >= 1.0 && m.is_finite())) {
            errs.push("emergency_multiplier entries must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.cancellation_fee) {
            errs.push("cancellation_fee must lie in [0, 1]".into());
        }
        if self.shortage_cost.len() != self.emergency_multiplier.len() {
            errs.push("shortage_cost must have one row per horizon day".into());
        }
        if self.shortage_cost.iter().any(|row| row.len() != locations) {
            errs.push(format!("shortage_cost rows must have {locations} entries"));
        }
        if self.shortage_cost.iter().flatten().any(|&s| !(s >= 0.0 && s.is_finite())) {
            errs.push("shortage_cost entries must be finite and nonnegative".into());
        }
        if !(self.coordination_cost >= 0.0) {
            errs.push("coordination_cost must be nonnegative".into());
        }
        errs
    }

    /// True when every shortage penalty beats the costliest emergency transfer,
    /// so sending an idle nurse is always preferred to leaving a gap.
    pub fn prefers_emergency_over_shortage(&self, net: &NetworkConfig) -> bool {
        let horizon = self.days() as u32;
        (0..self.days()).all(|t| {
            let worst = net
                .arcs()
                .iter()
                .map(|a| {
                    let mu = net.secondment[a.from][a.to].min(horizon - t as u32) as f64;
                    self.emergency_multiplier[t] * self.premium * mu + net.transfer_bonus[a.from][a.to]
                })
                .fold(0.0, f64::max);
            self.shortage_cost[t].iter().all(|&s| s > worst)
        })
    }
}

/// Planning horizon: `days` per week-long horizon, `weeks` horizons in a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonConfig {
    pub days: u32,
    pub weeks: u32,
}

impl HorizonConfig {
    pub fn validate(&self, net: &NetworkConfig) -> Result<()> {
        if self.days < 1 {
            return Err(invalid("horizon must span at least one day"));
        }
        if net.max_secondment() > self.days {
            return Err(invalid(format!(
                "longest secondment ({}) exceeds horizon length ({})",
                net.max_secondment(),
                self.days
            )));
        }
        Ok(())
    }
}

/// Days a nurse sent on arc (i, j) at day `t` (1-based) stays away:
/// the nominal secondment, truncated at the end of the horizon.
pub fn secondment_length(net: &NetworkConfig, i: usize, j: usize, t: u32, horizon: u32) -> Result<u32> {
    if !net.is_allowed(i, j) {
        return Err(invalid(format!("arc {i}->{j} is not allowed")));
    }
    if t < 1 || t > horizon {
        return Err(invalid(format!("day {t} outside horizon 1..={horizon}")));
    }
    Ok(mu(net, i, j, t, horizon))
}

/// Unchecked secondment length for internal loops over allowed arcs.
pub(crate) fn mu(net: &NetworkConfig, i: usize, j: usize, t: u32, horizon: u32) -> u32 {
    net.secondment[i][j].min(horizon + 1 - t)
}

/// Premium over the secondment plus the bonus, for one planned nurse.
pub(crate) fn planned_unit_cost(net: &NetworkConfig, costs: &CostParams, i: usize, j: usize, t: u32, horizon: u32) -> f64 {
    costs.premium * mu(net, i, j, t, horizon) as f64 + net.transfer_bonus[i][j]
}

/// Same as [`planned_unit_cost`] with the emergency multiplier on the premium.
pub(crate) fn emergency_unit_cost(net: &NetworkConfig, costs: &CostParams, i: usize, j: usize, t: u32, horizon: u32) -> f64 {
    costs.emergency_multiplier[t as usize - 1] * costs.premium * mu(net, i, j, t, horizon) as f64
        + net.transfer_bonus[i][j]
}

/// Cost of the plan made for day `t`.
pub fn planned_cost(net: &NetworkConfig, costs: &CostParams, plan: &ArcFlows, t: u32, horizon: u32) -> f64 {
    net.arcs()
        .iter()
        .map(|a| planned_unit_cost(net, costs, a.from, a.to, t, horizon) * plan.get(a.from, a.to))
        .sum()
}

/// Deployment cost of one day, split by component.
///
/// `cancellation` keeps the `(η − 1)` factor and is therefore a refund
/// (negative). Added to the planned cost it leaves exactly the η fee on the
/// cancelled part of the plan; see [`DeploymentCost::cancellation_fee_paid`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DeploymentCost {
    pub emergency: f64,
    pub cancellation: f64,
    pub shortage: f64,
    /// Planned value (premium plus bonus) of the cancelled transfers.
    pub cancelled_value: f64,
}

impl DeploymentCost {
    pub fn total(&self) -> f64 {
        self.emergency + self.cancellation + self.shortage
    }

    /// Net charge for cancelling once the planned cost is netted out.
    pub fn cancellation_fee_paid(&self) -> f64 {
        self.cancelled_value + self.cancellation
    }
}

pub fn deployment_cost(
    net: &NetworkConfig,
    costs: &CostParams,
    plan: &ArcFlows,
    action: &ArcFlows,
    imbalance: &[f64],
    t: u32,
    horizon: u32,
) -> DeploymentCost {
    let mut out = DeploymentCost::default();
    for a in net.arcs() {
        let diff = action.get(a.from, a.to) - plan.get(a.from, a.to);
        if diff > 0.0 {
            out.emergency += emergency_unit_cost(net, costs, a.from, a.to, t, horizon) * diff;
        } else if diff < 0.0 {
            let value = planned_unit_cost(net, costs, a.from, a.to, t, horizon) * -diff;
            out.cancelled_value += value;
            out.cancellation += (costs.cancellation_fee - 1.0) * value;
        }
    }
    let shortage = &costs.shortage_cost[t as usize - 1];
    out.shortage = imbalance.iter().zip(shortage).map(|(&d, &s)| s * d.max(0.0)).sum();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_costs(days: usize) -> CostParams {
        CostParams::calibrated(days, 4)
    }

    #[test]
    fn secondment_length_truncates_at_horizon_end() {
        let net = NetworkConfig::four_site();
        assert_eq!(secondment_length(&net, 0, 1, 1, 7).unwrap(), 2);
        assert_eq!(secondment_length(&net, 0, 3, 7, 7).unwrap(), 1);
        let mut long = net.clone();
        long.secondment[0][1] = 3;
        assert_eq!(secondment_length(&long, 0, 1, 6, 7).unwrap(), 2);
    }

    #[test]
    fn secondment_length_errors() {
        let net = NetworkConfig::four_site().hub_and_spoke(3);
        assert!(secondment_length(&net, 0, 1, 1, 7).is_err());
        assert!(secondment_length(&net, 0, 3, 0, 7).is_err());
        assert!(secondment_length(&net, 0, 3, 8, 7).is_err());
    }

    #[test]
    fn planned_cost_examples() {
        let net = NetworkConfig::four_site();
        let costs = unit_costs(7);
        let mut a = ArcFlows::zeros(4);
        a.set(0, 3, 1.0);
        assert!((planned_cost(&net, &costs, &a, 1, 7) - 2.20).abs() < 1e-12);
        assert_eq!(planned_cost(&net, &costs, &ArcFlows::zeros(4), 1, 7), 0.0);
        let mut east = ArcFlows::zeros(4);
        east.set(0, 1, 1.0);
        assert!((planned_cost(&net, &costs, &east, 7, 7) - 2.46).abs() < 1e-12);
    }

    #[test]
    fn deployment_cost_components() {
        let net = NetworkConfig::four_site();
        let costs = unit_costs(7);
        let zero = ArcFlows::zeros(4);
        let mut one = ArcFlows::zeros(4);
        one.set(0, 3, 1.0);

        let same = deployment_cost(&net, &costs, &one, &one, &[-1.0; 4], 1, 7);
        assert_eq!(same.total(), 0.0);

        let emergency = deployment_cost(&net, &costs, &zero, &one, &[0.0; 4], 1, 7);
        assert!((emergency.emergency - 2.80).abs() < 1e-12);

        let cancelled = deployment_cost(&net, &costs, &one, &zero, &[0.0; 4], 1, 7);
        assert!((cancelled.cancellation + 2.09).abs() < 1e-12);
        let planned = planned_cost(&net, &costs, &one, 1, 7);
        assert!((planned + cancelled.cancellation - 0.11).abs() < 1e-12);
        assert!((cancelled.cancellation_fee_paid() - 0.05 * 2.20).abs() < 1e-12);
    }

    #[test]
    fn shortage_only_counts_positive_imbalance() {
        let net = NetworkConfig::four_site();
        let costs = unit_costs(7);
        let z = ArcFlows::zeros(4);
        let c = deployment_cost(&net, &costs, &z, &z, &[2.0, -3.0, 0.5, 0.0], 3, 7);
        assert!((c.shortage - 15.0 * 2.5).abs() < 1e-12);
    }

    #[test]
    fn calibrated_shortage_beats_emergency() {
        let net = NetworkConfig::four_site();
        assert!(unit_costs(7).prefers_emergency_over_shortage(&net));
        let cheap = CostParams::uniform(7, 4, 1.0, 1.6, 0.05, 2.0);
        assert!(!cheap.prefers_emergency_over_shortage(&net));
    }

    #[test]
    fn validation_flags_fee_out_of_range() {
        let mut c = unit_costs(7);
        c.cancellation_fee = 1.5;
        assert!(c.validate(4).is_err());
        c.cancellation_fee = 0.05;
        c.emergency_multiplier[2] = 0.9;
        assert!(c.validate(4).is_err());
    }
}
