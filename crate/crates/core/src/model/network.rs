use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Directed transfer arc between two distinct locations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
}

/// Hospital network: distances, transfer bonuses, secondment lengths, the
/// allowed-arc mask and the nurse capacity at each location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub names: Vec<String>,
    /// Miles, symmetric with zero diagonal.
    pub distance: Vec<Vec<f64>>,
    /// One-time bonus paid per transferred nurse.
    pub transfer_bonus: Vec<Vec<f64>>,
    /// Minimum stay (days) at the destination.
    pub secondment: Vec<Vec<u32>>,
    pub arc_allowed: Vec<Vec<bool>>,
    pub capacity: Vec<u32>,
}

/// Secondment-length presets used in the network and secondment experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondmentScenario {
    /// Hub arcs one day, spoke-to-spoke arcs two days.
    Baseline,
    OneDay,
    /// Hub arcs one day, spoke-to-spoke arcs three days.
    ThreeDay,
    /// Hub arcs one day, spoke-to-spoke arcs seven days.
    SevenDay,
}

impl SecondmentScenario {
    pub fn spoke_length(self) -> u32 {
        match self {
            SecondmentScenario::Baseline => 2,
            SecondmentScenario::OneDay => 1,
            SecondmentScenario::ThreeDay => 3,
            SecondmentScenario::SevenDay => 7,
        }
    }
}

impl NetworkConfig {
    /// Four-site network (West, East, South, Central) with the calibrated
    /// distances, bonuses and baseline secondments; all arcs allowed.
    pub fn four_site() -> Self {
        let names = ["West", "East", "South", "Central"].map(String::from).to_vec();
        let distance = vec![
            vec![0.0, 88.0, 110.0, 62.0],
            vec![88.0, 0.0, 112.0, 56.0],
            vec![110.0, 112.0, 0.0, 52.0],
            vec![62.0, 56.0, 52.0, 0.0],
        ];
        let transfer_bonus = vec![
            vec![0.0, 1.46, 1.68, 1.20],
            vec![1.46, 0.0, 1.70, 1.14],
            vec![1.68, 1.70, 0.0, 1.10],
            vec![1.20, 1.14, 1.10, 0.0],
        ];
        let secondment = vec![
            vec![1, 2, 2, 1],
            vec![2, 1, 2, 1],
            vec![2, 2, 1, 1],
            vec![1, 1, 1, 1],
        ];
        let mut net = NetworkConfig {
            names,
            distance,
            transfer_bonus,
            secondment,
            arc_allowed: vec![vec![true; 4]; 4],
            capacity: vec![40, 120, 110, 130],
        };
        for i in 0..4 {
            net.arc_allowed[i][i] = false;
        }
        net
    }

    pub fn num_locations(&self) -> usize {
        self.names.len()
    }

    /// Allowed arcs in row-major order.
    pub fn arcs(&self) -> Vec<Arc> {
        let n = self.num_locations();
        let mut arcs = Vec::new();
        for from in 0..n {
            for to in 0..n {
                if from != to && self.arc_allowed[from][to] {
                    arcs.push(Arc { from, to });
                }
            }
        }
        arcs
    }

    pub fn is_allowed(&self, i: usize, j: usize) -> bool {
        i != j && i < self.num_locations() && j < self.num_locations() && self.arc_allowed[i][j]
    }

    /// Longest secondment over allowed arcs (at least 1).
    pub fn max_secondment(&self) -> u32 {
        self.arcs().iter().map(|a| self.secondment[a.from][a.to]).max().unwrap_or(1).max(1)
    }

    /// Restrict transfers to arcs touching `hub`.
    pub fn hub_and_spoke(mut self, hub: usize) -> Self {
        let n = self.num_locations();
        for i in 0..n {
            for j in 0..n {
                self.arc_allowed[i][j] = i != j && (i == hub || j == hub);
            }
        }
        self
    }

    pub fn fully_connected(mut self) -> Self {
        let n = self.num_locations();
        for i in 0..n {
            for j in 0..n {
                self.arc_allowed[i][j] = i != j;
            }
        }
        self
    }

    /// Keep only the listed undirected links.
    pub fn with_links(mut self, links: &[(usize, usize)]) -> Self {
        let n = self.num_locations();
        self.arc_allowed = vec![vec![false; n]; n];
        for &(i, j) in links {
            if i != j && i < n && j < n {
                self.arc_allowed[i][j] = true;
                self.arc_allowed[j][i] = true;
            }
        }
        self
    }

    /// Hub-incident arcs get one day, spoke-to-spoke arcs the scenario length.
    pub fn with_secondment_scenario(mut self, hub: usize, scenario: SecondmentScenario) -> Self {
        let n = self.num_locations();
        for i in 0..n {
            for j in 0..n {
                self.secondment[i][j] = if i == j || i == hub || j == hub {
                    1
                } else {
                    scenario.spoke_length()
                };
            }
        }
        self
    }

    /// Bonus grows linearly with distance from `min_bonus` at the closest pair.
    pub fn with_distance_bonus(mut self, min_bonus: f64, per_mile: f64) -> Self {
        let n = self.num_locations();
        let mut closest = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    closest = closest.min(self.distance[i][j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                self.transfer_bonus[i][j] =
                    if i == j { 0.0 } else { min_bonus + per_mile * (self.distance[i][j] - closest) };
            }
        }
        self
    }

    pub fn with_capacity(mut self, capacity: Vec<u32>) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let errors = self.violations();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(invalid(errors.join("; ")))
        }
    }

    /// Every invariant violation, as readable messages.
    pub fn violations(&self) -> Vec<String> {
        let n = self.num_locations();
        let mut errs = Vec::new();
        if n == 0 {
            errs.push("network has no locations".to_string());
            return errs;
        }
        let square = |name: &str, rows: usize, cols: &dyn Fn(usize) -> usize, errs: &mut Vec<String>| {
            if rows != n || (0..rows).any(|r| cols(r) != n) {
                errs.push(format!("{name} must be {n}x{n}"));
                false
            } else {
                true
            }
        };
        let ok = square("distance", self.distance.len(), &|r| self.distance[r].len(), &mut errs)
            & square("transfer_bonus", self.transfer_bonus.len(), &|r| self.transfer_bonus[r].len(), &mut errs)
            & square("secondment", self.secondment.len(), &|r| self.secondment[r].len(), &mut errs)
            & square("arc_allowed", self.arc_allowed.len(), &|r| self.arc_allowed[r].len(), &mut errs);
        if self.capacity.len() != n {
            errs.push(format!("capacity must have {n} entries"));
        }
        if !ok {
            return errs;
        }
        for i in 0..n {
            if self.distance[i][i] != 0.0 {
                errs.push(format!("distance[{i}][{i}] must be 0"));
            }
            if self.arc_allowed[i][i] {
                errs.push(format!("arc_allowed[{i}][{i}] must be false"));
            }
            for j in 0..n {
                let d = self.distance[i][j];
                if !(d >= 0.0 && d.is_finite()) || d != self.distance[j][i] {
                    errs.push(format!("distance[{i}][{j}] must be finite, nonnegative and symmetric"));
                }
                if !(self.transfer_bonus[i][j] >= 0.0 && self.transfer_bonus[i][j].is_finite()) {
                    errs.push(format!("transfer_bonus[{i}][{j}] must be finite and nonnegative"));
                }
                if i != j && self.arc_allowed[i][j] && self.secondment[i][j] < 1 {
                    errs.push(format!("secondment[{i}][{j}] must be at least 1 on an allowed arc"));
                }
            }
        }
        errs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_site_is_valid() {
        let net = NetworkConfig::four_site();
        net.validate().unwrap();
        assert_eq!(net.arcs().len(), 12);
        assert_eq!(net.max_secondment(), 2);
    }

    #[test]
    fn hub_and_spoke_keeps_hub_arcs_only() {
        let net = NetworkConfig::four_site().hub_and_spoke(3);
        let arcs = net.arcs();
        assert_eq!(arcs.len(), 6);
        assert!(arcs.iter().all(|a| a.from == 3 || a.to == 3));
        // spoke arcs are gone, so only one-day secondments remain
        assert_eq!(net.max_secondment(), 1);
    }

    #[test]
    fn distance_bonus_reproduces_calibrated_table() {
        let net = NetworkConfig::four_site();
        let recal = NetworkConfig::four_site().with_distance_bonus(1.1, 0.01);
        for i in 0..4 {
            for j in 0..4 {
                assert!((net.transfer_bonus[i][j] - recal.transfer_bonus[i][j]).abs() < 1e-9);
            }
        }
        let cheap = NetworkConfig::four_site().with_distance_bonus(0.1, 0.01);
        assert!((cheap.transfer_bonus[0][1] - 0.46).abs() < 1e-9);
    }

    #[test]
    fn secondment_scenarios() {
        let net = NetworkConfig::four_site().with_secondment_scenario(3, SecondmentScenario::SevenDay);
        assert_eq!(net.secondment[0][1], 7);
        assert_eq!(net.secondment[0][3], 1);
        assert_eq!(net.max_secondment(), 7);
    }

    #[test]
    fn rejects_asymmetric_distance() {
        let mut net = NetworkConfig::four_site();
        net.distance[0][1] = 5.0;
        assert!(net.validate().is_err());
    }
}
