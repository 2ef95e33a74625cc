use serde::{Deserialize, Serialize};

use super::cost::mu;
use super::flows::ArcFlows;
use super::network::NetworkConfig;

/// Nurses away from home at the start of a day, by origin, destination and
/// remaining away-days `k` in `1..=depth`. A nurse with `k` remaining days is
/// away on the current day and the `k - 1` days after it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondmentState {
    n: usize,
    depth: usize,
    z: Vec<f64>,
}

impl SecondmentState {
    /// Empty state for `n` locations and longest secondment `max_secondment`.
    pub fn empty(n: usize, max_secondment: u32) -> Self {
        let depth = max_secondment.saturating_sub(1) as usize;
        SecondmentState { n, depth, z: vec![0.0; n * n * depth] }
    }

    pub fn for_network(net: &NetworkConfig) -> Self {
        Self::empty(net.num_locations(), net.max_secondment())
    }

    pub fn locations(&self) -> usize {
        self.n
    }

    /// Largest tracked remaining-day count (longest secondment minus one).
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.depth);
        (i * self.n + j) * self.depth + (k - 1)
    }

    /// Count with exactly `k` remaining days; zero outside the tracked range.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        if k == 0 || k > self.depth {
            0.0
        } else {
            self.z[self.idx(i, j, k)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.idx(i, j, k);
        self.z[idx] = v;
    }

    pub fn is_empty(&self) -> bool {
        self.z.iter().all(|&v| v == 0.0)
    }

    /// Nurses of `i` still away on the day `offset` days from now.
    pub fn away_from(&self, i: usize, offset: usize) -> f64 {
        (0..self.n).map(|j| self.remaining_on_arc(i, j, offset)).sum()
    }

    /// Nurses of other locations still at `i` on the day `offset` days from now.
    pub fn hosted_at(&self, i: usize, offset: usize) -> f64 {
        (0..self.n).map(|j| self.remaining_on_arc(j, i, offset)).sum()
    }

    fn remaining_on_arc(&self, i: usize, j: usize, offset: usize) -> f64 {
        ((offset + 1)..=self.depth).map(|k| self.get(i, j, k)).sum()
    }

    /// Nurses physically working at `i` today after executing `action`.
    pub fn on_site(&self, capacity: &[u32], action: &ArcFlows, i: usize) -> f64 {
        capacity[i] as f64 - self.away_from(i, 0) - action.out_of(i) + self.hosted_at(i, 0) + action.into(i)
    }

    /// Nurses of `i` available to send today.
    pub fn available(&self, capacity: &[u32], i: usize) -> f64 {
        capacity[i] as f64 - self.away_from(i, 0)
    }

    /// State at the start of day `t + 1` after executing `action` on day `t`.
    pub fn advance(&self, net: &NetworkConfig, action: &ArcFlows, t: u32, horizon: u32) -> SecondmentState {
        let mut next = SecondmentState { n: self.n, depth: self.depth, z: vec![0.0; self.z.len()] };
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                for k in 1..=self.depth {
                    let mut v = self.get(i, j, k + 1);
                    let b = action.get(i, j);
                    if b != 0.0 && mu(net, i, j, t, horizon) as usize == k + 1 {
                        v += b;
                    }
                    if v != 0.0 {
                        next.set(i, j, k, v);
                    }
                }
            }
        }
        next
    }
}

/// Demand minus on-site staff at each location for day `t`, from the state.
pub fn imbalance(state: &SecondmentState, action: &ArcFlows, demand: &[f64], capacity: &[u32]) -> Vec<f64> {
    (0..state.locations()).map(|i| demand[i] - state.on_site(capacity, action, i)).collect()
}

/// Same quantity computed from the full deployment history `actions[0..t]`
/// (days `1..=t`) through secondment windows, without a state.
pub fn imbalance_from_history(
    net: &NetworkConfig,
    actions: &[ArcFlows],
    demand: &[f64],
    capacity: &[u32],
    horizon: u32,
) -> Vec<f64> {
    let t = actions.len();
    let n = net.num_locations();
    let mut staff: Vec<f64> = capacity.iter().map(|&k| k as f64).collect();
    for (day0, b) in actions.iter().enumerate() {
        for (i, j, v) in b.nonzero() {
            let len = mu(net, i, j, day0 as u32 + 1, horizon) as usize;
            if day0 + len >= t {
                staff[i] -= v;
                staff[j] += v;
            }
        }
    }
    (0..n).map(|i| demand[i] - staff[i]).collect()
}

/// A location-day at which the rolling capacity window is exceeded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityViolation {
    pub location: usize,
    /// 1-based day.
    pub day: u32,
    pub committed: f64,
    pub capacity: f64,
}

/// Checks that the nurses of each location sent out and still away never
/// exceed its capacity. `decisions[d]` holds day `d + 1`.
pub fn validate_capacity(net: &NetworkConfig, capacity: &[u32], decisions: &[ArcFlows]) -> Vec<CapacityViolation> {
    validate_capacity_from(net, capacity, &SecondmentState::for_network(net), decisions, 1, decisions.len() as u32)
}

/// [`validate_capacity`] starting mid-horizon at day `first_day` with
/// secondments already under way in `state`.
pub fn validate_capacity_from(
    net: &NetworkConfig,
    capacity: &[u32],
    state: &SecondmentState,
    decisions: &[ArcFlows],
    first_day: u32,
    horizon: u32,
) -> Vec<CapacityViolation> {
    const TOL: f64 = 1e-9;
    let n = net.num_locations();
    let mut out = Vec::new();
    for t in 0..decisions.len() {
        for i in 0..n {
            let mut committed = state.away_from(i, t);
            for (m, d) in decisions.iter().enumerate().take(t + 1) {
                for j in 0..n {
                    let v = d.get(i, j);
                    if v != 0.0 {
                        let len = mu(net, i, j, first_day + m as u32, horizon.max(first_day + m as u32)) as usize;
                        if m + len > t {
                            committed += v;
                        }
                    }
                }
            }
            if committed > capacity[i] as f64 + TOL {
                out.push(CapacityViolation {
                    location: i,
                    day: first_day + t as u32,
                    committed,
                    capacity: capacity[i] as f64,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_site(omega: u32) -> NetworkConfig {
        let mut net = NetworkConfig::four_site().with_links(&[(0, 1)]);
        net.secondment[0][1] = omega;
        net.secondment[1][0] = omega;
        net
    }

    #[test]
    fn one_day_arcs_leave_no_carryover() {
        let net = NetworkConfig::four_site().hub_and_spoke(3);
        let s = SecondmentState::for_network(&net);
        assert_eq!(s.depth(), 0);
        let mut b = ArcFlows::zeros(4);
        b.set(0, 3, 5.0);
        assert!(s.advance(&net, &b, 1, 7).is_empty());
    }

    #[test]
    fn two_day_secondment_then_release() {
        let net = two_site(2);
        let s = SecondmentState::for_network(&net);
        let mut b = ArcFlows::zeros(4);
        b.set(0, 1, 3.0);
        let s2 = s.advance(&net, &b, 1, 7);
        assert_eq!(s2.get(0, 1, 1), 3.0);
        let s3 = s2.advance(&net, &ArcFlows::zeros(4), 2, 7);
        assert!(s3.is_empty());
    }

    #[test]
    fn imbalance_small_example() {
        let mut net = NetworkConfig::four_site().with_links(&[(0, 1)]);
        net.names.truncate(2);
        net.distance = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        net.transfer_bonus = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        net.secondment = vec![vec![1, 1], vec![1, 1]];
        net.arc_allowed = vec![vec![false, true], vec![true, false]];
        net.capacity = vec![5, 5];
        let s = SecondmentState::for_network(&net);
        let mut b = ArcFlows::zeros(2);
        b.set(1, 0, 2.0);
        let d = imbalance(&s, &b, &[7.0, 2.0], &net.capacity);
        assert_eq!(d, vec![0.0, -1.0]);
        let none = imbalance(&s, &ArcFlows::zeros(2), &[7.0, 2.0], &net.capacity);
        assert_eq!(none, vec![2.0, -3.0]);
    }

    #[test]
    fn capacity_window_violation() {
        let net = two_site(2);
        let cap = vec![1, 5, 5, 5];
        let mut d1 = ArcFlows::zeros(4);
        d1.set(0, 1, 1.0);
        let v = validate_capacity(&net, &cap, &[d1.clone(), d1.clone()]);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].location, v[0].day), (0, 2));
        assert!(validate_capacity(&net, &cap, &[]).is_empty());
    }

    #[test]
    fn at_capacity_with_one_day_arcs_is_feasible() {
        let net = two_site(1);
        let cap = vec![2, 5, 5, 5];
        let mut d = ArcFlows::zeros(4);
        d.set(0, 1, 2.0);
        assert!(validate_capacity(&net, &cap, &vec![d; 7]).is_empty());
    }

    /// Random feasible trajectory: each day sends a random share of the
    /// available nurses along random allowed arcs.
    fn random_trajectory(rng: &mut ChaCha8Rng, net: &NetworkConfig, horizon: u32) -> Vec<ArcFlows> {
        let n = net.num_locations();
        let mut state = SecondmentState::for_network(net);
        let mut actions = Vec::new();
        for t in 1..=horizon {
            let mut b = ArcFlows::zeros(n);
            for i in 0..n {
                let mut avail = state.available(&net.capacity, i).floor() as i64;
                for j in 0..n {
                    if net.is_allowed(i, j) && avail > 0 {
                        let send = rng.random_range(0..=avail);
                        b.set(i, j, send as f64);
                        avail -= send;
                    }
                }
            }
            state = state.advance(net, &b, t, horizon);
            actions.push(b);
        }
        actions
    }

    fn random_network(rng: &mut ChaCha8Rng, n: usize, horizon: u32) -> NetworkConfig {
        let mut net = NetworkConfig::four_site();
        net.names.truncate(n);
        net.distance = vec![vec![0.0; n]; n];
        net.transfer_bonus = vec![vec![1.0; n]; n];
        net.secondment = vec![vec![1; n]; n];
        net.arc_allowed = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    net.arc_allowed[i][j] = rng.random_bool(0.7);
                    net.secondment[i][j] = rng.random_range(1..=horizon.min(3));
                }
            }
        }
        net.capacity = (0..n).map(|_| rng.random_range(0..6)).collect();
        net
    }

    #[test]
    fn state_and_history_forms_agree_on_random_trajectories() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.random_range(2..=4);
            let horizon = rng.random_range(1..=7);
            let net = random_network(&mut rng, n, horizon);
            let actions = random_trajectory(&mut rng, &net, horizon);
            let mut state = SecondmentState::for_network(&net);
            for (d, b) in actions.iter().enumerate() {
                let t = d as u32 + 1;
                let demand: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
                let a = imbalance(&state, b, &demand, &net.capacity);
                let h = imbalance_from_history(&net, &actions[..=d], &demand, &net.capacity, horizon);
                assert_eq!(a, h);
                // conservation: total on-site staff equals total capacity
                let on_site: f64 = (0..n).map(|i| state.on_site(&net.capacity, b, i)).sum();
                let total: f64 = net.capacity.iter().map(|&k| k as f64).sum();
                assert_eq!(on_site, total);
                state = state.advance(&net, b, t, horizon);
            }
            assert!(state.is_empty(), "secondments must end with the horizon");
            assert!(validate_capacity(&net, &net.capacity, &actions).is_empty());
        }
    }
}
