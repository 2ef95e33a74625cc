use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

/// Inpatient units in acuity order: medical-surgical, progressive care, ICU.
pub const UNITS: usize = 3;
/// Outcome index of a discharge in a transition row.
pub const DISCHARGE: usize = 3;
pub const UNIT_NAMES: [&str; UNITS] = ["ms", "pcu", "icu"];

/// One row per unit: probabilities of moving to MS, PCU, ICU or discharge.
pub type TransitionMatrix = [[f64; UNITS + 1]; UNITS];

/// Tuned matrix used for the ground-truth simulations.
pub const ADJUSTED_TRANSITIONS: TransitionMatrix =
    [[0.05, 0.2, 0.1, 0.65], [0.25, 0.05, 0.1, 0.6], [0.5, 0.4, 0.05, 0.05]];

/// Matrix fitted to historical unit flows (a Monday).
pub const ESTIMATED_TRANSITIONS: TransitionMatrix = [
    [0.7675, 0.0125, 0.0124, 0.2076],
    [0.0852, 0.7463, 0.0258, 0.1427],
    [0.1044, 0.0596, 0.7849, 0.0511],
];

/// Share of new arrivals admitted to MS, PCU and ICU.
pub const ARRIVAL_SPLIT: [f64; UNITS] = [0.7659, 0.153, 0.0811];

/// Unit routing of a hospital network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    /// `q[i][u]`.
    pub arrival_split: Vec<[f64; UNITS]>,
    /// `p[i][y][u][v]` for day of week `y`.
    pub probs: Vec<Vec<TransitionMatrix>>,
}

impl TransitionModel {
    /// Same split and matrix at every location and day of the week.
    pub fn uniform(locations: usize, period: usize, split: [f64; UNITS], matrix: TransitionMatrix) -> Self {
        TransitionModel { arrival_split: vec![split; locations], probs: vec![vec![matrix; period]; locations] }
    }

    pub fn locations(&self) -> usize {
        self.arrival_split.len()
    }

    pub fn period(&self) -> usize {
        self.probs.first().map_or(0, Vec::len)
    }

    pub fn violations(&self) -> Vec<String> {
        const TOL: f64 = 1e-6;
        let mut errs = Vec::new();
        let bad = |v: f64| !(0.0..=1.0).contains(&v);
        if self.probs.len() != self.locations() || self.probs.iter().any(|p| p.len() != self.period()) {
            errs.push("transitions.probs must have one row of day tables per location".into());
        }
        for (i, q) in self.arrival_split.iter().enumerate() {
            if q.iter().any(|&v| bad(v)) || (q.iter().sum::<f64>() - 1.0).abs() > TOL {
                errs.push(format!("transitions.arrival_split[{i}] must be probabilities summing to 1"));
            }
        }
        for (i, days) in self.probs.iter().enumerate() {
            for (y, m) in days.iter().enumerate() {
                for (u, row) in m.iter().enumerate() {
                    if row.iter().any(|&v| bad(v)) || (row.iter().sum::<f64>() - 1.0).abs() > TOL {
                        errs.push(format!("transitions.probs[{i}][{y}][{u}] must be probabilities summing to 1"));
                    }
                }
            }
        }
        errs
    }

    /// Mean transition matrix over the week at location `i`.
    pub fn weekly_mean(&self, i: usize) -> TransitionMatrix {
        let days = &self.probs[i];
        let mut out = [[0.0; UNITS + 1]; UNITS];
        for m in days {
            for u in 0..UNITS {
                for v in 0..=UNITS {
                    out[u][v] += m[u][v] / days.len() as f64;
                }
            }
        }
        out
    }
}

/// Patients per unit at each hospital at the start of a day.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusState {
    pub counts: Vec<[u64; UNITS]>,
}

impl CensusState {
    pub fn empty(locations: usize) -> Self {
        CensusState { counts: vec![[0; UNITS]; locations] }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Patient movements of one day.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayFlows {
    /// New patients per unit, `[i][u]`.
    pub admitted: Vec<[u64; UNITS]>,
    /// `moved[i][u][v]`: patients of unit `u` who stay (`v == u`), move to
    /// unit `v`, or are discharged (`v == DISCHARGE`).
    pub moved: Vec<[[u64; UNITS + 1]; UNITS]>,
}

impl DayFlows {
    pub fn discharged(&self) -> u64 {
        self.moved.iter().flat_map(|m| m.iter().map(|r| r[DISCHARGE])).sum()
    }

    pub fn admitted_total(&self) -> u64 {
        self.admitted.iter().flatten().sum()
    }
}

/// Multinomial draw by sequential binomials.
pub fn multinomial<R: Rng + ?Sized, const K: usize>(n: u64, probs: &[f64; K], rng: &mut R) -> [u64; K] {
    let mut out = [0u64; K];
    let mut left = n;
    let mut mass: f64 = probs.iter().sum();
    for k in 0..K {
        if left == 0 {
            break;
        }
        if k == K - 1 || mass <= probs[k] {
            out[k] = left;
            break;
        }
        let p = (probs[k] / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(left, p).expect("probability in [0, 1]").sample(rng);
        out[k] = draw;
        left -= draw;
        mass -= probs[k];
    }
    out
}

/// One day of patient flow: arrivals are split over units and every current
/// patient stays, moves or leaves according to the day's matrix.
pub fn census_step<R: Rng + ?Sized>(
    state: &CensusState,
    arrivals: &[u64],
    model: &TransitionModel,
    day_of_week: usize,
    rng: &mut R,
) -> (CensusState, DayFlows) {
    let l = state.counts.len();
    let mut next = CensusState::empty(l);
    let mut flows = DayFlows { admitted: vec![[0; UNITS]; l], moved: vec![[[0; UNITS + 1]; UNITS]; l] };
    for i in 0..l {
        let admitted = multinomial(arrivals[i], &model.arrival_split[i], rng);
        let matrix = &model.probs[i][day_of_week];
        for u in 0..UNITS {
            let moved = multinomial(state.counts[i][u], &matrix[u], rng);
            for v in 0..UNITS {
                next.counts[i][v] += moved[v];
            }
            flows.moved[i][u] = moved;
            next.counts[i][u] += admitted[u];
        }
        flows.admitted[i] = admitted;
    }
    (next, flows)
}

/// Census at the start of each day (`states[0] = initial`) and the flows
/// between consecutive days.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusTrajectory {
    pub states: Vec<CensusState>,
    pub flows: Vec<DayFlows>,
}

/// Runs [`census_step`] over `arrivals[t][i]`; day `t` uses day-of-week
/// `(first_day_of_week + t) % period`.
pub fn simulate_census<R: Rng + ?Sized>(
    initial: &CensusState,
    arrivals: &[Vec<u64>],
    model: &TransitionModel,
    first_day_of_week: usize,
    rng: &mut R,
) -> CensusTrajectory {
    let mut states = vec![initial.clone()];
    let mut flows = Vec::with_capacity(arrivals.len());
    for (t, a) in arrivals.iter().enumerate() {
        let dow = (first_day_of_week + t) % model.period();
        let (next, f) = census_step(states.last().expect("nonempty"), a, model, dow, rng);
        states.push(next);
        flows.push(f);
    }
    CensusTrajectory { states, flows }
}

/// Patients one nurse can cover in each unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NurseRatios {
    pub patients_per_nurse: [f64; UNITS],
}

impl Default for NurseRatios {
    fn default() -> Self {
        NurseRatios { patients_per_nurse: [5.0, 3.0, 2.0] }
    }
}

/// Nurses needed at each hospital for the given census.
pub fn nurse_demand(census: &CensusState, ratios: &NurseRatios) -> Vec<f64> {
    census
        .counts
        .iter()
        .map(|c| (0..UNITS).map(|u| c[u] as f64 / ratios.patients_per_nurse[u]).sum())
        .collect()
}

/// Expected census per unit under constant daily arrivals `rate` and a
/// fixed matrix, from `N = Λ + N P` by fixed-point iteration.
pub fn steady_state_census(rate: f64, split: &[f64; UNITS], matrix: &TransitionMatrix) -> [f64; UNITS] {
    let inflow: Vec<f64> = split.iter().map(|q| q * rate).collect();
    let mut n = [0.0; UNITS];
    for _ in 0..2000 {
        let mut next = [0.0; UNITS];
        for v in 0..UNITS {
            next[v] = inflow[v] + (0..UNITS).map(|u| n[u] * matrix[u][v]).sum::<f64>();
        }
        let done = (0..UNITS).all(|v| (next[v] - n[v]).abs() < 1e-10 * (1.0 + n[v]));
        n = next;
        if done {
            break;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(matrix: TransitionMatrix) -> TransitionModel {
        TransitionModel::uniform(2, 7, ARRIVAL_SPLIT, matrix)
    }

    #[test]
    fn shipped_tables_validate() {
        assert!(model(ADJUSTED_TRANSITIONS).violations().is_empty());
        assert!(model(ESTIMATED_TRANSITIONS).violations().is_empty());
        let mut bad = model(ADJUSTED_TRANSITIONS);
        bad.probs[1][3][0][0] = 0.5;
        assert_eq!(bad.violations().len(), 1);
    }

    #[test]
    fn full_discharge_empties_census() {
        let m = model([[0.0, 0.0, 0.0, 1.0]; UNITS]);
        let start = CensusState { counts: vec![[10, 4, 3], [7, 0, 1]] };
        let (next, flows) = census_step(&start, &[0, 0], &m, 0, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(next.total(), 0);
        assert_eq!(flows.discharged(), 25);
    }

    #[test]
    fn identity_keeps_census() {
        let m = model([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]);
        let start = CensusState { counts: vec![[10, 4, 3], [7, 0, 1]] };
        let traj = simulate_census(&start, &vec![vec![0, 0]; 5], &m, 0, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(traj.states.iter().all(|s| *s == start));
    }

    #[test]
    fn demand_ratios() {
        let r = NurseRatios::default();
        assert_eq!(nurse_demand(&CensusState { counts: vec![[0, 0, 0]] }, &r), vec![0.0]);
        assert!((nurse_demand(&CensusState { counts: vec![[30, 9, 4]] }, &r)[0] - 11.0).abs() < 1e-12);
        assert!((nurse_demand(&CensusState { counts: vec![[5, 3, 2]] }, &r)[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn multinomial_proportions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let probs = [0.5, 0.3, 0.15, 0.05];
        let (n, reps) = (20u64, 10_000);
        let mut sums = [0.0; 4];
        for _ in 0..reps {
            let d = multinomial(n, &probs, &mut rng);
            assert_eq!(d.iter().sum::<u64>(), n);
            for k in 0..4 {
                sums[k] += d[k] as f64;
            }
        }
        for k in 0..4 {
            let mean = sums[k] / reps as f64;
            let sd = (n as f64 * probs[k] * (1.0 - probs[k]) / reps as f64).sqrt();
            assert!((mean - n as f64 * probs[k]).abs() < 3.0 * sd, "cell {k}");
        }
    }

    #[test]
    fn steady_state_solves_balance() {
        let n = steady_state_census(100.0, &ARRIVAL_SPLIT, &ADJUSTED_TRANSITIONS);
        for v in 0..UNITS {
            let inflow = 100.0 * ARRIVAL_SPLIT[v] + (0..UNITS).map(|u| n[u] * ADJUSTED_TRANSITIONS[u][v]).sum::<f64>();
            assert!((inflow - n[v]).abs() < 1e-6);
        }
    }
}
