use rand::Rng;
use serde::{Deserialize, Serialize};

use super::arrivals::poisson;
use super::census::{census_step, nurse_demand, CensusState, DayFlows, NurseRatios, TransitionMatrix, TransitionModel, UNITS};
use crate::error::{invalid, Error, Result};
use crate::uncertainty::{DemandPath, SamplePathSet};

/// Observed patient flow of one ground-truth path, day by day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatientTrace {
    /// Day index of the first entry; history days are `≤ 0`.
    pub first_day: i64,
    pub period: usize,
    /// Census at the start of each day; one more entry than `flows`.
    pub census: Vec<CensusState>,
    pub flows: Vec<DayFlows>,
}

impl PatientTrace {
    pub fn days(&self) -> usize {
        self.flows.len()
    }

    pub fn locations(&self) -> usize {
        self.census.first().map_or(0, |c| c.counts.len())
    }

    /// Last day with recorded flows.
    pub fn last_day(&self) -> i64 {
        self.first_day + self.days() as i64 - 1
    }

    pub fn day_of_week(&self, t: i64) -> usize {
        (t - 1).rem_euclid(self.period as i64) as usize
    }

    fn index(&self, t: i64) -> Result<usize> {
        let k = t - self.first_day;
        if k < 0 || k as usize > self.days() {
            return Err(invalid(format!("day {t} outside the recorded range {}..={}", self.first_day, self.last_day() + 1)));
        }
        Ok(k as usize)
    }

    /// Census at the start of day `t`; valid up to `last_day() + 1`.
    pub fn census_at(&self, t: i64) -> Result<&CensusState> {
        Ok(&self.census[self.index(t)?])
    }

    pub fn flows_on(&self, t: i64) -> Result<&DayFlows> {
        let k = self.index(t)?;
        self.flows.get(k).ok_or_else(|| invalid(format!("no flows recorded on day {t}")))
    }

    /// Nurse demand of days `first..first + len`.
    pub fn demand(&self, first: i64, len: usize, ratios: &NurseRatios) -> Result<DemandPath> {
        let days = (0..len)
            .map(|k| self.census_at(first + k as i64).map(|c| nurse_demand(c, ratios)))
            .collect::<Result<Vec<_>>>()?;
        DemandPath::new(days)
    }
}

/// Day-of-week patient-flow parameters estimated from a recent window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowEstimates {
    /// Mean daily arrivals `[i][y]`.
    pub arrival_rate: Vec<Vec<f64>>,
    pub arrival_split: Vec<[f64; UNITS]>,
    /// `[i][y]` transition matrices.
    pub transitions: Vec<Vec<TransitionMatrix>>,
}

impl FlowEstimates {
    pub fn period(&self) -> usize {
        self.arrival_rate.first().map_or(0, Vec::len)
    }

    pub fn as_transition_model(&self) -> TransitionModel {
        TransitionModel { arrival_split: self.arrival_split.clone(), probs: self.transitions.clone() }
    }
}

/// Estimates from the `window_weeks · period` fully observed days before
/// `end_day`. Cells without observations keep the `previous` value, or a
/// uniform distribution when there is none.
pub fn estimate_rolling_params(
    trace: &PatientTrace,
    end_day: i64,
    window_weeks: usize,
    previous: Option<&FlowEstimates>,
) -> Result<FlowEstimates> {
    let period = trace.period;
    let len = window_weeks * period;
    let start = end_day - len as i64;
    if window_weeks == 0 || start < trace.first_day || end_day - 1 > trace.last_day() {
        return Err(invalid(format!(
            "a {window_weeks}-week window ending before day {end_day} is not covered by days {}..={}",
            trace.first_day,
            trace.last_day()
        )));
    }
    let l = trace.locations();
    let mut arrivals = vec![vec![(0.0, 0usize); period]; l];
    let mut split = vec![[0.0; UNITS]; l];
    let mut moves = vec![vec![[[0.0; UNITS + 1]; UNITS]; period]; l];
    for t in start..end_day {
        let y = trace.day_of_week(t);
        let f = trace.flows_on(t)?;
        for i in 0..l {
            let a: u64 = f.admitted[i].iter().sum();
            arrivals[i][y].0 += a as f64;
            arrivals[i][y].1 += 1;
            for u in 0..UNITS {
                split[i][u] += f.admitted[i][u] as f64;
                for v in 0..=UNITS {
                    moves[i][y][u][v] += f.moved[i][u][v] as f64;
                }
            }
        }
    }
    let arrival_rate = arrivals.iter().map(|row| row.iter().map(|&(s, n)| s / n as f64).collect()).collect();
    let arrival_split = (0..l)
        .map(|i| {
            let total: f64 = split[i].iter().sum();
            if total > 0.0 {
                split[i].map(|v| v / total)
            } else {
                previous.map_or([1.0 / UNITS as f64; UNITS], |p| p.arrival_split[i])
            }
        })
        .collect();
    let transitions = (0..l)
        .map(|i| {
            (0..period)
                .map(|y| {
                    let mut m = [[0.0; UNITS + 1]; UNITS];
                    for u in 0..UNITS {
                        let total: f64 = moves[i][y][u].iter().sum();
                        m[u] = if total > 0.0 {
                            moves[i][y][u].map(|v| v / total)
                        } else {
                            previous.map_or([1.0 / (UNITS + 1) as f64; UNITS + 1], |p| p.transitions[i][y][u])
                        };
                    }
                    m
                })
                .collect()
        })
        .collect();
    Ok(FlowEstimates { arrival_rate, arrival_split, transitions })
}

/// Demand forecasts from the estimated flow model, without the spatial
/// spread term.
///
/// The simulation starts from `start`, the census at the start of a day with
/// day-of-week `start_dow`; it advances `lead` days before the first recorded
/// day and records `horizon` days in total.
#[allow(clippy::too_many_arguments)]
pub fn generate_training_paths<R: Rng + ?Sized>(
    estimates: &FlowEstimates,
    start: &CensusState,
    start_dow: usize,
    lead: usize,
    count: usize,
    horizon: usize,
    ratios: &NurseRatios,
    rng: &mut R,
) -> Result<SamplePathSet> {
    let period = estimates.period();
    if start.counts.len() != estimates.arrival_rate.len() {
        return Err(Error::Shape("census and estimates cover different locations".into()));
    }
    let model = estimates.as_transition_model();
    let l = start.counts.len();
    let mut paths = Vec::with_capacity(count);
    for _ in 0..count {
        let mut census = start.clone();
        let mut dow = start_dow;
        let advance = |census: &mut CensusState, dow: &mut usize, rng: &mut R| {
            let arrivals: Vec<u64> = (0..l).map(|i| poisson(estimates.arrival_rate[i][*dow], rng)).collect();
            *census = census_step(census, &arrivals, &model, *dow, rng).0;
            *dow = (*dow + 1) % period;
        };
        for _ in 0..lead {
            advance(&mut census, &mut dow, rng);
        }
        let mut days = Vec::with_capacity(horizon);
        for d in 0..horizon {
            if d > 0 {
                advance(&mut census, &mut dow, rng);
            }
            days.push(nurse_demand(&census, ratios));
        }
        paths.push(DemandPath::new(days)?);
    }
    SamplePathSet::new(paths)
}
