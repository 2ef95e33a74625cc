use std::collections::HashMap;

use super::census::NurseRatios;
use super::training::{estimate_rolling_params, generate_training_paths, FlowEstimates, PatientTrace};
use crate::error::{invalid, Result};
use crate::planner::TrainingSource;
use crate::seed::rng_for;
use crate::uncertainty::SamplePathSet;

/// Training paths for one ground-truth trace, re-estimated from the trailing
/// window before every request and cached so replays see the same paths.
///
/// A request for day `t` uses the flows up to day `t − 1` and starts from the
/// census at the start of day `t`, which is already observed.
#[derive(Clone, Debug)]
pub struct RollingForecaster<'a> {
    trace: &'a PatientTrace,
    ratios: NurseRatios,
    window_weeks: usize,
    horizon: usize,
    seed: u64,
    estimates: Vec<(i64, FlowEstimates)>,
    cache: HashMap<(usize, u32, usize, usize), SamplePathSet>,
}

impl<'a> RollingForecaster<'a> {
    /// `horizon` is the week length of the planner, `seed` the stream of
    /// this (testing path, experiment) pair.
    pub fn new(trace: &'a PatientTrace, ratios: NurseRatios, window_weeks: usize, horizon: usize, seed: u64) -> Result<Self> {
        let first_end = trace.first_day + (window_weeks * trace.period) as i64;
        if window_weeks == 0 || first_end > 1 {
            return Err(invalid(format!(
                "a {window_weeks}-week estimation window needs history from day {}",
                1 - (window_weeks * trace.period) as i64
            )));
        }
        Ok(RollingForecaster { trace, ratios, window_weeks, horizon, seed, estimates: Vec::new(), cache: HashMap::new() })
    }

    /// Estimates from the window ending before `end_day`. Each day's
    /// estimate falls back on the previous day's for empty cells, so the
    /// whole chain is computed in order.
    pub fn estimates(&mut self, end_day: i64) -> Result<&FlowEstimates> {
        let first_end = self.trace.first_day + (self.window_weeks * self.trace.period) as i64;
        if end_day < first_end {
            return Err(invalid(format!("no full estimation window ends before day {end_day}")));
        }
        let mut next = self.estimates.last().map_or(first_end, |(d, _)| d + 1);
        while next <= end_day {
            let prev = self.estimates.last().map(|(_, e)| e);
            let est = estimate_rolling_params(self.trace, next, self.window_weeks, prev)?;
            self.estimates.push((next, est));
            next += 1;
        }
        let k = (end_day - first_end) as usize;
        Ok(&self.estimates[k].1)
    }

    fn paths(&mut self, week: usize, day: u32, len: usize, count: usize) -> Result<SamplePathSet> {
        if let Some(p) = self.cache.get(&(week, day, len, count)) {
            return Ok(p.clone());
        }
        let t = ((week - 1) * self.horizon) as i64 + day as i64;
        let start = self.trace.census_at(t)?.clone();
        let dow = self.trace.day_of_week(t);
        let est = self.estimates(t)?.clone();
        let mut rng = rng_for(self.seed, &[week as u64, day as u64, len as u64, count as u64]);
        let paths = generate_training_paths(&est, &start, dow, 0, count, len, &self.ratios, &mut rng)?;
        self.cache.insert((week, day, len, count), paths.clone());
        Ok(paths)
    }
}

impl TrainingSource for RollingForecaster<'_> {
    fn weekly(&mut self, week: usize, count: usize) -> Result<SamplePathSet> {
        self.paths(week, 1, self.horizon, count)
    }

    fn daily(&mut self, week: usize, day: u32, len: usize, count: usize) -> Result<SamplePathSet> {
        self.paths(week, day, len, count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{generate_testing_path, SimulatorConfig};

    #[test]
    fn requests_are_cached_and_reproducible() {
        let cfg = SimulatorConfig::four_site(1.5);
        let p = generate_testing_path(&cfg, 2, 4).unwrap();
        let mut a = RollingForecaster::new(&p.trace, cfg.ratios, 3, 7, 9).unwrap();
        let mut b = RollingForecaster::new(&p.trace, cfg.ratios, 3, 7, 9).unwrap();
        let w = a.weekly(2, 6).unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(w.horizon(), 7);
        // Different call order, same answer.
        b.daily(1, 3, 2, 6).unwrap();
        assert_eq!(b.weekly(2, 6).unwrap(), w);
        assert_eq!(a.weekly(2, 6).unwrap(), w);
    }

    #[test]
    fn first_day_matches_observed_demand() {
        let cfg = SimulatorConfig::four_site(1.5);
        let p = generate_testing_path(&cfg, 2, 5).unwrap();
        let mut f = RollingForecaster::new(&p.trace, cfg.ratios, 3, 7, 1).unwrap();
        let set = f.daily(2, 4, 2, 3).unwrap();
        for path in set.paths() {
            assert_eq!(path.day(0), p.demand.day(7 + 3));
        }
    }

    #[test]
    fn window_longer_than_history_is_rejected() {
        let cfg = SimulatorConfig::four_site(1.5);
        let p = generate_testing_path(&cfg, 1, 5).unwrap();
        assert!(RollingForecaster::new(&p.trace, cfg.ratios, 6, 7, 1).is_err());
    }
}
