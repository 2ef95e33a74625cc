use crate::error::{invalid, Result};
use crate::uncertainty::{DemandPath, SamplePathSet};

/// Supplier of training sample paths. Repeated calls with the same arguments
/// must return the same paths, so past weeks can be replayed.
pub trait TrainingSource {
    /// `count` paths over days `1..=T` of `week`, using information up to the
    /// end of the previous week.
    fn weekly(&mut self, week: usize, count: usize) -> Result<SamplePathSet>;

    /// `count` paths over days `day..day + len` of `week`, using information
    /// up to the end of day `day − 1`.
    fn daily(&mut self, week: usize, day: u32, len: usize, count: usize) -> Result<SamplePathSet>;
}

/// Fixed paths over the whole run, cut into the requested windows. Path `k`
/// of a request is `paths[k % paths.len()]`.
#[derive(Clone, Debug)]
pub struct StaticTraining {
    paths: Vec<DemandPath>,
    period: usize,
}

impl StaticTraining {
    /// `paths` cover every day of the run; `period` is the week length.
    pub fn new(paths: Vec<DemandPath>, period: usize) -> Result<Self> {
        if paths.is_empty() || period == 0 {
            return Err(invalid("static training needs at least one path and a positive period"));
        }
        SamplePathSet::new(paths.clone())?;
        Ok(StaticTraining { paths, period })
    }

    fn cut(&self, start: usize, len: usize, count: usize) -> Result<SamplePathSet> {
        let horizon = self.paths[0].horizon();
        if start + len > horizon {
            return Err(invalid(format!("training paths cover {horizon} days, days {}..{} requested", start + 1, start + len)));
        }
        SamplePathSet::new((0..count).map(|k| self.paths[k % self.paths.len()].window(start, len)).collect())
    }
}

impl TrainingSource for StaticTraining {
    fn weekly(&mut self, week: usize, count: usize) -> Result<SamplePathSet> {
        self.cut((week - 1) * self.period, self.period, count)
    }

    fn daily(&mut self, week: usize, day: u32, len: usize, count: usize) -> Result<SamplePathSet> {
        self.cut((week - 1) * self.period + day as usize - 1, len, count)
    }
}
