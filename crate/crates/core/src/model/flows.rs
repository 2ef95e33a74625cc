use serde::{Deserialize, Serialize};

use super::network::NetworkConfig;

/// Nurse counts per ordered location pair for one day; used for both
/// planned transfers and deployments. The diagonal is always zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcFlows {
    n: usize,
    values: Vec<f64>,
}

/// Planned transfers, one [`ArcFlows`] per day of the horizon.
pub type PlannedPlan = Vec<ArcFlows>;

/// Transfers actually executed on one day.
pub type DeploymentAction = ArcFlows;

impl ArcFlows {
    pub fn zeros(n: usize) -> Self {
        ArcFlows { n, values: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut out = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().take(n) {
                if i != j {
                    out.values[i * n + j] = v;
                }
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i != j || v == 0.0, "diagonal flows must stay zero");
        if i != j {
            self.values[i * self.n + j] = v;
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Sum of outgoing transfers from `i`.
    pub fn out_of(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.get(i, j)).sum()
    }

    /// Sum of incoming transfers to `i`.
    pub fn into(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.get(j, i)).sum()
    }

    /// Nonzero `(from, to, value)` entries in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(move |(idx, &v)| (idx / n, idx % n, v))
    }

    /// Checks nonnegativity, zero diagonal and zero flow on disallowed arcs.
    pub fn respects(&self, net: &NetworkConfig) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let v = self.get(i, j);
                v >= 0.0 && (v == 0.0 || net.is_allowed(i, j))
            })
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for (idx, v) in out.values.iter_mut().enumerate() {
            if idx / self.n != idx % self.n {
                *v = f(*v);
            }
        }
        out
    }
}
