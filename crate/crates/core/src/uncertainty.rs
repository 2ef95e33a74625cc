//! Demand sample paths and the infinity-norm boxes built around them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Nurse demand per day and location, stored as `days[t][i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemandPath {
    days: Vec<Vec<f64>>,
}

impl DemandPath {
    pub fn new(days: Vec<Vec<f64>>) -> Result<Self> {
        let width = days.first().map_or(0, Vec::len);
        if days.iter().any(|d| d.len() != width) {
            return Err(Error::Shape("every day of a demand path needs the same number of locations".into()));
        }
        if days.iter().flatten().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(invalid("demand entries must be finite and nonnegative"));
        }
        Ok(DemandPath { days })
    }

    pub fn zeros(days: usize, locations: usize) -> Self {
        DemandPath { days: vec![vec![0.0; locations]; days] }
    }

    pub fn horizon(&self) -> usize {
        self.days.len()
    }

    pub fn locations(&self) -> usize {
        self.days.first().map_or(0, Vec::len)
    }

    /// Demand vector of day `t` (0-based).
    pub fn day(&self, t: usize) -> &[f64] {
        &self.days[t]
    }

    pub fn get(&self, t: usize, i: usize) -> f64 {
        self.days[t][i]
    }

    pub fn days(&self) -> &[Vec<f64>] {
        &self.days
    }

    /// Days `start..start + len` as a new path.
    pub fn window(&self, start: usize, len: usize) -> DemandPath {
        DemandPath { days: self.days[start..start + len].to_vec() }
    }
}

/// `N` demand paths sharing one shape.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplePathSet {
    paths: Vec<DemandPath>,
}

impl SamplePathSet {
    pub fn new(paths: Vec<DemandPath>) -> Result<Self> {
        if let Some(first) = paths.first() {
            let shape = (first.horizon(), first.locations());
            if paths.iter().any(|p| (p.horizon(), p.locations()) != shape) {
                return Err(Error::Shape("sample paths must share one shape".into()));
            }
        }
        Ok(SamplePathSet { paths })
    }

    pub fn paths(&self) -> &[DemandPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.paths.first().map_or(0, DemandPath::horizon)
    }

    pub fn locations(&self) -> usize {
        self.paths.first().map_or(0, DemandPath::locations)
    }

    /// Consecutive groups of `size` paths.
    pub fn chunks(&self, size: usize) -> Vec<SamplePathSet> {
        self.paths.chunks(size.max(1)).map(|c| SamplePathSet { paths: c.to_vec() }).collect()
    }
}

/// Box `lower <= ζ <= upper` around one sample path, stored `[t][i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBox {
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
    pub epsilon: f64,
}

impl UncertaintyBox {
    /// Zero-width box at `path`.
    pub fn point(path: &DemandPath) -> Self {
        UncertaintyBox { lower: path.days.clone(), upper: path.days.clone(), epsilon: 0.0 }
    }

    pub fn horizon(&self) -> usize {
        self.lower.len()
    }

    pub fn locations(&self) -> usize {
        self.lower.first().map_or(0, Vec::len)
    }

    pub fn contains(&self, path: &DemandPath) -> bool {
        const TOL: f64 = 1e-12;
        path.horizon() == self.horizon()
            && (0..self.horizon()).all(|t| {
                (0..self.locations()).all(|i| {
                    let v = path.get(t, i);
                    v >= self.lower[t][i] - TOL && v <= self.upper[t][i] + TOL
                })
            })
    }

    /// Collapse day `t` onto the observed demand vector.
    pub fn pin_day(&mut self, t: usize, observed: &[f64]) {
        self.lower[t] = observed.to_vec();
        self.upper[t] = observed.to_vec();
    }

    /// Closed-form maximum of `Σ c[t][i] ζ[t][i]` over the box.
    pub fn max_linear(&self, c: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.horizon() {
            for i in 0..self.locations() {
                let ci = c[t][i];
                acc += if ci >= 0.0 { ci * self.upper[t][i] } else { ci * self.lower[t][i] };
            }
        }
        acc
    }
}

/// Options for [`build_uncertainty_sets`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxOptions {
    /// Intersect each box with the nonnegative orthant.
    pub clip_support: bool,
}

impl Default for BoxOptions {
    fn default() -> Self {
        BoxOptions { clip_support: true }
    }
}

/// One box of radius `epsilon` (entry-wise) around each sample path.
pub fn build_uncertainty_sets(samples: &SamplePathSet, epsilon: f64, options: BoxOptions) -> Result<Vec<UncertaintyBox>> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!("robust radius must be finite and nonnegative, got {epsilon}")));
    }
    Ok(samples
        .paths()
        .iter()
        .map(|p| {
            let lower = p
                .days()
                .iter()
                .map(|d| {
                    d.iter()
                        .map(|&v| if options.clip_support { (v - epsilon).max(0.0) } else { v - epsilon })
                        .collect()
                })
                .collect();
            let upper = p.days().iter().map(|d| d.iter().map(|&v| v + epsilon).collect()).collect();
            UncertaintyBox { lower, upper, epsilon }
        })
        .collect())
}

/// Largest box dimension accepted by [`enumerate_vertices`].
pub const MAX_VERTEX_DIMENSION: usize = 20;

/// All corner points of the box; dimensions with `lower == upper` contribute
/// a single coordinate.
pub fn enumerate_vertices(bx: &UncertaintyBox) -> Result<Vec<DemandPath>> {
    let (days, locs) = (bx.horizon(), bx.locations());
    if days * locs > MAX_VERTEX_DIMENSION {
        return Err(invalid(format!(
            "vertex enumeration limited to {MAX_VERTEX_DIMENSION} dimensions, box has {}",
            days * locs
        )));
    }
    let free: Vec<(usize, usize)> = (0..days)
        .flat_map(|t| (0..locs).map(move |i| (t, i)))
        .filter(|&(t, i)| bx.upper[t][i] > bx.lower[t][i])
        .collect();
    let mut out = Vec::with_capacity(1 << free.len());
    for mask in 0u32..(1u32 << free.len()) {
        let mut v = bx.lower.clone();
        for (bit, &(t, i)) in free.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                v[t][i] = bx.upper[t][i];
            }
        }
        out.push(DemandPath { days: v });
    }
    Ok(out)
}
