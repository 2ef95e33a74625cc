use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

/// Piecewise surge multiplier: square-root ramp from 1 at `start` to
/// `peak_factor` at `peak`, square-root decay back to 1 at `end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeShape {
    pub start: f64,
    pub peak: f64,
    pub end: f64,
    pub peak_factor: f64,
}

impl SurgeShape {
    pub fn factor(&self, t: f64) -> f64 {
        surge_factor(t, self.start, self.peak, self.end, self.peak_factor)
    }

    /// Constant factor 1.
    pub fn flat() -> Self {
        SurgeShape { start: 1.0, peak: 1.0, end: 1.0, peak_factor: 1.0 }
    }
}

/// Surge multiplier at day `t`; 1 before `start` and after `end`.
pub fn surge_factor(t: f64, start: f64, peak: f64, end: f64, c_peak: f64) -> f64 {
    if t < start || t > end {
        1.0
    } else if t < peak {
        (c_peak - 1.0) * ((t - start) / (peak - start)).sqrt() + 1.0
    } else if end > peak {
        (c_peak - 1.0) * ((end - t) / (end - peak)).sqrt() + 1.0
    } else {
        c_peak
    }
}

/// Autoregressive arrival-rate model with a day-of-week level, Gaussian
/// noise and a lagged spatial spread term.
///
/// The spread strength, level scale and noise scale at day `t` are `f_t`,
/// `c_i f_t` and `c_i f_t` with `f_t` from [`SurgeShape`], times
/// `spread_multiplier` (spread) and `noise_multiplier` (noise). The AR sum is
/// scaled by `f_t` only when `surge_scales_memory` is set; with the fitted
/// lag coefficients that recursion is unstable once `f_t` exceeds about 1.29.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalModelParams {
    /// `φ[i][l]`, lag `l + 1`.
    pub ar_coefs: Vec<Vec<f64>>,
    /// Days per week.
    pub period: usize,
    /// `κ[i][y]`, day-of-week level with `y = 0` the first day of the run.
    pub day_levels: Vec<Vec<f64>>,
    /// `c[i]`.
    pub location_scale: Vec<f64>,
    pub surge: SurgeShape,
    /// `z` in `θ_ij = exp(−z d_ij / max d)`.
    pub spatial_decay: f64,
    pub spatial_lag: usize,
    pub spatial_window: usize,
    /// Spatial component before the first day, as a fraction of the mean
    /// historical rate.
    pub spatial_seed_fraction: f64,
    pub distance: Vec<Vec<f64>>,
    #[serde(default = "one")]
    pub noise_multiplier: f64,
    #[serde(default = "one")]
    pub spread_multiplier: f64,
    #[serde(default)]
    pub surge_scales_memory: bool,
    /// AR component for the `p` days before the first simulated day, oldest
    /// first, `[l][i]`. Defaults to [`ArrivalModelParams::stationary_history`].
    #[serde(default)]
    pub history: Option<Vec<Vec<f64>>>,
}

fn one() -> f64 {
    1.0
}

impl ArrivalModelParams {
    pub fn locations(&self) -> usize {
        self.location_scale.len()
    }

    pub fn order(&self) -> usize {
        self.ar_coefs.first().map_or(0, Vec::len)
    }

    pub fn day_of_week(&self, t: i64) -> usize {
        (t - 1).rem_euclid(self.period as i64) as usize
    }

    pub fn violations(&self) -> Vec<String> {
        let l = self.locations();
        let mut errs = Vec::new();
        if self.period == 0 {
            errs.push("arrivals.period must be at least 1".into());
        }
        if self.ar_coefs.len() != l || self.ar_coefs.iter().any(|r| r.len() != self.order()) {
            errs.push(format!("arrivals.ar_coefs must have {l} rows of equal length"));
        }
        if self.day_levels.len() != l || self.day_levels.iter().any(|r| r.len() != self.period) {
            errs.push(format!("arrivals.day_levels must be {l} rows of {} entries", self.period));
        }
        if self.day_levels.iter().flatten().chain(&self.location_scale).any(|&v| !(v >= 0.0 && v.is_finite())) {
            errs.push("arrivals.day_levels and location_scale must be nonnegative".into());
        }
        let s = &self.surge;
        if !(s.peak_factor >= 1.0 && s.start <= s.peak && s.peak <= s.end) {
            errs.push("arrivals.surge needs peak_factor >= 1 and start <= peak <= end".into());
        }
        if self.distance.len() != l || self.distance.iter().any(|r| r.len() != l) {
            errs.push(format!("arrivals.distance must be {l}x{l}"));
        }
        if [self.spatial_decay, self.spatial_seed_fraction, self.noise_multiplier, self.spread_multiplier]
            .iter()
            .any(|&v| !(v >= 0.0 && v.is_finite()))
        {
            errs.push("arrivals spatial and multiplier settings must be finite and nonnegative".into());
        }
        if let Some(h) = &self.history {
            if h.len() != self.order() || h.iter().any(|r| r.len() != l) {
                errs.push(format!("arrivals.history must be {} rows of {l} entries", self.order()));
            }
        }
        errs
    }

    /// `θ_ij = exp(−z d_ij / max_{i≠j} d_ij)`, zero on the diagonal.
    pub fn spatial_weights(&self) -> Vec<Vec<f64>> {
        let l = self.locations();
        let dmax = (0..l)
            .flat_map(|i| (0..l).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.distance[i][j])
            .fold(0.0, f64::max);
        (0..l)
            .map(|i| {
                (0..l)
                    .map(|j| {
                        if i == j || dmax <= 0.0 {
                            0.0
                        } else {
                            (-self.spatial_decay * self.distance[i][j] / dmax).exp()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Long-run mean of the AR component at `f = 1` for every location,
    /// averaged over the week.
    pub fn stationary_level(&self) -> Vec<f64> {
        (0..self.locations())
            .map(|i| {
                let persistence: f64 = self.ar_coefs[i].iter().sum();
                let level = self.location_scale[i] * self.day_levels[i].iter().sum::<f64>() / self.period as f64;
                level / (1.0 - persistence).max(1e-6)
            })
            .collect()
    }

    /// Periodic steady state of the noise-free AR component at `f = 1` for
    /// the `p` days before `first_day`, `[l][i]`, oldest first.
    pub fn stationary_history(&self, first_day: i64) -> Vec<Vec<f64>> {
        let p = self.order();
        let y0 = self.day_of_week(first_day);
        let cycle: Vec<Vec<f64>> = (0..self.locations()).map(|i| self.periodic_level(i)).collect();
        (0..p)
            .map(|l| {
                let back = p - l;
                let y = (y0 as i64 - back as i64).rem_euclid(self.period as i64) as usize;
                cycle.iter().map(|c| c[y]).collect()
            })
            .collect()
    }

    /// Noise-free AR component of location `i` by day of week once the
    /// recursion has settled at `f = 1`. Solved by fixed-point iteration over
    /// whole weeks; falls back to the weekly mean when that does not settle.
    pub fn periodic_level(&self, i: usize) -> Vec<f64> {
        let (p, y_len) = (self.order(), self.period);
        let mean = self.stationary_level()[i];
        let mut cycle = vec![mean; y_len];
        for _ in 0..10_000 {
            let mut next = cycle.clone();
            for y in 0..y_len {
                let lagged: f64 = (1..=p)
                    .map(|k| self.ar_coefs[i][k - 1] * next[(y as i64 - k as i64).rem_euclid(y_len as i64) as usize])
                    .sum();
                next[y] = (lagged + self.location_scale[i] * self.day_levels[i][y]).max(0.0);
            }
            let diff = next.iter().zip(&cycle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            cycle = next;
            if diff < 1e-10 * mean.max(1.0) {
                return cycle;
            }
        }
        vec![mean; y_len]
    }
}

/// Rates and sampled arrivals for consecutive days, `[t][i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSeries {
    pub first_day: i64,
    pub rate: Vec<Vec<f64>>,
    pub count: Vec<Vec<u64>>,
}

pub(crate) fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda > 0.0 {
        Poisson::new(lambda).expect("finite positive rate").sample(rng) as u64
    } else {
        0
    }
}

/// Runs the arrival recursion for `days` days starting at `first_day`.
pub fn generate_arrival_rates<R: Rng + ?Sized>(
    params: &ArrivalModelParams,
    first_day: i64,
    days: usize,
    rng: &mut R,
) -> ArrivalSeries {
    let l = params.locations();
    let p = params.order();
    let history = params.history.clone().unwrap_or_else(|| params.stationary_history(first_day));
    let theta = params.spatial_weights();
    let spatial_depth = params.spatial_lag + params.spatial_window;

    // Past values, most recent last.
    let mut ar: Vec<Vec<f64>> = (0..l).map(|i| history.iter().map(|row| row[i]).collect()).collect();
    let mut spread: Vec<Vec<f64>> = (0..l)
        .map(|i| {
            let mean = if p == 0 { 0.0 } else { history.iter().map(|row| row[i]).sum::<f64>() / p as f64 };
            vec![params.spatial_seed_fraction * mean; spatial_depth]
        })
        .collect();

    let mut rate = Vec::with_capacity(days);
    let mut count = Vec::with_capacity(days);
    for step in 0..days {
        let t = first_day + step as i64;
        let f = params.surge.factor(t as f64);
        let y = params.day_of_week(t);
        let mut today_ar = vec![0.0; l];
        let mut today_spread = vec![0.0; l];
        for i in 0..l {
            let past = &ar[i];
            let lagged: f64 = (1..=p).map(|k| params.ar_coefs[i][k - 1] * past[past.len() - k]).sum();
            let kappa = params.day_levels[i][y];
            let scale = params.location_scale[i] * f;
            let var = params.noise_multiplier * scale * kappa;
            let noise = if var > 0.0 { Normal::new(0.0, var.sqrt()).expect("finite sd").sample(rng) } else { 0.0 };
            let beta = if params.surge_scales_memory { f } else { 1.0 };
            today_ar[i] = (beta * lagged + scale * kappa + noise).max(0.0);

            let mut s = 0.0;
            for j in 0..l {
                if j == i {
                    continue;
                }
                let hist = &spread[j];
                let window: f64 = (params.spatial_lag + 1..=spatial_depth).map(|k| hist[hist.len() - k]).sum();
                s += params.spread_multiplier * f * theta[j][i] * window;
            }
            today_spread[i] = s;
        }
        let lambda: Vec<f64> = (0..l).map(|i| today_ar[i] + today_spread[i]).collect();
        count.push(lambda.iter().map(|&v| poisson(v, rng)).collect());
        rate.push(lambda);
        for i in 0..l {
            if p > 0 {
                ar[i].remove(0);
                ar[i].push(today_ar[i]);
            }
            if spatial_depth > 0 {
                spread[i].remove(0);
                spread[i].push(today_spread[i]);
            }
        }
    }
    ArrivalSeries { first_day, rate, count }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simple(l: usize) -> ArrivalModelParams {
        ArrivalModelParams {
            ar_coefs: vec![vec![0.0; 7]; l],
            period: 7,
            day_levels: (0..l).map(|i| (0..7).map(|y| 10.0 + i as f64 + y as f64).collect()).collect(),
            location_scale: vec![1.0; l],
            surge: SurgeShape::flat(),
            spatial_decay: 6.5,
            spatial_lag: 7,
            spatial_window: 7,
            spatial_seed_fraction: 0.0,
            distance: vec![vec![0.0; l]; l],
            noise_multiplier: 1.0,
            spread_multiplier: 1.0,
            surge_scales_memory: false,
            history: None,
        }
    }

    #[test]
    fn surge_breakpoints() {
        assert_eq!(surge_factor(1.0, 1.0, 49.0, 119.0, 1.5), 1.0);
        assert_eq!(surge_factor(49.0, 1.0, 49.0, 119.0, 1.5), 1.5);
        assert_eq!(surge_factor(119.0, 1.0, 49.0, 119.0, 1.5), 1.0);
        assert_eq!(surge_factor(150.0, 1.0, 49.0, 119.0, 1.5), 1.0);
        assert!((surge_factor(13.0, 1.0, 49.0, 119.0, 1.5) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn farthest_pair_weight() {
        let mut p = simple(2);
        p.distance = vec![vec![0.0, 112.0], vec![112.0, 0.0]];
        assert!((p.spatial_weights()[0][1] - (-6.5f64).exp()).abs() < 1e-15);
        assert!((p.spatial_weights()[0][1] - 1.50e-3).abs() < 1e-5);
    }

    #[test]
    fn collapsed_recursion_equals_level() {
        let mut p = simple(2);
        p.noise_multiplier = 0.0;
        p.spread_multiplier = 0.0;
        p.location_scale = vec![0.5, 2.0];
        p.surge = SurgeShape { start: 1.0, peak: 5.0, end: 9.0, peak_factor: 1.4 };
        let series = generate_arrival_rates(&p, 1, 14, &mut ChaCha8Rng::seed_from_u64(1));
        for (k, row) in series.rate.iter().enumerate() {
            let t = k as i64 + 1;
            for i in 0..2 {
                let expect = p.location_scale[i] * p.surge.factor(t as f64) * p.day_levels[i][p.day_of_week(t)];
                assert_eq!(row[i], expect);
            }
        }
    }

    #[test]
    fn arrival_counts_match_rates_on_average() {
        let mut p = simple(1);
        p.noise_multiplier = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reps = 10_000;
        let mut mean = vec![0.0; 7];
        for _ in 0..reps {
            let s = generate_arrival_rates(&p, 1, 7, &mut rng);
            for (t, c) in s.count.iter().enumerate() {
                mean[t] += c[0] as f64 / reps as f64;
            }
        }
        for (t, m) in mean.iter().enumerate() {
            let level = 10.0 + t as f64;
            assert!((m - level).abs() < 3.0 * (level / reps as f64).sqrt(), "day {t}: {m} vs {level}");
        }
    }
}
