use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{mu, ArcFlows, NetworkConfig, SecondmentState};

/// How fractional LP decisions become implemented nurse counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingMode {
    /// Round up with probability equal to the fractional part.
    #[default]
    Randomized,
    Floor,
    /// Keep fractional values (diagnostics only).
    None,
}

/// Values this close to an integer are treated as that integer.
const SNAP: f64 = 1e-9;

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

/// Rounds each entry independently to `floor(v)` or `floor(v) + 1`, the
/// latter with probability `v − floor(v)`.
pub fn randomized_round<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> Result<Vec<u64>> {
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(invalid(format!("cannot round {v}: entries must be finite and nonnegative")));
    }
    Ok(values
        .iter()
        .map(|&v| {
            let v = snap(v);
            let base = v.floor();
            let frac = v - base;
            let up = frac > 0.0 && rng.random::<f64>() < frac;
            base as u64 + up as u64
        })
        .collect())
}

/// A rounded flow matrix plus, per entry, the fractional part of the value it
/// was rounded from when it was rounded up.
#[derive(Clone, Debug)]
pub(crate) struct Rounded {
    pub flows: ArcFlows,
    pub raised: Vec<Option<f64>>,
}

/// Rounds the allowed arcs of `fractional`; negative solver noise is clamped
/// to zero first.
pub(crate) fn round_flows<R: Rng + ?Sized>(
    net: &NetworkConfig,
    fractional: &ArcFlows,
    mode: RoundingMode,
    rng: &mut R,
) -> Rounded {
    let n = net.num_locations();
    let mut flows = ArcFlows::zeros(n);
    let mut raised = vec![None; n * n];
    for arc in net.arcs() {
        let v = snap(fractional.get(arc.from, arc.to).max(0.0));
        let out = match mode {
            RoundingMode::None => v,
            RoundingMode::Floor => v.floor(),
            RoundingMode::Randomized => {
                let base = v.floor();
                let frac = v - base;
                if frac > 0.0 && rng.random::<f64>() < frac {
                    raised[arc.from * n + arc.to] = Some(frac);
                    base + 1.0
                } else {
                    base
                }
            }
        };
        flows.set(arc.from, arc.to, out);
    }
    Rounded { flows, raised }
}

/// Entry of a plan eligible for a repair decrement.
#[derive(Clone, Copy)]
struct Candidate {
    day: usize,
    to: usize,
    frac: f64,
}

/// Lowers entries until `excess` is gone, raised entries with the smallest
/// fractional part first, then any positive entry from the largest down.
fn decrement(plan: &mut [ArcFlows], raised: &mut [Vec<Option<f64>>], from: usize, mut cands: Vec<Candidate>, mut excess: f64) -> f64 {
    let n = plan.first().map_or(0, ArcFlows::size);
    cands.sort_by(|a, b| a.frac.total_cmp(&b.frac).then(a.day.cmp(&b.day)).then(a.to.cmp(&b.to)));
    for c in &cands {
        if excess <= SNAP {
            break;
        }
        if raised[c.day][from * n + c.to].take().is_some() {
            plan[c.day].add(from, c.to, -1.0);
            excess -= 1.0;
        }
    }
    let mut rest: Vec<Candidate> = cands;
    rest.sort_by(|a, b| plan[b.day].get(from, b.to).total_cmp(&plan[a.day].get(from, a.to)).then(a.day.cmp(&b.day)).then(a.to.cmp(&b.to)));
    for c in &rest {
        while excess > SNAP && plan[c.day].get(from, c.to) > 0.0 {
            let cut = plan[c.day].get(from, c.to).min(excess).min(1.0);
            plan[c.day].add(from, c.to, -cut);
            excess -= cut;
        }
    }
    excess
}

/// Restores the rolling capacity windows of `plan` (days `first_day..`) given
/// the secondments in `state`, decrementing rounded-up entries first.
pub(crate) fn repair_capacity(
    net: &NetworkConfig,
    state: &SecondmentState,
    plan: &mut [ArcFlows],
    raised: &mut [Vec<Option<f64>>],
    first_day: u32,
    horizon: u32,
) -> Result<()> {
    let n = net.num_locations();
    for t in 0..plan.len() {
        for i in 0..n {
            let mut committed = state.away_from(i, t);
            let mut cands = Vec::new();
            for (k, d) in plan.iter().enumerate().take(t + 1) {
                for j in 0..n {
                    let v = d.get(i, j);
                    if v > 0.0 && k + mu(net, i, j, first_day + k as u32, horizon) as usize > t {
                        committed += v;
                        cands.push(Candidate { day: k, to: j, frac: raised[k][i * n + j].unwrap_or(f64::INFINITY) });
                    }
                }
            }
            let excess = committed - net.capacity[i] as f64;
            if excess > SNAP && decrement(plan, raised, i, cands, excess) > SNAP {
                return Err(Error::Internal(format!(
                    "capacity at location {i} on day {} cannot be restored",
                    first_day + t as u32
                )));
            }
        }
    }
    Ok(())
}

/// Rounds a multi-day fractional plan and repairs its capacity windows.
pub(crate) fn round_plan<R: Rng + ?Sized>(
    net: &NetworkConfig,
    state: &SecondmentState,
    fractional: &[ArcFlows],
    mode: RoundingMode,
    first_day: u32,
    horizon: u32,
    rng: &mut R,
) -> Result<Vec<ArcFlows>> {
    let (mut plan, mut raised): (Vec<_>, Vec<_>) = fractional
        .iter()
        .map(|f| {
            let r = round_flows(net, f, mode, rng);
            (r.flows, r.raised)
        })
        .unzip();
    repair_capacity(net, state, &mut plan, &mut raised, first_day, horizon)?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_capacity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn integers_are_kept() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(randomized_round(&[2.0, 0.0, 3.0 - 1e-12], &mut rng).unwrap(), vec![2, 0, 3]);
        }
    }

    #[test]
    fn negative_input_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(randomized_round(&[-0.5], &mut rng).is_err());
        assert!(randomized_round(&[f64::NAN], &mut rng).is_err());
    }

    #[test]
    fn mean_matches_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let sum: u64 = (0..n).map(|_| randomized_round(&[1.3], &mut rng).unwrap()[0]).sum();
        let mean = sum as f64 / n as f64;
        assert!((1.29..=1.31).contains(&mean), "{mean}");
    }

    #[test]
    fn entries_round_independently() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            let r = randomized_round(&[0.5, 0.5], &mut rng).unwrap();
            counts[(r[0] * 2 + r[1]) as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn repair_drops_smallest_raised_fraction_first() {
        let net = NetworkConfig::four_site().fully_connected().with_capacity(vec![2, 50, 50, 50]);
        let state = SecondmentState::for_network(&net);
        let mut f = ArcFlows::zeros(4);
        f.set(0, 3, 0.9);
        f.set(0, 2, 0.6);
        f.set(0, 1, 0.5);
        // Force every entry up, as a draw of all-ones would.
        let mut plan = vec![f.map(f64::ceil)];
        let mut raised = vec![vec![None; 16]];
        raised[0][3] = Some(0.9);
        raised[0][2] = Some(0.6);
        raised[0][1] = Some(0.5);
        repair_capacity(&net, &state, &mut plan, &mut raised, 1, 7).unwrap();
        assert_eq!(plan[0].get(0, 1), 0.0);
        assert_eq!(plan[0].get(0, 2), 1.0);
        assert_eq!(plan[0].get(0, 3), 1.0);
    }

    #[test]
    fn rounded_plans_respect_capacity() {
        let net = NetworkConfig::four_site().fully_connected().with_capacity(vec![3, 4, 2, 5]);
        let state = SecondmentState::for_network(&net);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            // Random fractional plans whose window sums sit exactly at capacity.
            let frac: Vec<ArcFlows> = (0..7)
                .map(|_| {
                    let mut f = ArcFlows::zeros(4);
                    for a in net.arcs() {
                        f.set(a.from, a.to, rng.random::<f64>() * 0.6);
                    }
                    f
                })
                .collect();
            let plan = round_plan(&net, &state, &frac, RoundingMode::Randomized, 1, 7, &mut rng).unwrap();
            assert!(validate_capacity(&net, &net.capacity, &plan).is_empty());
            assert!(plan.iter().all(|d| d.nonzero().all(|(_, _, v)| v.fract() == 0.0 && v >= 0.0)));
        }
    }
}
