//! Reference computations written from the model definitions, independent of
//! the library's cost, state and LP code.

#![allow(dead_code)]

use rand::Rng;
use redeploy::lp::{solve, LdrSolution, LinearProgram, Sense, VarId};
use redeploy::model::{ArcFlows, CostParams, NetworkConfig};
use redeploy::uncertainty::{DemandPath, UncertaintyBox};

/// Two sites 30 miles apart, bonus 1.2 both ways.
pub fn two_site(capacity: [u32; 2], secondment: u32) -> NetworkConfig {
    NetworkConfig {
        names: vec!["A".into(), "B".into()],
        distance: vec![vec![0.0, 30.0], vec![30.0, 0.0]],
        transfer_bonus: vec![vec![0.0, 1.2], vec![1.2, 0.0]],
        secondment: vec![vec![1, secondment], vec![secondment, 1]],
        arc_allowed: vec![vec![false, true], vec![true, false]],
        capacity: capacity.to_vec(),
    }
}

pub fn random_paths<R: Rng>(rng: &mut R, n: usize, days: usize, locs: usize, max: f64) -> Vec<DemandPath> {
    (0..n)
        .map(|_| DemandPath::new((0..days).map(|_| (0..locs).map(|_| rng.random_range(0.0..max)).collect()).collect()).unwrap())
        .collect()
}

pub fn arcs(net: &NetworkConfig) -> Vec<(usize, usize)> {
    let n = net.names.len();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j && net.arc_allowed[i][j]).collect()
}

/// Days away for a nurse sent on day `t` (1-based) of a `horizon`-day week.
pub fn stay(net: &NetworkConfig, i: usize, j: usize, t: usize, horizon: usize) -> usize {
    (net.secondment[i][j] as usize).min(horizon + 1 - t)
}

pub fn planned_unit(net: &NetworkConfig, c: &CostParams, i: usize, j: usize, t: usize, horizon: usize) -> f64 {
    c.premium * stay(net, i, j, t, horizon) as f64 + net.transfer_bonus[i][j]
}

pub fn emergency_unit(net: &NetworkConfig, c: &CostParams, i: usize, j: usize, t: usize, horizon: usize) -> f64 {
    c.emergency_multiplier[t - 1] * c.premium * stay(net, i, j, t, horizon) as f64 + net.transfer_bonus[i][j]
}

/// Realized cost of a plan `a[t]` and deployments `b[t]` over days
/// `1..=b.len()` against integer-valued demand, starting with nobody away.
pub fn realized_cost(
    net: &NetworkConfig,
    c: &CostParams,
    horizon: usize,
    capacity: &[u32],
    a: &[ArcFlows],
    b: &[ArcFlows],
    demand: &DemandPath,
) -> f64 {
    let n = capacity.len();
    let mut total = 0.0;
    for t in 1..=b.len() {
        for (i, j) in arcs(net) {
            let (pa, db) = (a[t - 1].get(i, j), b[t - 1].get(i, j));
            let cp = planned_unit(net, c, i, j, t, horizon);
            total += cp * pa;
            if db > pa {
                total += emergency_unit(net, c, i, j, t, horizon) * (db - pa);
            } else {
                total += (c.cancellation_fee - 1.0) * cp * (pa - db);
            }
        }
        let mut staff: Vec<f64> = capacity.iter().map(|&k| k as f64).collect();
        for m in 1..=t {
            for (i, j) in arcs(net) {
                let v = b[m - 1].get(i, j);
                if m + stay(net, i, j, m, horizon) > t {
                    staff[i] -= v;
                    staff[j] += v;
                }
            }
        }
        for i in 0..n {
            total += c.shortage_cost[t - 1][i] * (demand.get(t - 1, i) - staff[i]).max(0.0);
        }
    }
    total
}

/// Whether the nurses of each site still away never exceed its capacity.
pub fn within_capacity(net: &NetworkConfig, horizon: usize, capacity: &[u32], flows: &[ArcFlows]) -> bool {
    (1..=flows.len()).all(|t| {
        (0..capacity.len()).all(|i| {
            let away: f64 = (1..=t)
                .flat_map(|m| arcs(net).into_iter().filter(move |&(f, _)| f == i).map(move |(f, j)| (m, f, j)))
                .filter(|&(m, f, j)| m + stay(net, f, j, m, horizon) > t)
                .map(|(m, f, j)| flows[m - 1].get(f, j))
                .sum();
            away <= capacity[i] as f64 + 1e-9
        })
    })
}

/// Cheapest integer plan and deployment for a known demand path, by
/// enumerating every integer flow up to the capacities.
pub fn integer_oracle(net: &NetworkConfig, c: &CostParams, capacity: &[u32], demand: &DemandPath) -> f64 {
    let horizon = demand.horizon();
    let arcs = arcs(net);
    let n = capacity.len();
    let slots: Vec<(usize, usize, usize)> =
        (1..=horizon).flat_map(|t| arcs.iter().map(move |&(i, j)| (t, i, j))).collect();
    let bounds: Vec<u32> = slots.iter().map(|&(_, i, _)| capacity[i]).collect();
    let all = integer_points(&bounds);
    let to_flows = |v: &[u32]| -> Vec<ArcFlows> {
        let mut out = vec![ArcFlows::zeros(n); horizon];
        for (k, &(t, i, j)) in slots.iter().enumerate() {
            out[t - 1].set(i, j, v[k] as f64);
        }
        out
    };
    let feasible: Vec<Vec<ArcFlows>> =
        all.iter().map(|v| to_flows(v)).filter(|f| within_capacity(net, horizon, capacity, f)).collect();
    let mut best = f64::INFINITY;
    for a in &feasible {
        for b in &feasible {
            best = best.min(realized_cost(net, c, horizon, capacity, a, b, demand));
        }
    }
    best
}

fn integer_points(bounds: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &ub in bounds {
        out = out.into_iter().flat_map(|p| (0..=ub).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

/// Corner points of a box.
pub fn corners(bx: &UncertaintyBox) -> Vec<Vec<Vec<f64>>> {
    let mut out = vec![Vec::<Vec<f64>>::new()];
    for t in 0..bx.lower.len() {
        let mut next = Vec::new();
        for prefix in &out {
            let mut days = vec![Vec::new()];
            for i in 0..bx.lower[t].len() {
                let choices = if bx.lower[t][i] == bx.upper[t][i] { vec![bx.lower[t][i]] } else { vec![bx.lower[t][i], bx.upper[t][i]] };
                days = days.into_iter().flat_map(|d: Vec<f64>| choices.iter().map(move |&v| [d.clone(), vec![v]].concat())).collect();
            }
            for d in days {
                let mut p = prefix.clone();
                p.push(d);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn rule_value(intercept: f64, coefs: &[f64], zeta: &[Vec<f64>]) -> f64 {
    let l = zeta[0].len();
    intercept + coefs.iter().enumerate().map(|(d, c)| c * zeta[d / l][d % l]).sum::<f64>()
}

/// Planned cost plus the box-averaged worst-case recourse cost of the rules
/// in `sol`, for a week starting on day 1.
pub fn worst_case_by_corners(sol: &LdrSolution, boxes: &[UncertaintyBox], net: &NetworkConfig, c: &CostParams) -> f64 {
    let horizon = sol.horizon as usize;
    let n = sol.locations;
    let days = sol.a.len();
    let first = sol.first_day as usize;
    let mut planned = 0.0;
    for s in 0..days {
        for (i, j) in arcs(net) {
            planned += planned_unit(net, c, i, j, first + s, horizon) * sol.a[s].get(i, j);
        }
    }
    let mut avg = 0.0;
    for bx in boxes {
        let mut worst = f64::NEG_INFINITY;
        for z in corners(bx) {
            let mut r = 0.0;
            for s in 0..days {
                let t = first + s;
                for (i, j) in arcs(net) {
                    let k = i * n + j;
                    let x = rule_value(sol.x[s][k].intercept, &sol.x[s][k].coefs, &z);
                    let b = rule_value(sol.b[s][k].intercept, &sol.b[s][k].coefs, &z);
                    let cp = planned_unit(net, c, i, j, t, horizon);
                    r += emergency_unit(net, c, i, j, t, horizon) * x + (c.cancellation_fee - 1.0) * cp * (x - b + sol.a[s].get(i, j));
                }
                for i in 0..n {
                    r += c.shortage_cost[t - 1][i] * rule_value(sol.y[s][i].intercept, &sol.y[s][i].coefs, &z);
                }
            }
            worst = worst.max(r);
        }
        avg += worst;
    }
    planned + avg / boxes.len() as f64
}

/// Sample average approximation with one recourse decision per sample and
/// day, from a plan shared by all samples; samples that agree up to a day
/// share their decisions through that day.
pub fn scenario_saa(net: &NetworkConfig, c: &CostParams, capacity: &[u32], samples: &[DemandPath]) -> f64 {
    let horizon = samples[0].horizon();
    let n = capacity.len();
    let arcs = arcs(net);
    let ns = samples.len() as f64;
    let mut lp = LinearProgram::new();
    // Plan.
    let a: Vec<Vec<VarId>> = (1..=horizon)
        .map(|t| {
            arcs.iter()
                .map(|&(i, j)| {
                    let v = lp.add_nonneg(format!("a_{t}_{i}_{j}"));
                    lp.add_objective(v, planned_unit(net, c, i, j, t, horizon));
                    v
                })
                .collect()
        })
        .collect();
    add_capacity_rows(&mut lp, net, horizon, capacity, &arcs, &a, "pcap");
    // One copy of every recourse variable per distinct history.
    let mut b_vars: Vec<Vec<Vec<VarId>>> = Vec::new();
    for (k, sample) in samples.iter().enumerate() {
        let twin = (0..k).find(|&o| samples[o].days() == sample.days());
        let b: Vec<Vec<VarId>> = match twin {
            Some(o) => b_vars[o].clone(),
            None => (1..=horizon).map(|t| arcs.iter().map(|&(i, j)| lp.add_nonneg(format!("b_{k}_{t}_{i}_{j}"))).collect()).collect(),
        };
        if twin.is_none() {
            add_capacity_rows(&mut lp, net, horizon, capacity, &arcs, &b, &format!("cap{k}"));
        }
        for t in 1..=horizon {
            for (q, &(i, j)) in arcs.iter().enumerate() {
                let x = lp.add_nonneg(format!("x_{k}_{t}_{i}_{j}"));
                let cp = planned_unit(net, c, i, j, t, horizon);
                let ce = emergency_unit(net, c, i, j, t, horizon);
                // x ≥ b − a
                lp.add_constraint(format!("eme_{k}_{t}_{i}_{j}"), vec![(b[t - 1][q], 1.0), (a[t - 1][q], -1.0), (x, -1.0)], Sense::Le, 0.0);
                let fee = c.cancellation_fee - 1.0;
                lp.add_objective(x, (ce + fee * cp) / ns);
                lp.add_objective(b[t - 1][q], -fee * cp / ns);
                lp.add_objective(a[t - 1][q], fee * cp / ns);
            }
            for i in 0..n {
                let y = lp.add_nonneg(format!("y_{k}_{t}_{i}"));
                lp.add_objective(y, c.shortage_cost[t - 1][i] / ns);
                // y ≥ demand − capacity + away − hosted
                let mut row = vec![(y, -1.0)];
                for m in 1..=t {
                    for (q, &(f, to)) in arcs.iter().enumerate() {
                        if m + stay(net, f, to, m, horizon) > t {
                            if f == i {
                                row.push((b[m - 1][q], 1.0));
                            }
                            if to == i {
                                row.push((b[m - 1][q], -1.0));
                            }
                        }
                    }
                }
                lp.add_constraint(format!("sho_{k}_{t}_{i}"), row, Sense::Le, capacity[i] as f64 - sample.get(t - 1, i));
            }
        }
        b_vars.push(b);
    }
    solve(&lp).expect("scenario LP solves").report.objective
}

fn add_capacity_rows(
    lp: &mut LinearProgram,
    net: &NetworkConfig,
    horizon: usize,
    capacity: &[u32],
    arcs: &[(usize, usize)],
    flows: &[Vec<VarId>],
    tag: &str,
) {
    for t in 1..=horizon {
        for (i, &cap) in capacity.iter().enumerate() {
            let mut row = Vec::new();
            for m in 1..=t {
                for (q, &(f, to)) in arcs.iter().enumerate() {
                    if f == i && m + stay(net, f, to, m, horizon) > t {
                        row.push((flows[m - 1][q], 1.0));
                    }
                }
            }
            if !row.is_empty() {
                lp.add_constraint(format!("{tag}_{t}_{i}"), row, Sense::Le, cap as f64);
            }
        }
    }
}
