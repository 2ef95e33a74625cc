//! Solves the robust decision-rule LP for a two-hospital week under growing
//! radii and checks each optimum against a vertex-enumeration oracle.
//!
//! cargo run --example decision_rules

use redeploy::lp::{solve_sro_ldr, worst_case_objective_oracle, Formulation, LdrInstance};
use redeploy::model::{CostParams, NetworkConfig, SecondmentState};
use redeploy::uncertainty::{build_uncertainty_sets, BoxOptions, DemandPath, SamplePathSet};

fn main() -> redeploy::Result<()> {
    let net = NetworkConfig {
        names: vec!["North".into(), "South".into()],
        distance: vec![vec![0.0, 25.0], vec![25.0, 0.0]],
        transfer_bonus: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        secondment: vec![vec![1, 2], vec![2, 1]],
        arc_allowed: vec![vec![false, true], vec![true, false]],
        capacity: vec![8, 6],
    };
    let costs = CostParams::calibrated(2, 2);
    let samples = SamplePathSet::new(vec![
        DemandPath::new(vec![vec![5.0, 8.0], vec![6.0, 9.0]])?,
        DemandPath::new(vec![vec![7.0, 6.5], vec![4.0, 10.0]])?,
    ])?;
    let state = SecondmentState::for_network(&net);

    println!("radius  objective     oracle  plan day 1 (N->S, S->N)");
    for epsilon in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let boxes = build_uncertainty_sets(&samples, epsilon, BoxOptions::default())?;
        let inst = LdrInstance {
            network: &net,
            costs: &costs,
            horizon: 2,
            first_day: 1,
            boxes: &boxes,
            state: &state,
            fixed_plan: None,
            formulation: Formulation::Dual,
        };
        let (sol, report) = solve_sro_ldr(&inst)?;
        let oracle = worst_case_objective_oracle(&sol, &boxes, &net, &costs)?;
        println!(
            "{epsilon:>6.1}  {:>9.4}  {oracle:>9.4}  {:.2}, {:.2}  ({} iterations)",
            sol.objective_value,
            sol.a[0].get(0, 1).max(0.0),
            sol.a[0].get(1, 0).max(0.0),
            report.iterations
        );
    }
    Ok(())
}
