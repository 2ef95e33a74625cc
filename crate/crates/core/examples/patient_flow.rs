//! Runs the unit-level census model at constant arrivals from its steady
//! state and prints the nurse demand it implies.
//!
//! cargo run --example patient_flow -- [days] [arrivals_per_day]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use redeploy::simulator::{
    nurse_demand, simulate_census, steady_state_census, CensusState, NurseRatios, TransitionModel, ADJUSTED_TRANSITIONS,
    ARRIVAL_SPLIT, UNIT_NAMES,
};

fn main() {
    let mut args = std::env::args().skip(1);
    let days: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(28);
    let rate: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(40.0);

    let model = TransitionModel::uniform(1, 7, ARRIVAL_SPLIT, ADJUSTED_TRANSITIONS);
    let steady = steady_state_census(rate, &ARRIVAL_SPLIT, &ADJUSTED_TRANSITIONS);
    let initial = CensusState { counts: vec![steady.map(|n| n.round() as u64)] };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let poisson = Poisson::new(rate).expect("positive rate");
    let arrivals: Vec<Vec<u64>> = (0..days).map(|_| vec![poisson.sample(&mut rng) as u64]).collect();
    let traj = simulate_census(&initial, &arrivals, &model, 0, &mut rng);

    let ratios = NurseRatios::default();
    println!("steady state: {}", UNIT_NAMES.iter().zip(steady).map(|(u, n)| format!("{u} {n:.1}")).collect::<Vec<_>>().join(", "));
    println!(" day  arrivals  discharged  {:>5} {:>5} {:>5}  nurses", UNIT_NAMES[0], UNIT_NAMES[1], UNIT_NAMES[2]);
    for (t, (state, flows)) in traj.states.iter().skip(1).zip(&traj.flows).enumerate() {
        let c = state.counts[0];
        println!(
            "{:>4}  {:>8}  {:>10}  {:>5} {:>5} {:>5}  {:>6.1}",
            t + 1,
            arrivals[t][0],
            flows.discharged(),
            c[0],
            c[1],
            c[2],
            nurse_demand(state, &ratios)[0]
        );
    }
}
