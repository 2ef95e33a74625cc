//! Rounds a fractional transfer vector many times and compares the empirical
//! mean of the integer draws with the fractional input.
//!
//! cargo run --example rounding -- [draws]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use redeploy::planner::randomized_round;

fn main() -> redeploy::Result<()> {
    let draws: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100_000);
    let fractional = [0.25, 1.5, 3.9, 0.0, 7.02];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut sums = vec![0u64; fractional.len()];
    for _ in 0..draws {
        for (s, r) in sums.iter_mut().zip(randomized_round(&fractional, &mut rng)?) {
            *s += r;
        }
    }
    println!("fractional  mean draw     z");
    for (v, s) in fractional.iter().zip(sums) {
        let mean = s as f64 / draws as f64;
        let f = v - v.floor();
        let sd = (f * (1.0 - f) / draws as f64).sqrt();
        let z = if sd > 0.0 { (mean - v) / sd } else { 0.0 };
        println!("{v:>10.3}  {mean:>9.4}  {z:>+5.2}");
    }
    Ok(())
}
