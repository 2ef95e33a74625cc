//! Builds radius boxes around two demand samples and compares the vertex
//! maximum of a linear cost with the closed form.
//!
//! cargo run --example uncertainty_boxes -- [radius]

use redeploy::uncertainty::{build_uncertainty_sets, enumerate_vertices, BoxOptions, DemandPath, SamplePathSet};

fn main() -> redeploy::Result<()> {
    let epsilon: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1.5);
    let samples = SamplePathSet::new(vec![
        DemandPath::new(vec![vec![2.0, 0.5], vec![3.0, 1.0]])?,
        DemandPath::new(vec![vec![4.0, 1.0], vec![2.5, 0.0]])?,
    ])?;
    let c = vec![vec![1.0, -2.0], vec![0.5, 3.0]];
    for bx in build_uncertainty_sets(&samples, epsilon, BoxOptions::default())? {
        let vertices = enumerate_vertices(&bx)?;
        let by_vertex = vertices
            .iter()
            .map(|v| (0..2).flat_map(|t| (0..2).map(move |i| (t, i))).map(|(t, i)| c[t][i] * v.get(t, i)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        println!("lower {:?}", bx.lower);
        println!("upper {:?}", bx.upper);
        println!("{} vertices, max {by_vertex:.3}, closed form {:.3}\n", vertices.len(), bx.max_linear(&c));
    }
    Ok(())
}
