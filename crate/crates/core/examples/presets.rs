//! Lists the shipped scenario presets with the settings that set them apart
//! and prints one as TOML.
//!
//! cargo run --example presets -- [name]

use redeploy::cli::{preset, PRESETS};

fn main() {
    for name in PRESETS {
        let cfg = preset(name).expect("shipped preset");
        let ok = if cfg.validate().is_ok() { "valid" } else { "INVALID" };
        println!(
            "{name:<22} peak {:.1}  window {} weeks  step {:.0}  bonus {:?}  {ok}",
            cfg.simulator.peak_factor,
            cfg.simulator.window_weeks,
            cfg.robust.step_scale,
            cfg.sites.distance_bonus.map(|b| (b.min, b.per_mile)),
        );
    }
    let name = std::env::args().nth(1).unwrap_or_else(|| "baseline".into());
    match preset(&name) {
        Some(cfg) => print!("\n# {name}\n{}", cfg.to_toml()),
        None => eprintln!("unknown preset {name}"),
    }
}
