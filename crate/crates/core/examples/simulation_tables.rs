//! Coverage and mean-length tables for Unif(θ, θ²).
//!
//! `cargo run --release --example simulation_tables -- [reps] [seed]`
//! Defaults to 1000 replications; the full study uses 8000.

use uniform_im::simulation::{run, DEFAULT_SEED};
use uniform_im::{Method, SimConfig};

fn main() -> uniform_im::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps = args.next().map_or(1000, |s| s.parse().expect("reps must be an integer"));
    let seed = args.next().map_or(DEFAULT_SEED, |s| s.parse().expect("seed must be an integer"));
    let config = SimConfig {
        reps,
        seed,
        methods: vec![Method::ImOneSided, Method::ImDefault],
        ..SimConfig::theta_squared_study()
    };
    let report = run(&config)?;
    print!("{}", report.format_tables());
    Ok(())
}
