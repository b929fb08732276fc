//! Register a user-supplied posterior density and compare it with the
//! plausibility interval in a small simulation, then on the CLI.

use uniform_im::simulation::run;
use uniform_im::{CompetitorRegistry, DensitySpec, Method, ModelSpec, SimConfig, SuffStat};

fn main() -> uniform_im::Result<()> {
    let mut registry = CompetitorRegistry::new();
    // Scale-invariant prior 1/θ on top of the flat-prior likelihood.
    registry.register(DensitySpec::new("jeffreys-ish", |t, s: &SuffStat, m: &ModelSpec| {
        -(s.n as f64) * m.b(t).ln() - t.ln()
    }));

    let config = SimConfig {
        n_values: vec![5],
        theta_values: vec![10.0],
        reps: 500,
        methods: vec![
            Method::ImOneSided,
            Method::parse("custom:jeffreys-ish", &registry)?,
            Method::parse("custom:jeffreys-ish-hpd", &registry)?,
        ],
        ..SimConfig::theta_squared_study()
    };
    let report = run(&config)?;
    print!("{}", report.format_tables());

    let mut out = std::io::stdout();
    let code = uniform_im::cli::run(
        [
            "uniform-im", "analyze", "--n", "25", "--min", "281.1", "--max", "9689.7",
            "--competitor", "custom:jeffreys-ish",
        ],
        &registry,
        &mut out,
        &mut std::io::stderr(),
    );
    assert_eq!(code, 0);
    Ok(())
}
