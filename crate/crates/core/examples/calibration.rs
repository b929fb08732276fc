//! Plausibility at the true θ is Unif(0, 1) under repeated sampling. Prints
//! the Kolmogorov–Smirnov distance for each builtin model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uniform_im::{plausibility, reduce, ModelSpec, PrsKind};

fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max)
}

fn main() -> uniform_im::Result<()> {
    let models = [
        ModelSpec::location_unit(),
        ModelSpec::theta_theta_squared(),
        ModelSpec::linear(1.0, 0.5, 2.0, 0.3)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for model in &models {
        for (n, theta) in [(5, 10.0), (25, 100.0)] {
            let (a, b) = (model.a(theta), model.b(theta));
            let mut pls = Vec::with_capacity(4000);
            for _ in 0..4000 {
                let x: Vec<f64> = (0..n).map(|_| a + b * rng.random::<f64>()).collect();
                let stat = reduce(&x)?;
                pls.push(plausibility(theta, &stat, model, PrsKind::DefaultSymmetric)?.pl);
            }
            println!("{:<20} n={n:<3} theta={theta:<5} KS={:.4}", model.name(), ks_uniform(pls));
        }
    }
    Ok(())
}
