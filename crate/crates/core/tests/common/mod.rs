#![allow(dead_code)]

use rand::Rng;
use uniform_im::{reduce, ModelSpec, SuffStat};

pub fn example_stat() -> SuffStat {
    SuffStat::new(25, 281.1, 9689.7).unwrap()
}

pub fn draw(model: &ModelSpec, theta: f64, n: usize, rng: &mut impl Rng) -> SuffStat {
    let (a, b) = (model.a(theta), model.b(theta));
    let x: Vec<f64> = (0..n).map(|_| a + b * rng.random::<f64>()).collect();
    reduce(&x).unwrap()
}

/// Minimum and maximum of `n` standard uniforms, drawn directly.
pub fn min_max(n: usize, rng: &mut impl Rng) -> (f64, f64) {
    let u2 = rng.random::<f64>().powf(1.0 / n as f64);
    let u1 = u2 * (1.0 - rng.random::<f64>().powf(1.0 / (n - 1) as f64));
    (u1, u2)
}

/// Kolmogorov–Smirnov distance between a sample and the CDF `f`.
pub fn ks_distance(mut xs: Vec<f64>, f: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let fx = f(x);
            (fx - i as f64 / n).max((i + 1) as f64 / n - fx)
        })
        .fold(0.0, f64::max)
}

pub fn ks_uniform(xs: Vec<f64>) -> f64 {
    ks_distance(xs, |x| x.clamp(0.0, 1.0))
}

pub fn builtin_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::location_unit(),
        ModelSpec::theta_theta_squared(),
        ModelSpec::linear(1.0, 0.5, 2.0, 0.3).unwrap(),
    ]
}
