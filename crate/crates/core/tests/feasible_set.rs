mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uniform_im::{feasible_set, ModelSpec};

#[test]
fn feasible_set_contains_truth_and_matches_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..10_000 {
        let model = match case % 3 {
            0 => ModelSpec::theta_theta_squared(),
            1 => ModelSpec::location_unit(),
            _ => ModelSpec::linear(
                rng.random_range(-2.0..2.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..2.0),
                rng.random_range(0.0..1.0),
            )
            .unwrap(),
        };
        let theta = match case % 3 {
            0 => rng.random_range(1.5..150.0),
            1 => rng.random_range(-50.0..50.0),
            _ => rng.random_range(0.0..10.0),
        };
        let n = rng.random_range(2..40);
        let stat = common::draw(&model, theta, n, &mut rng);
        let fs = feasible_set(&model, &stat).unwrap();
        assert!(fs.contains(theta), "case {case}: {theta} not in {fs:?}");
        let supports = |t: f64| model.a(t) <= stat.x1 && stat.x2 <= model.upper(t);
        for k in 1..10 {
            let lo = if fs.lo.is_finite() { fs.lo } else { theta - 100.0 };
            let hi = if fs.hi.is_finite() { fs.hi } else { theta + 100.0 };
            let t = lo + (hi - lo) * k as f64 / 10.0;
            assert!(supports(t), "case {case}: {t} inside {fs:?} is unsupported");
        }
        let slack = 1e-6 * fs.width().min(1.0).max(1e-3);
        if fs.lo.is_finite() && model.domain().contains(fs.lo - slack) {
            assert!(!supports(fs.lo - slack), "case {case}: below {fs:?} still supported");
        }
        if fs.hi.is_finite() && model.domain().contains(fs.hi + slack) {
            assert!(!supports(fs.hi + slack), "case {case}: above {fs:?} still supported");
        }
    }
}
