//! Tabulate both plausibility curves for the Unif(θ, θ²) example over its
//! feasible set and sketch them as text.

use uniform_im::{feasible_set, plausibility_curve, ModelSpec, PrsKind, SuffStat};

fn main() -> uniform_im::Result<()> {
    let model = ModelSpec::theta_theta_squared();
    let stat = SuffStat::new(25, 281.1, 9689.7)?;
    let fs = feasible_set(&model, &stat)?;
    let hi = fs.lo + 10.0;
    let grid: Vec<f64> = (0..=40).map(|k| fs.lo + (hi - fs.lo) * k as f64 / 40.0).collect();

    let one = plausibility_curve(&stat, &model, PrsKind::OneSidedLower, &grid)?;
    let two = plausibility_curve(&stat, &model, PrsKind::DefaultSymmetric, &grid)?;
    println!("{:>9}  {:>7}  {:>7}", "theta", "one", "default");
    for (a, b) in one.iter().zip(&two) {
        let bar = "#".repeat((b.pl * 40.0).round() as usize);
        println!("{:>9.3}  {:>7.4}  {:>7.4}  {bar}", a.theta, a.pl, b.pl);
    }
    Ok(())
}
