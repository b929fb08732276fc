//! Unif(θ, θ + 1): the general machinery against the closed forms, and the
//! flat-prior posterior interval that coincides with the plausibility interval.

use uniform_im::{
    loc_bayes_posterior_interval, loc_interval, loc_plausibility, plausibility,
    plausibility_interval, LocationStat, ModelSpec, PrsKind, SuffStat,
};

fn main() -> uniform_im::Result<()> {
    let model = ModelSpec::location_unit();
    let stat = SuffStat::new(4, 0.2, 0.9)?;
    let ls = LocationStat::from_stat(&stat)?;

    for theta in [-0.09, -0.05, 0.0, 0.05, 0.1, 0.15, 0.19] {
        let general = plausibility(theta, &stat, &model, PrsKind::DefaultSymmetric)?.pl;
        println!(
            "theta={theta:>5}: general={general:.12}  closed={:.12}",
            loc_plausibility(theta, ls)
        );
    }

    let general = plausibility_interval(&stat, &model, PrsKind::DefaultSymmetric, 0.05)?;
    let closed = loc_interval(ls, 0.05)?;
    let bayes = loc_bayes_posterior_interval(ls, 0.05)?;
    println!("general: ({:.6}, {:.6})", general.lo, general.hi);
    println!("closed:  ({:.6}, {:.6})", closed.lo, closed.hi);
    println!("bayes:   ({:.6}, {:.6})", bayes.lo, bayes.hi);
    Ok(())
}
