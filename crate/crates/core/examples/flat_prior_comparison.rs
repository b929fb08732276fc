//! Flat-prior posterior intervals next to the plausibility intervals for the
//! Unif(θ, θ²) example.

use uniform_im::competitors::{interval, normalize};
use uniform_im::{DensityIntervalKind, DensitySpec, ModelSpec, PrsKind, SuffStat};

fn main() -> uniform_im::Result<()> {
    let model = ModelSpec::theta_theta_squared();
    let stat = SuffStat::new(25, 281.1, 9689.7)?;
    let flat = DensitySpec::flat_prior();

    let table = normalize(&flat, &stat, &model)?;
    println!("posterior normalized on {} grid points", table.grid.len());
    println!("posterior median: {:.3}", table.quantile(0.5));

    for kind in [DensityIntervalKind::EqualTailed, DensityIntervalKind::HighestDensity] {
        let iv = interval(&flat, &stat, &model, 0.05, kind)?;
        println!("flat-bayes {:<14} ({:.3}, {:.3})  length {:.3}", kind.tag(), iv.lo, iv.hi, iv.length());
    }
    for prs in [PrsKind::OneSidedLower, PrsKind::DefaultSymmetric] {
        let iv = uniform_im::plausibility_interval(&stat, &model, prs, 0.05)?;
        println!("im-{:<19} ({:.3}, {:.3})  length {:.3}", prs.tag(), iv.lo, iv.hi, iv.length());
    }
    Ok(())
}
