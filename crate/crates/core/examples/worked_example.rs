//! Unif(θ, θ²) with n = 25, min 281.1, max 9689.7: both 95% plausibility
//! intervals, plus the conditioning value and plausibility at a few θ.

use uniform_im::{feasible_set, h_obs, plausibility, plausibility_interval, ModelSpec, PrsKind, SuffStat};

fn main() -> uniform_im::Result<()> {
    let model = ModelSpec::theta_theta_squared();
    let stat = SuffStat::new(25, 281.1, 9689.7)?;
    let fs = feasible_set(&model, &stat)?;
    println!("feasible set: [{:.4}, {:.4}]", fs.lo, fs.hi);

    for prs in [PrsKind::OneSidedLower, PrsKind::DefaultSymmetric] {
        let iv = plausibility_interval(&stat, &model, prs, 0.05)?;
        println!("95% {prs:<10} interval: ({:.3}, {:.3})", iv.lo, iv.hi);
    }

    for theta in [98.5, 100.0, 102.0, 104.0] {
        let h = h_obs(&stat, theta, &model)?;
        let one = plausibility(theta, &stat, &model, PrsKind::OneSidedLower)?.pl;
        let two = plausibility(theta, &stat, &model, PrsKind::DefaultSymmetric)?.pl;
        println!("theta={theta:>6}: h={h:.4}  pl_one_sided={one:.4}  pl_default={two:.4}");
    }
    Ok(())
}
