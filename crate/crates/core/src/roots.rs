//! Bracketing helpers shared by feasible-set and interval computations.

/// Bisect a predicate that holds at `inside` and fails at `outside`.
///
/// Returns a point on the `inside` side of the transition, within `tol` of it.
/// A zero `tol` bisects until the bracket cannot be split any further in `f64`.
pub(crate) fn bisect_predicate<P>(pred: P, mut inside: f64, mut outside: f64, tol: f64) -> f64
where
    P: Fn(f64) -> bool,
{
    for _ in 0..2200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside || (outside - inside).abs() <= tol {
            break;
        }
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Points marching from `start` toward `edge`: geometric approach for a finite
/// edge, doubling steps for an infinite one.
pub(crate) fn march(start: f64, edge: f64) -> impl Iterator<Item = f64> {
    let finite = edge.is_finite();
    let scale = start.abs().max(1.0);
    let dir = if edge > start { 1.0 } else { -1.0 };
    (1..=1100).map_while(move |k| {
        let p = if finite {
            let frac = 1.0 - 0.5f64.powi(k);
            start + (edge - start) * frac
        } else {
            start + dir * scale * 2f64.powi(k - 1)
        };
        let strictly_inside = if dir > 0.0 { p < edge } else { p > edge };
        (p.is_finite() && strictly_inside).then_some(p)
    })
}
