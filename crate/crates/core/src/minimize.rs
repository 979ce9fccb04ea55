//! One-dimensional bounded minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once
/// the bracket is narrower than `tol`. Returns `(x_min, f_min)`.
pub fn golden_section<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);

    // 200 iterations shrink any finite bracket below f64 resolution.
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }

    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimum of `f` on `[lo, hi]`: scan `n_grid` uniformly spaced points
/// (endpoints included), then refine by golden section between the
/// neighbours of the best grid point.
///
/// The grid point itself stays a candidate, so an endpoint minimum is never
/// lost to the refinement.
pub fn grid_then_golden<F>(f: F, lo: f64, hi: f64, n_grid: usize, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    if hi <= lo {
        return (lo, f(lo));
    }
    let n = n_grid.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let at = |i: usize| if i == n - 1 { hi } else { lo + step * i as f64 };

    let (best_i, best_f) = (0..n)
        .map(|i| (i, f(at(i))))
        .fold(
            (0, f64::INFINITY),
            |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
        );

    let a = at(best_i.saturating_sub(1));
    let b = at((best_i + 1).min(n - 1));
    let (x, fx) = golden_section(&f, a, b, tol);
    if fx <= best_f {
        (x, fx)
    } else {
        (at(best_i), best_f)
    }
}
