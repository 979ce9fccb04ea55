//! Lower bound `m(delta)`, upper bound `M(delta)`, and `alpha(delta) = M(delta)`.
//!
//! The lower bound is a minimax over the tangent-line family:
//!
//! ```text
//! m(delta) = (2/pi) min_theta max_{q >= 0} (rho + sigma q) / a(q)
//! rho = 1 - sqrt(delta) cos theta,   sigma = sqrt(delta) sin theta
//! ```
//!
//! Parametrizing `q` by the tangency abscissa `y` turns the inner maximum
//! into a one-variable problem on `[y_minus, y_plus)` whose solution is
//! known in closed form: an interior stationary point at `y = 2 pi - 2 phi`
//! when `phi` lies in the window `(pi - y_plus/2, pi - y_minus/2]`, otherwise
//! one of the two ends. [`max_f_over_q`] performs that case split exactly.
//!
//! The upper bound is the minimum over `z` in `[-sqrt(delta), sqrt(delta)]`
//! of [`f_max_closed`], the stationary-point maximum rewritten in `z`.

use std::f64::consts::{FRAC_2_PI, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{check_delta, domain, Error, Result};
use crate::minimize::grid_then_golden;
use crate::rootfind::{lower_condition, upper_condition, y_bounds};
use crate::tangent_family::Y_PLUS_MARGIN;

/// Default number of coarse grid points for both outer minimizations.
pub const DEFAULT_GRID: usize = 512;

/// Tolerance of the `alpha_checked` equality assertion.
pub const EQUALITY_TOL: f64 = 1e-7;

const REFINE_TOL: f64 = 1e-10;
const CLAMP_TOL: f64 = 1e-12;

/// `arccos` with arguments drifting up to `CLAMP_TOL` past `[-1, 1]` clamped.
fn acos_clamped(x: f64) -> f64 {
    debug_assert!(x.abs() <= 1.0 + CLAMP_TOL, "arccos argument {x}");
    x.clamp(-1.0, 1.0).acos()
}

/// A point `(rho, sigma)` on the circle `(rho - 1)^2 + sigma^2 = delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclePoint {
    pub rho: f64,
    pub sigma: f64,
}

impl CirclePoint {
    pub fn new(rho: f64, sigma: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(domain("rho", rho, "finite rho >= 0"));
        }
        if !sigma.is_finite() {
            return Err(domain("sigma", sigma, "finite sigma"));
        }
        Ok(Self { rho, sigma })
    }

    pub fn radius(&self) -> f64 {
        self.rho.hypot(self.sigma)
    }

    pub fn is_degenerate(&self) -> bool {
        self.rho == 0.0 && self.sigma == 0.0
    }

    /// Angle with `cos phi = sigma / r`, `sin phi = rho / r`; lies in
    /// `[0, pi]` because `rho >= 0`. `None` at the origin.
    pub fn phi(&self) -> Option<f64> {
        (!self.is_degenerate()).then(|| self.rho.atan2(self.sigma))
    }
}

pub fn rho_sigma(theta: f64, delta: f64) -> Result<CirclePoint> {
    check_delta(delta)?;
    if !theta.is_finite() {
        return Err(domain("theta", theta, "finite theta"));
    }
    let r = delta.sqrt();
    let (s, c) = theta.sin_cos();
    Ok(CirclePoint {
        rho: (1.0 - r * c).max(0.0),
        sigma: r * s,
    })
}

fn check_closed_y(y: f64) -> Result<()> {
    let yb = y_bounds();
    if y >= yb.y_minus && y <= yb.y_plus {
        Ok(())
    } else {
        Err(domain("y", y, "y_minus <= y <= y_plus"))
    }
}

fn check_open_y(y: f64) -> Result<()> {
    let yb = y_bounds();
    if y >= yb.y_minus && y <= yb.y_plus - Y_PLUS_MARGIN {
        Ok(())
    } else {
        Err(domain("y", y, "y_minus <= y < y_plus"))
    }
}

/// `(rho + sigma q(y)) / a(y)`, i.e. the inner objective as a function of
/// the tangency abscissa. Finite on the closed interval: at `y_plus` it
/// equals `-sigma / cos(y_plus)`.
pub fn f_of_y(y: f64, point: &CirclePoint) -> Result<f64> {
    check_closed_y(y)?;
    Ok((point.rho * upper_condition(y) + point.sigma * lower_condition(y)) / (1.0 - y.cos()))
}

/// Same function as [`f_of_y`], written through `r` and `phi`.
pub fn f_of_y_polar(y: f64, point: &CirclePoint) -> Result<f64> {
    check_closed_y(y)?;
    let Some(phi) = point.phi() else {
        return Ok(0.0);
    };
    let num = phi.cos() - (phi + y).cos() - y * (phi + y).sin();
    Ok(point.radius() * num / (1.0 - y.cos()))
}

pub fn df_dy(y: f64, point: &CirclePoint) -> Result<f64> {
    check_open_y(y)?;
    let Some(phi) = point.phi() else {
        return Ok(0.0);
    };
    let w = 1.0 - y.cos();
    Ok(point.radius() * (y - y.sin()) * (phi.cos() - (phi + y).cos()) / (w * w))
}

/// Interior stationary point of [`f_of_y`], present only inside the window.
pub fn stationary_y(phi: f64) -> Option<f64> {
    let yb = y_bounds();
    (phi > yb.phi_low() && phi <= yb.phi_high()).then_some(TAU - 2.0 * phi)
}

/// Second derivative of [`f_of_y`] at its stationary point.
pub fn d2f_dy2_stationary(point: &CirclePoint) -> Result<f64> {
    let y = stationary_point(point)?.1;
    let phi = point.phi().ok_or(Error::Degenerate)?;
    let w = 1.0 - y.cos();
    Ok(point.radius() * (y - y.sin()) * (phi + y).sin() / (w * w))
}

fn stationary_point(point: &CirclePoint) -> Result<(f64, f64)> {
    let phi = point.phi().ok_or(Error::Degenerate)?;
    let yb = y_bounds();
    let y = stationary_y(phi).ok_or(Error::Case {
        phi,
        lo: yb.phi_low(),
        hi: yb.phi_high(),
    })?;
    Ok((phi, y))
}

/// Interior maximum `r (pi - phi) / sin phi`.
pub fn f_max_at_point(point: &CirclePoint) -> Result<f64> {
    let (phi, _) = stationary_point(point)?;
    Ok(point.radius() * (PI - phi) / phi.sin())
}

/// `r (pi - phi) / sin phi` evaluated anywhere on the circle, without the
/// window check. Off the window it is no longer the inner maximum, but the
/// outer minimum of it still equals the lower bound.
pub fn f_max_formula(point: &CirclePoint) -> Result<f64> {
    let phi = point.phi().ok_or(Error::Degenerate)?;
    Ok(point.radius() * (PI - phi) / phi.sin())
}

/// [`f_max_formula`] in the form `(r^2 / rho) arccos(-sigma / r)`.
pub fn f_max_arccos(point: &CirclePoint) -> Result<f64> {
    if point.is_degenerate() {
        return Err(Error::Degenerate);
    }
    let r = point.radius();
    Ok(r * r / point.rho * acos_clamped(-point.sigma / r))
}

/// Supremum at the `y_plus` end, `-sigma / cos(y_plus)`.
///
/// Positive for `sigma > 0`, which is where this end is the maximizer.
pub fn f_ab(sigma: f64) -> f64 {
    -sigma / y_bounds().y_plus.cos()
}

/// Maximum at the `y_minus` end, `rho / sin(y_minus)`.
pub fn f_cd(rho: f64) -> Result<f64> {
    if rho.is_nan() || rho < 0.0 {
        return Err(domain("rho", rho, "rho >= 0"));
    }
    Ok(rho / y_bounds().y_minus.sin())
}

/// Where the maximum of [`f_of_y`] over `[y_minus, y_plus)` is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerMax {
    /// `rho = sigma = 0`; the maximum is 0.
    Degenerate,
    Stationary {
        y: f64,
        value: f64,
    },
    /// Increasing on the whole interval; supremum approached at `y_plus`.
    UpperEnd {
        value: f64,
    },
    /// Decreasing on the whole interval; maximum at `y_minus`.
    LowerEnd {
        value: f64,
    },
}

impl InnerMax {
    pub fn value(&self) -> f64 {
        match *self {
            InnerMax::Degenerate => 0.0,
            InnerMax::Stationary { value, .. }
            | InnerMax::UpperEnd { value }
            | InnerMax::LowerEnd { value } => value,
        }
    }
}

pub fn inner_max(point: &CirclePoint) -> InnerMax {
    let Some(phi) = point.phi() else {
        return InnerMax::Degenerate;
    };
    let yb = y_bounds();
    if phi <= yb.phi_low() {
        InnerMax::UpperEnd {
            value: f_ab(point.sigma),
        }
    } else if phi > yb.phi_high() {
        InnerMax::LowerEnd {
            value: point.rho / yb.y_minus.sin(),
        }
    } else {
        InnerMax::Stationary {
            y: TAU - 2.0 * phi,
            value: point.radius() * (PI - phi) / phi.sin(),
        }
    }
}

/// `max_{q >= 0} (rho + sigma q) / a(q)`, resolved by case.
pub fn max_f_over_q(point: &CirclePoint) -> f64 {
    inner_max(point).value()
}

/// Lower bound with the outer minimum restricted to `sigma <= 0`, i.e.
/// `theta` in `[pi, 2 pi]`.
pub fn lower_bound(delta: f64, n_theta: usize) -> Result<f64> {
    Ok(lower_bound_over(delta, n_theta, PI, TAU)?.0)
}

/// Lower bound with the outer minimum taken over `theta` in `[lo, hi]`.
/// Returns `(m, argmin_theta)`.
pub fn lower_bound_over(delta: f64, n_theta: usize, lo: f64, hi: f64) -> Result<(f64, f64)> {
    check_delta(delta)?;
    if n_theta < 8 {
        return Err(domain("n_theta", n_theta as f64, "n_theta >= 8"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(domain("theta range", hi - lo, "finite lo < hi"));
    }
    let objective = |theta: f64| match rho_sigma(theta, delta) {
        Ok(p) => max_f_over_q(&p),
        Err(_) => f64::INFINITY,
    };
    let (theta, value) = grid_then_golden(objective, lo, hi, n_theta, REFINE_TOL);
    Ok((FRAC_2_PI * value, theta))
}

/// `((1 + z)/2) arccos((2 delta - 1 - z^2) / (1 - z^2))`, the interior
/// maximum re-expressed through `z`.
pub fn f_max_closed(delta: f64, z: f64) -> Result<f64> {
    check_delta(delta)?;
    if z.is_nan() || z * z > delta + CLAMP_TOL {
        return Err(domain("z", z, "z^2 <= delta"));
    }
    let w = (1.0 - z) * (1.0 + z);
    if w <= 0.0 {
        return Ok(0.0);
    }
    // arccos(2t - 1) = 2 arccos(sqrt t) with t = (delta - z^2)/(1 - z^2),
    // both factored to avoid cancellation as z^2 -> delta -> 1.
    let r = delta.sqrt();
    let t = ((r - z) * (r + z) / w).clamp(0.0, 1.0);
    Ok((1.0 + z) * t.sqrt().acos())
}

/// Interior maximum through `omega = sqrt(delta) cos theta` on `sigma <= 0`.
pub fn f_max_omega(delta: f64, omega: f64) -> Result<f64> {
    check_omega(delta, omega)?;
    let r2 = 1.0 - 2.0 * omega + delta;
    Ok(r2 / (1.0 - omega) * acos_clamped(((delta - omega * omega).max(0.0) / r2).sqrt()))
}

/// [`f_max_omega`] after the double-angle rewrite `arccos(2 t^2 - 1) = 2 arccos t`.
pub fn f_max_omega_double_angle(delta: f64, omega: f64) -> Result<f64> {
    check_omega(delta, omega)?;
    let r2 = 1.0 - 2.0 * omega + delta;
    let arg = (delta - 1.0 + 2.0 * omega - 2.0 * omega * omega) / r2;
    Ok(r2 / (2.0 * (1.0 - omega)) * acos_clamped(arg))
}

fn check_omega(delta: f64, omega: f64) -> Result<()> {
    check_delta(delta)?;
    if omega.abs() > delta.sqrt() + CLAMP_TOL || omega >= 1.0 {
        return Err(domain("omega", omega, "|omega| <= sqrt(delta), omega < 1"));
    }
    Ok(())
}

/// `z = (delta - omega) / (1 - omega)`: maps `[-sqrt(delta), sqrt(delta)]`
/// onto itself, reversing orientation.
pub fn omega_to_z(omega: f64, delta: f64) -> Result<f64> {
    check_omega(delta, omega)?;
    Ok((delta - omega) / (1.0 - omega))
}

/// Upper bound `M(delta)`.
pub fn upper_bound(delta: f64) -> Result<f64> {
    Ok(upper_bound_argmin(delta)?.1)
}

/// `(z*, M(delta))` with `z*` the minimizing `z`.
pub fn upper_bound_argmin(delta: f64) -> Result<(f64, f64)> {
    check_delta(delta)?;
    let r = delta.sqrt();
    let objective = |z: f64| f_max_closed(delta, z).unwrap_or(f64::INFINITY);
    let (z, value) = grid_then_golden(objective, -r, r, DEFAULT_GRID, REFINE_TOL);
    Ok((z, FRAC_2_PI * value))
}

/// The speed-limit coefficient `alpha(delta)`, normalized so `alpha(0) = 1`.
pub fn alpha(delta: f64) -> Result<f64> {
    upper_bound(delta)
}

/// Mandelstam-Tamm numerator `arccos(sqrt(delta))`.
pub fn mt_alpha(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(delta.sqrt().acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
}

pub fn evaluate_bounds(delta: f64, n_theta: usize) -> Result<BoundEvaluation> {
    let lower = lower_bound(delta, n_theta)?;
    let upper = upper_bound(delta)?;
    Ok(BoundEvaluation {
        delta,
        lower,
        upper,
        gap: (lower - upper).abs(),
    })
}

/// [`alpha`] together with the lower bound, failing with
/// [`Error::EqualityViolation`] if they differ by more than [`EQUALITY_TOL`].
pub fn alpha_checked(delta: f64) -> Result<BoundEvaluation> {
    let eval = evaluate_bounds(delta, DEFAULT_GRID)?;
    if eval.gap > EQUALITY_TOL {
        return Err(Error::EqualityViolation {
            delta,
            lower: eval.lower,
            upper: eval.upper,
            gap: eval.gap,
        });
    }
    Ok(eval)
}

/// Which of the two circle points on the ray at angle `psi = pi - phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Distance `s = sin psi +- sqrt(delta - cos^2 psi)` from the origin to the
/// circle along the ray, so `rho = s sin psi` and `sigma = -s cos psi`.
fn ray_distance(psi: f64, delta: f64, branch: Branch) -> Result<f64> {
    check_delta(delta)?;
    let (s, c) = psi.sin_cos();
    let disc = delta - c * c;
    if !(psi.is_finite() && disc >= -CLAMP_TOL) {
        return Err(domain("psi", psi, "cos^2 psi <= delta"));
    }
    Ok(s + branch.sign() * disc.max(0.0).sqrt())
}

pub fn ray_point(psi: f64, delta: f64, branch: Branch) -> Result<CirclePoint> {
    let s = ray_distance(psi, delta, branch)?;
    CirclePoint::new((s * psi.sin()).max(0.0), -s * psi.cos())
}

/// Interior maximum along the ray: `(2 + (delta - 1)/rho) psi`.
pub fn f_max_on_ray(psi: f64, delta: f64, branch: Branch) -> Result<f64> {
    let p = ray_point(psi, delta, branch)?;
    if p.rho <= 0.0 {
        return Err(domain("rho", p.rho, "rho > 0 along the ray"));
    }
    Ok((2.0 + (delta - 1.0) / p.rho) * psi)
}

pub fn f_ab_on_ray(psi: f64, delta: f64, branch: Branch) -> Result<f64> {
    let s = ray_distance(psi, delta, branch)?;
    Ok(s * psi.cos() / y_bounds().y_plus.cos())
}

pub fn f_cd_on_ray(psi: f64, delta: f64, branch: Branch) -> Result<f64> {
    let s = ray_distance(psi, delta, branch)?;
    Ok(s * psi.sin() / y_bounds().y_minus.sin())
}

/// Feasible `psi` range on the circle: `cos^2 psi <= delta`.
fn circle_psi_range(delta: f64) -> (f64, f64) {
    let lo = delta.sqrt().acos();
    (lo, PI - lo)
}

/// `psi` range of the arc where the maximum sits at `y_plus`
/// (`2 psi >= y_plus`), or `None` if the circle misses it.
pub fn ab_arc_psi_range(delta: f64) -> Result<Option<(f64, f64)>> {
    check_delta(delta)?;
    let (lo, hi) = circle_psi_range(delta);
    let lo = lo.max(0.5 * y_bounds().y_plus);
    Ok((lo <= hi).then_some((lo, hi)))
}

/// `psi` range of the arc where the maximum sits at `y_minus`
/// (`2 psi <= y_minus`), or `None` if the circle misses it.
pub fn cd_arc_psi_range(delta: f64) -> Result<Option<(f64, f64)>> {
    check_delta(delta)?;
    let (lo, hi) = circle_psi_range(delta);
    let hi = hi.min(0.5 * y_bounds().y_minus);
    Ok((lo <= hi).then_some((lo, hi)))
}

fn check_arc(psi: f64, lo: f64, hi: f64, expected: &'static str) -> Result<()> {
    let two_psi = 2.0 * psi;
    if two_psi >= lo - CLAMP_TOL && two_psi <= hi + CLAMP_TOL {
        Ok(())
    } else {
        Err(domain("psi", psi, expected))
    }
}

/// Interior maximum minus the `y_plus` end value on the AB arc:
///
/// ```text
/// s / (2 sin psi) * (2 psi - sin(2 psi) / cos(y_plus))
/// ```
///
/// Zero where `2 psi = y_plus`.
pub fn arc_gap_ab(psi: f64, delta: f64, branch: Branch) -> Result<f64> {
    let y_plus = y_bounds().y_plus;
    check_arc(psi, y_plus, TAU, "y_plus <= 2 psi <= 2 pi")?;
    let s = ray_distance(psi, delta, branch)?;
    let two_psi = 2.0 * psi;
    Ok(s / (2.0 * psi.sin()) * (two_psi - two_psi.sin() / y_plus.cos()))
}

/// Interior maximum minus the `y_minus` end value on the CD arc:
///
/// ```text
/// s / (2 sin psi) * (2 psi - (1 - cos(2 psi)) / sin(y_minus))
/// ```
///
/// Zero where `2 psi = y_minus`.
pub fn arc_gap_cd(psi: f64, delta: f64, branch: Branch) -> Result<f64> {
    let y_minus = y_bounds().y_minus;
    check_arc(psi, 0.0, y_minus, "0 <= 2 psi <= y_minus")?;
    let s = ray_distance(psi, delta, branch)?;
    let two_psi = 2.0 * psi;
    Ok(s / (2.0 * psi.sin()) * (two_psi - (1.0 - two_psi.cos()) / y_minus.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rho_sigma_examples() {
        let p = rho_sigma(0.0, 0.0).unwrap();
        assert_eq!((p.rho, p.sigma), (1.0, 0.0));
        assert!(close(p.phi().unwrap(), FRAC_PI_2, 1e-15));

        let p = rho_sigma(PI, 0.25).unwrap();
        assert!(close(p.rho, 1.5, 1e-15) && close(p.sigma, 0.0, 1e-15));
        assert!(close(p.phi().unwrap(), FRAC_PI_2, 1e-15));

        let p = rho_sigma(1.5 * PI, 0.25).unwrap();
        assert!(close(p.rho, 1.0, 1e-15) && close(p.sigma, -0.5, 1e-15));
        let expected = (-0.5 / 1.25f64.sqrt()).acos();
        assert!(close(p.phi().unwrap(), expected, 1e-15));
    }

    #[test]
    fn degenerate_point() {
        let p = rho_sigma(0.0, 1.0).unwrap();
        assert!(p.is_degenerate());
        assert_eq!(p.phi(), None);
        assert_eq!(max_f_over_q(&p), 0.0);
        assert_eq!(inner_max(&p), InnerMax::Degenerate);
        assert_eq!(f_max_at_point(&p), Err(Error::Degenerate));
    }

    #[test]
    fn rho_sigma_rejects_bad_delta() {
        assert!(rho_sigma(0.0, 1.5).is_err());
        assert!(rho_sigma(0.0, -0.1).is_err());
        assert!(rho_sigma(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn circle_equation_holds() {
        for k in 0..64 {
            let theta = TAU * k as f64 / 64.0;
            let p = rho_sigma(theta, 0.37).unwrap();
            assert!(close((p.rho - 1.0).powi(2) + p.sigma.powi(2), 0.37, 1e-14));
        }
    }

    #[test]
    fn f_of_y_examples() {
        let p = CirclePoint::new(1.0, 0.0).unwrap();
        assert!(close(f_of_y(PI, &p).unwrap(), FRAC_PI_2, 1e-15));
        let yb = y_bounds();
        let steps = 200;
        for i in 0..=steps {
            let y = yb.y_minus + (yb.y_plus - yb.y_minus) * i as f64 / steps as f64;
            let a = f_of_y(y, &p).unwrap();
            let b = f_of_y_polar(y, &p).unwrap();
            assert!(close(a, b, 1e-12), "{y}: {a} vs {b}");
        }
        assert!(f_of_y(yb.y_plus + 1e-9, &p).is_err());
        assert!(f_of_y(yb.y_minus - 1e-9, &p).is_err());
    }

    #[test]
    fn f_of_y_upper_limit_is_f_ab() {
        let yb = y_bounds();
        for (rho, sigma) in [(1.0, 0.4), (0.7, -0.2), (1.6, 0.0), (0.2, 0.9)] {
            let p = CirclePoint::new(rho, sigma).unwrap();
            assert!(close(f_of_y(yb.y_plus, &p).unwrap(), f_ab(sigma), 1e-10));
        }
    }

    #[test]
    fn f_of_y_lower_end_is_f_cd() {
        let yb = y_bounds();
        for (rho, sigma) in [(1.0, 0.4), (0.7, -0.2), (1.6, 0.0)] {
            let p = CirclePoint::new(rho, sigma).unwrap();
            let v = f_of_y(yb.y_minus, &p).unwrap();
            assert!(close(v, f_cd(rho).unwrap(), 1e-10));
        }
        assert_eq!(f_cd(0.0).unwrap(), 0.0);
        assert!(f_cd(-1.0).is_err());
        assert_eq!(f_ab(0.0), 0.0);
    }

    #[test]
    fn df_dy_examples() {
        let p = CirclePoint::new(1.0, 0.0).unwrap();
        assert!(df_dy(PI, &p).unwrap().abs() < 1e-15);

        let p = CirclePoint::new(1.2, -0.3).unwrap();
        let h = 1e-5;
        let fd = (f_of_y(3.0 + h, &p).unwrap() - f_of_y(3.0 - h, &p).unwrap()) / (2.0 * h);
        let an = df_dy(3.0, &p).unwrap();
        assert!(((fd - an) / an).abs() < 1e-6, "{fd} vs {an}");
    }

    #[test]
    fn df_dy_positive_below_window() {
        let phi: f64 = 0.1;
        let p = CirclePoint::new(phi.sin(), phi.cos()).unwrap();
        let yb = y_bounds();
        for i in 0..1000 {
            let y = yb.y_minus + (yb.y_plus - yb.y_minus) * i as f64 / 1000.0;
            assert!(df_dy(y, &p).unwrap() > 0.0);
        }
    }

    #[test]
    fn stationary_window() {
        let yb = y_bounds();
        assert!(close(stationary_y(FRAC_PI_2).unwrap(), PI, 1e-15));
        assert_eq!(stationary_y(0.1), None);
        assert!(close(yb.phi_low(), 0.8949, 5e-5));
        assert!(close(
            stationary_y(yb.phi_high()).unwrap(),
            yb.y_minus,
            1e-14
        ));
        assert_eq!(stationary_y(yb.phi_low()), None);
        assert_eq!(stationary_y(yb.phi_high() + 1e-9), None);
    }

    #[test]
    fn f_max_forms_agree() {
        let p = CirclePoint::new(1.0, 0.0).unwrap();
        assert!(close(f_max_at_point(&p).unwrap(), FRAC_PI_2, 1e-15));
        for k in 0..200 {
            let theta = TAU * k as f64 / 200.0;
            for delta in [0.1, 0.4, 0.8] {
                let p = rho_sigma(theta, delta).unwrap();
                if let (Ok(a), Ok(b)) = (f_max_at_point(&p), f_max_arccos(&p)) {
                    assert!(close(a, b, 1e-12), "{theta} {delta}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn f_max_outside_window_is_case_error() {
        let phi: f64 = 0.1;
        let p = CirclePoint::new(phi.sin(), phi.cos()).unwrap();
        assert!(matches!(f_max_at_point(&p), Err(Error::Case { .. })));
    }

    #[test]
    fn stationary_point_is_a_maximum() {
        let yb = y_bounds();
        for i in 1..100 {
            let phi = yb.phi_low() + (yb.phi_high() - yb.phi_low()) * i as f64 / 100.0;
            let p = CirclePoint::new(phi.sin(), phi.cos()).unwrap();
            let d2 = d2f_dy2_stationary(&p).unwrap();
            assert!(d2 < 0.0, "{phi}: {d2}");
            let y = stationary_y(phi).unwrap();
            let h = 1e-5;
            if y - h >= yb.y_minus && y + h <= yb.y_plus - Y_PLUS_MARGIN {
                let fd = (df_dy(y + h, &p).unwrap() - df_dy(y - h, &p).unwrap()) / (2.0 * h);
                assert!(close(fd, d2, 1e-6 * d2.abs().max(1.0)));
            }
        }
    }

    #[test]
    fn inner_max_routes_boundary_to_upper_end() {
        let phi = y_bounds().phi_low();
        let p = CirclePoint::new(phi.sin(), phi.cos()).unwrap();
        assert!(matches!(inner_max(&p), InnerMax::UpperEnd { .. }));
        // Both candidates coincide on the boundary.
        let interior = p.radius() * (PI - phi) / phi.sin();
        assert!(close(max_f_over_q(&p), interior, 1e-12));
    }

    #[test]
    fn inner_max_continuous_across_upper_window_edge() {
        let phi = y_bounds().phi_high();
        let below = CirclePoint::new(phi.sin(), phi.cos()).unwrap();
        let above = CirclePoint::new((phi + 1e-10).sin(), (phi + 1e-10).cos()).unwrap();
        assert!(matches!(inner_max(&below), InnerMax::Stationary { .. }));
        assert!(matches!(inner_max(&above), InnerMax::LowerEnd { .. }));
        assert!(close(max_f_over_q(&below), max_f_over_q(&above), 1e-9));
    }

    #[test]
    fn max_f_over_q_examples() {
        let p = CirclePoint::new(1.0, 0.0).unwrap();
        assert!(close(max_f_over_q(&p), FRAC_PI_2, 1e-15));
    }

    #[test]
    fn lower_bound_endpoints() {
        assert!(close(lower_bound(0.0, 64).unwrap(), 1.0, 1e-12));
        assert!(close(lower_bound(1.0, 64).unwrap(), 0.0, 1e-12));
        assert!(lower_bound(1.1, 64).is_err());
        assert!(lower_bound(0.5, 4).is_err());
    }

    #[test]
    fn lower_equals_upper_at_quarter() {
        let m = lower_bound(0.25, DEFAULT_GRID).unwrap();
        let big_m = upper_bound(0.25).unwrap();
        assert!(close(m, big_m, 1e-7), "{m} vs {big_m}");
    }

    #[test]
    fn half_circle_restriction_matches_full_circle() {
        for delta in [0.05, 0.3, 0.6, 0.95] {
            let half = lower_bound(delta, 720).unwrap();
            let full = lower_bound_over(delta, 1440, 0.0, TAU).unwrap().0;
            assert!(close(half, full, 1e-9), "{delta}: {half} vs {full}");
        }
    }

    #[test]
    fn f_max_closed_examples() {
        assert!(close(f_max_closed(0.0, 0.0).unwrap(), FRAC_PI_2, 1e-15));
        assert_eq!(f_max_closed(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(f_max_closed(1.0, -1.0).unwrap(), 0.0);
        assert!(f_max_closed(0.25, 0.6).is_err());
    }

    #[test]
    fn f_max_chain_at_quarter() {
        let (delta, omega) = (0.25, 0.1);
        let point = CirclePoint::new(1.0 - omega, -f64::sqrt(delta - omega * omega)).unwrap();
        let arccos_form = f_max_arccos(&point).unwrap();
        assert!(close(arccos_form, f_max_formula(&point).unwrap(), 1e-12));
        let omega_form = f_max_omega(delta, omega).unwrap();
        let double_angle = f_max_omega_double_angle(delta, omega).unwrap();
        let z_form = f_max_closed(delta, omega_to_z(omega, delta).unwrap()).unwrap();
        for v in [omega_form, double_angle, z_form] {
            assert!(close(arccos_form, v, 1e-12), "{arccos_form} {omega_form} {double_angle} {z_form}");
        }
    }

    #[test]
    fn upper_bound_endpoints() {
        assert!(close(upper_bound(0.0).unwrap(), 1.0, 1e-12));
        assert!(close(upper_bound(1.0).unwrap(), 0.0, 1e-12));
        assert!(upper_bound(-0.01).is_err());
    }

    #[test]
    fn alpha_endpoints_and_checked() {
        assert!(close(alpha(0.0).unwrap(), 1.0, 1e-12));
        assert!(close(alpha(1.0).unwrap(), 0.0, 1e-12));
        let eval = alpha_checked(0.42).unwrap();
        assert!(eval.gap <= EQUALITY_TOL);
        assert_eq!(eval.upper, alpha(0.42).unwrap());
    }

    #[test]
    fn alpha_strictly_decreasing() {
        let values: Vec<f64> = (0..=100)
            .map(|i| alpha(i as f64 / 100.0).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn mt_alpha_examples() {
        assert!(close(mt_alpha(0.0).unwrap(), FRAC_PI_2, 1e-15));
        assert_eq!(mt_alpha(1.0).unwrap(), 0.0);
        assert!(close(mt_alpha(0.5).unwrap(), PI / 4.0, 1e-15));
    }

    #[test]
    fn omega_to_z_examples() {
        let delta: f64 = 0.36;
        let r = delta.sqrt();
        assert!(close(omega_to_z(r, delta).unwrap(), -r, 1e-15));
        assert!(close(omega_to_z(-r, delta).unwrap(), r, 1e-15));
        assert!(close(omega_to_z(delta, delta).unwrap(), 0.0, 1e-15));
        assert!(omega_to_z(0.7, delta).is_err());
    }

    #[test]
    fn omega_to_z_is_decreasing_bijection() {
        for delta in [0.01, 0.2, 0.5, 0.9] {
            let r = f64::sqrt(delta);
            let zs: Vec<f64> = (0..=500)
                .map(|i| omega_to_z(-r + 2.0 * r * i as f64 / 500.0, delta).unwrap())
                .collect();
            assert!(zs.windows(2).all(|w| w[1] < w[0]));
            assert!(zs.iter().all(|z| z.abs() <= r + 1e-15));
        }
    }

    #[test]
    fn ray_points_lie_on_circle() {
        let delta = 0.6;
        let (lo, hi) = circle_psi_range(delta);
        for i in 0..=100 {
            let psi = lo + (hi - lo) * i as f64 / 100.0;
            for b in Branch::BOTH {
                let p = ray_point(psi, delta, b).unwrap();
                assert!(close((p.rho - 1.0).powi(2) + p.sigma.powi(2), delta, 1e-12));
                if let Some(phi) = p.phi() {
                    assert!(close(PI - phi, psi, 1e-9));
                }
            }
        }
        assert!(ray_point(0.1, 0.3, Branch::Plus).is_err());
    }

    #[test]
    fn ray_f_max_matches_point_formula() {
        let delta = 0.8;
        let yb = y_bounds();
        for i in 1..50 {
            let phi = yb.phi_low() + (yb.phi_high() - yb.phi_low()) * i as f64 / 50.0;
            let psi = PI - phi;
            for b in Branch::BOTH {
                let Ok(p) = ray_point(psi, delta, b) else {
                    continue;
                };
                let direct = f_max_at_point(&p).unwrap();
                let ray = f_max_on_ray(psi, delta, b).unwrap();
                assert!(close(direct, ray, 1e-10));
            }
        }
    }

    #[test]
    fn arc_gaps_vanish_at_arc_ends() {
        let yb = y_bounds();
        for b in Branch::BOTH {
            assert!(arc_gap_ab(0.5 * yb.y_plus, 0.9, b).unwrap().abs() < 1e-12);
            assert!(arc_gap_cd(0.5 * yb.y_minus, 0.9, b).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn arc_gaps_match_direct_subtraction() {
        for delta in [0.6, 0.9] {
            let (lo, hi) = ab_arc_psi_range(delta).unwrap().unwrap();
            for i in 0..=40 {
                let psi = lo + (hi - lo) * i as f64 / 40.0;
                for b in Branch::BOTH {
                    let direct =
                        f_max_on_ray(psi, delta, b).unwrap() - f_ab_on_ray(psi, delta, b).unwrap();
                    assert!(close(arc_gap_ab(psi, delta, b).unwrap(), direct, 1e-10));
                }
            }
            let (lo, hi) = cd_arc_psi_range(delta).unwrap().unwrap();
            for i in 0..=40 {
                let psi = lo + (hi - lo) * i as f64 / 40.0;
                for b in Branch::BOTH {
                    let direct =
                        f_max_on_ray(psi, delta, b).unwrap() - f_cd_on_ray(psi, delta, b).unwrap();
                    assert!(close(arc_gap_cd(psi, delta, b).unwrap(), direct, 1e-10));
                }
            }
        }
    }

    #[test]
    fn arc_gap_positive_inside() {
        let (lo, hi) = ab_arc_psi_range(0.9).unwrap().unwrap();
        assert!(arc_gap_ab(0.5 * (lo + hi), 0.9, Branch::Plus).unwrap() > 0.0);
        let (lo, hi) = cd_arc_psi_range(0.9).unwrap().unwrap();
        assert!(arc_gap_cd(0.5 * (lo + hi), 0.9, Branch::Minus).unwrap() > 0.0);
    }

    #[test]
    fn arc_ranges() {
        // Small fidelity: the whole circle sits inside the stationary window.
        assert_eq!(ab_arc_psi_range(0.1).unwrap(), None);
        assert_eq!(cd_arc_psi_range(0.1).unwrap(), None);
        assert_eq!(ab_arc_psi_range(0.3).unwrap(), None);
        assert!(cd_arc_psi_range(0.3).unwrap().is_some());
        assert!(arc_gap_ab(1.0, 0.9, Branch::Plus).is_err());
        assert!(arc_gap_cd(2.0, 0.9, Branch::Plus).is_err());
    }
}
