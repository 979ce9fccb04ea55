//! The optimal linear lower bound `cos x + q sin x >= 1 - a(q) x` for `x >= 0`.
//!
//! Tangency at `x = y` gives `q` and `a` in closed form as functions of `y`
//! on `[y_minus, y_plus)`. `q(y)` increases strictly from 0 to infinity
//! there, so `a(q)` is obtained by inverting `q(y)` and never by solving the
//! transcendental tangency system directly.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::rootfind::{bracketed_root, lower_condition, upper_condition, y_bounds, Bracket};

/// Largest admissible `y` is `y_plus - Y_PLUS_MARGIN`; `q` diverges at `y_plus`.
pub const Y_PLUS_MARGIN: f64 = 1e-12;

const INVERSION_TOL: f64 = 1e-15;

/// A point of tangency `(y, q, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentSolution {
    pub y: f64,
    pub q: f64,
    pub a: f64,
}

impl TangentSolution {
    pub fn from_y(y: f64) -> Result<Self> {
        check_y(y)?;
        Ok(Self {
            y,
            q: q_unchecked(y),
            a: a_unchecked(y),
        })
    }

    pub fn from_q(q: f64) -> Result<Self> {
        let y = y_of_q(q)?;
        Ok(Self {
            y,
            q,
            a: a_unchecked(y),
        })
    }

    /// Residuals of the value and slope matching conditions at `x = y`.
    pub fn residuals(&self) -> (f64, f64) {
        let (s, c) = self.y.sin_cos();
        let value = c + self.q * s - (1.0 - self.a * self.y);
        let slope = -s + self.q * c + self.a;
        (value, slope)
    }
}

fn check_y(y: f64) -> Result<()> {
    let yb = y_bounds();
    if y >= yb.y_minus && y <= yb.y_plus - Y_PLUS_MARGIN {
        Ok(())
    } else {
        Err(domain("y", y, "y_minus <= y < y_plus"))
    }
}

fn check_q(q: f64) -> Result<()> {
    if q >= 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(domain("q", q, "finite q >= 0"))
    }
}

fn q_unchecked(y: f64) -> f64 {
    (lower_condition(y) / upper_condition(y)).max(0.0)
}

fn a_unchecked(y: f64) -> f64 {
    (1.0 - y.cos()) / upper_condition(y)
}

pub fn q_of_y(y: f64) -> Result<f64> {
    check_y(y)?;
    Ok(q_unchecked(y))
}

pub fn a_of_y(y: f64) -> Result<f64> {
    check_y(y)?;
    Ok(a_unchecked(y))
}

pub fn dq_dy(y: f64) -> Result<f64> {
    check_y(y)?;
    let d = upper_condition(y);
    Ok(y * (y - y.sin()) / (d * d))
}

pub fn da_dy(y: f64) -> Result<f64> {
    check_y(y)?;
    let d = upper_condition(y);
    let s = y.sin();
    Ok(s * (s - y) / (d * d))
}

/// Slope of `a(q)`, expressed through the tangency parameter `y = y(q)`.
pub fn da_dq(y: f64) -> Result<f64> {
    check_y(y)?;
    Ok(-y.sin() / y)
}

/// Unique `y` in `[y_minus, y_plus)` with `q(y) = q`.
///
/// Solves `N(y) - q D(y) = 0`, where `q(y) = N/D`. `D > 0` on the interval,
/// so this has the same root as `q(y) - q` but no pole at `y_plus`.
pub fn y_of_q(q: f64) -> Result<f64> {
    check_q(q)?;
    let yb = y_bounds();
    if q == 0.0 {
        return Ok(yb.y_minus);
    }
    let h = |y: f64| lower_condition(y) - q * upper_condition(y);
    let y = bracketed_root(h, &Bracket::new(yb.y_minus, yb.y_plus, INVERSION_TOL)?)?;
    Ok(y.clamp(yb.y_minus, yb.y_plus - Y_PLUS_MARGIN))
}

pub fn a_of_q(q: f64) -> Result<f64> {
    Ok(a_unchecked(y_of_q(q)?))
}

/// Outcome of sampling `cos x + q sin x - 1 + a(q) x` on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub min_gap: f64,
    pub argmin_x: f64,
}

/// Minimum over `x` in `(0, x_max]` (uniform grid of `n_samples` including
/// the origin) of the slack in the tangent inequality. Non-negative means
/// the inequality held at every sample. The origin is skipped in the
/// minimum because the slack there is identically zero.
pub fn check_tangent_inequality(q: f64, x_max: f64, n_samples: usize) -> Result<InequalityCheck> {
    check_q(q)?;
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(domain("x_max", x_max, "finite x_max > 0"));
    }
    if n_samples < 2 {
        return Err(domain("n_samples", n_samples as f64, "n_samples >= 2"));
    }
    let a = a_of_q(q)?;
    let step = x_max / (n_samples - 1) as f64;
    let mut best = InequalityCheck {
        min_gap: f64::INFINITY,
        argmin_x: 0.0,
    };
    for i in 1..n_samples {
        let x = step * i as f64;
        let gap = slack(q, a, x);
        if gap < best.min_gap {
            best = InequalityCheck {
                min_gap: gap,
                argmin_x: x,
            };
        }
    }
    Ok(best)
}

fn slack(q: f64, a: f64, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    c + q * s - 1.0 + a * x
}

/// `cos x + q sin x - 1 + a(q) x` at a single `x >= 0`.
pub fn tangent_slack(q: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(domain("x", x, "finite x >= 0"));
    }
    Ok(slack(q, a_of_q(q)?, x))
}

/// Window for the tangency abscissa implied by `q >= 0`.
pub fn tangency_window(q: f64) -> (f64, f64) {
    (PI - (1.0 / q).atan(), PI + q.atan())
}
