//! Bracketed scalar root solving and the two tangency-window constants.
//!
//! The tangency parameter of the optimal linear bound lives on
//! `[y_minus, y_plus)`, where
//!
//! * `y_minus` is the root of `1 - cos y - y sin y` in `(pi/2, pi)`,
//! * `y_plus` is the root of `sin y - y cos y` in `(pi, 3 pi/2)`.
//!
//! Both are found once with [`bracketed_root`] and cached.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use thiserror::Error;

/// Default absolute tolerance on the abscissa.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RootError {
    #[error("invalid bracket [{lo}, {hi}] with tol {tol}")]
    InvalidBracket { lo: f64, hi: f64, tol: f64 },

    #[error("no sign change: f({lo}) = {flo}, f({hi}) = {fhi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        flo: f64,
        fhi: f64,
    },

    #[error("no convergence after {iterations} iterations (bracket width {width:e})")]
    NoConvergence { iterations: usize, width: f64 },

    #[error("function not finite at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
    tol: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, tol: f64) -> Result<Self, RootError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && tol > 0.0) {
            return Err(RootError::InvalidBracket { lo, hi, tol });
        }
        Ok(Self { lo, hi, tol })
    }

    pub fn with_default_tol(lo: f64, hi: f64) -> Result<Self, RootError> {
        Self::new(lo, hi, DEFAULT_TOL)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

/// Finds a root of `f` inside `bracket`.
///
/// Regula-falsi steps are taken while they at least halve the bracket;
/// otherwise the next step is a plain bisection, so the bracket width is
/// guaranteed to shrink geometrically. The sign change is kept at every
/// step. The returned point is whichever final endpoint has the smaller
/// residual.
pub fn bracketed_root<F>(f: F, bracket: &Bracket) -> Result<f64, RootError>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut flo = eval(&f, lo)?;
    let mut fhi = eval(&f, hi)?;

    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoSignChange { lo, hi, flo, fhi });
    }

    let mut use_secant = true;
    for _ in 0..MAX_ITER {
        let width = hi - lo;
        let mid = lo + 0.5 * width;
        if width <= bracket.tol || mid <= lo || mid >= hi {
            return Ok(if flo.abs() <= fhi.abs() { lo } else { hi });
        }

        let mut x = mid;
        if use_secant {
            let s = hi - fhi * (hi - lo) / (fhi - flo);
            if s > lo && s < hi {
                x = s;
            }
        }

        let fx = eval(&f, x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        use_secant = hi - lo < 0.5 * width;
    }

    Err(RootError::NoConvergence {
        iterations: MAX_ITER,
        width: hi - lo,
    })
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, RootError> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(RootError::NonFinite { x })
    }
}

/// Ends of the admissible tangency interval `[y_minus, y_plus)`, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YBounds {
    pub y_minus: f64,
    pub y_plus: f64,
}

impl YBounds {
    /// `pi - y_plus / 2`: at or below this angle the inner maximum sits at
    /// the `y_plus` end.
    pub fn phi_low(&self) -> f64 {
        PI - 0.5 * self.y_plus
    }

    /// `pi - y_minus / 2`: above this angle the inner maximum sits at the
    /// `y_minus` end.
    pub fn phi_high(&self) -> f64 {
        PI - 0.5 * self.y_minus
    }
}

/// Left-end condition, zero at `y_minus`.
pub fn lower_condition(y: f64) -> f64 {
    1.0 - y.cos() - y * y.sin()
}

/// Right-end condition, zero at `y_plus`.
pub fn upper_condition(y: f64) -> f64 {
    y.sin() - y * y.cos()
}

pub fn compute_y_bounds(tol: f64) -> Result<YBounds, RootError> {
    let y_minus = bracketed_root(lower_condition, &Bracket::new(FRAC_PI_2, PI, tol)?)?;
    let y_plus = bracketed_root(upper_condition, &Bracket::new(PI, 1.5 * PI, tol)?)?;
    Ok(YBounds { y_minus, y_plus })
}

/// Cached [`YBounds`] at [`DEFAULT_TOL`].
pub fn y_bounds() -> YBounds {
    static CACHE: OnceLock<YBounds> = OnceLock::new();
    *CACHE.get_or_init(|| {
        compute_y_bounds(DEFAULT_TOL).expect("fixed analytic brackets always contain a root")
    })
}
