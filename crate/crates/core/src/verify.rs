//! Named self-checks run by `qsl verify`.
//!
//! Every check yields a [`CheckOutcome`] with the measured worst-case
//! metric and the tolerance it was held to. The suite never stops early,
//! so a failing run still reports every check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    ab_arc_psi_range, arc_gap_ab, arc_gap_cd, cd_arc_psi_range, df_dy, f_of_y, lower_bound,
    rho_sigma, upper_bound, Branch,
};
use crate::error::Result;
use crate::oracle::{identity_suite, minimax_bruteforce, two_level_min_time};
use crate::report::Report;
use crate::rootfind::{lower_condition, upper_condition, y_bounds, YBounds};
use crate::tangent_family::{
    a_of_y, check_tangent_inequality, da_dq, dq_dy, q_of_y, Y_PLUS_MARGIN,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Outer grid for the lower bound.
    pub n_theta: usize,
    /// Tolerance on `max |m - M|`.
    pub equality_tol: f64,
    /// Brute-force minimax grid (same size in `theta` and `y`).
    pub oracle_grid: usize,
    pub oracle_tol: f64,
    pub two_level_tol: f64,
    pub identity_samples: usize,
    pub inequality_trials: usize,
    pub inequality_samples: usize,
    pub arc_samples: usize,
    pub derivative_points: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_theta: 512,
            equality_tol: 1e-6,
            oracle_grid: 2048,
            oracle_tol: 1e-4,
            two_level_tol: 1e-8,
            identity_samples: 10_000,
            inequality_trials: 1000,
            inequality_samples: 20_001,
            arc_samples: 2001,
            derivative_points: 100,
            seed: 0,
        }
    }
}

impl VerifyConfig {
    /// Coarse grids; the equality tolerance loosens to `1e-4`.
    pub fn quick() -> Self {
        Self {
            n_theta: 32,
            equality_tol: 1e-4,
            oracle_grid: 256,
            oracle_tol: 2e-3,
            identity_samples: 1000,
            inequality_trials: 100,
            inequality_samples: 5001,
            arc_samples: 201,
            derivative_points: 20,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    /// Passes when `metric <= tolerance`. NaN fails.
    fn at_most(name: &'static str, metric: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            passed: metric <= tolerance,
            metric,
            tolerance,
            detail,
        }
    }

    fn error(name: &'static str, err: impl std::fmt::Display) -> Self {
        Self {
            name,
            passed: false,
            metric: f64::NAN,
            tolerance: f64::NAN,
            detail: format!("error: {err}"),
        }
    }
}

fn run(name: &'static str, check: impl FnOnce() -> Result<CheckOutcome>) -> CheckOutcome {
    check().unwrap_or_else(|e| CheckOutcome::error(name, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        for c in &self.checks {
            r.flag(format!("{}.passed", c.name), c.passed)
                .real(format!("{}.metric", c.name), c.metric)
                .real(format!("{}.tolerance", c.name), c.tolerance)
                .text(format!("{}.detail", c.name), c.detail.clone());
        }
        r.flag("all_passed", self.passed());
        r
    }
}

pub fn verify(cfg: &VerifyConfig) -> VerifyReport {
    verify_with_bounds(cfg, y_bounds())
}

/// Runs the suite with the constants check applied to `yb` instead of the
/// library's own values, so a corrupted pair is caught and named.
pub fn verify_with_bounds(cfg: &VerifyConfig, yb: YBounds) -> VerifyReport {
    VerifyReport {
        checks: vec![
            run("constants", || Ok(check_constants(yb))),
            run("equality", || check_equality(cfg)),
            run("oracle_minimax", || check_minimax(cfg)),
            run("oracle_two_level", || check_two_level(cfg)),
            run("identities", || Ok(check_identities(cfg))),
            run("tangent_inequality", || check_inequality(cfg)),
            run("arc_gaps", || check_arc_gaps(cfg)),
            run("derivatives", || check_derivatives(cfg)),
        ],
    }
}

pub const CONSTANTS_TOL: f64 = 1e-10;

/// Both tangency constants are roots of their defining conditions, sit in
/// their brackets, satisfy their tangent identities, and round to the
/// published four-decimal values.
pub fn check_constants(yb: YBounds) -> CheckOutcome {
    let YBounds { y_minus, y_plus } = yb;
    let residual = [
        lower_condition(y_minus).abs(),
        upper_condition(y_plus).abs(),
        ((0.5 * y_minus).tan() - y_minus).abs() / y_minus,
        (y_plus.tan() - y_plus).abs() / y_plus,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let bracketed = (PI / 2.0..=PI).contains(&y_minus) && (PI..=1.5 * PI).contains(&y_plus);
    let rounded = round4(y_minus) == 2.3311 && round4(y_plus) == 4.4934;
    let mut out = CheckOutcome::at_most(
        "constants",
        residual,
        CONSTANTS_TOL,
        format!("y_minus={y_minus:.12} y_plus={y_plus:.12}"),
    );
    out.passed &= bracketed && rounded;
    out
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// `0.01, 0.02, ..., 0.99`.
pub fn equality_deltas() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

/// `0.1, 0.3, 0.5, 0.7, 0.9`.
pub const ORACLE_DELTAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

pub const ARC_DELTAS: [f64; 3] = [0.3, 0.6, 0.9];

fn check_equality(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let gaps: Vec<(f64, f64)> = equality_deltas()
        .into_par_iter()
        .map(|d| Ok((d, (lower_bound(d, cfg.n_theta)? - upper_bound(d)?).abs())))
        .collect::<Result<_>>()?;
    let (delta, gap) = worst(&gaps);
    Ok(CheckOutcome::at_most(
        "equality",
        gap,
        cfg.equality_tol,
        format!("max |m-M| over 99 deltas at delta={delta}"),
    ))
}

fn check_minimax(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let errs: Vec<(f64, f64)> = ORACLE_DELTAS
        .iter()
        .map(|&d| {
            let brute = minimax_bruteforce(d, cfg.oracle_grid, cfg.oracle_grid)?.value;
            Ok((d, (brute - upper_bound(d)?).abs()))
        })
        .collect::<Result<_>>()?;
    let (delta, err) = worst(&errs);
    Ok(CheckOutcome::at_most(
        "oracle_minimax",
        err,
        cfg.oracle_tol,
        format!("grid {0}x{0}, worst at delta={delta}", cfg.oracle_grid),
    ))
}

fn check_two_level(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let errs: Vec<(f64, f64)> = ORACLE_DELTAS
        .iter()
        .map(|&d| Ok((d, (two_level_min_time(d, 1.0)? - upper_bound(d)?).abs())))
        .collect::<Result<_>>()?;
    let (delta, err) = worst(&errs);
    Ok(CheckOutcome::at_most(
        "oracle_two_level",
        err,
        cfg.two_level_tol,
        format!("worst at delta={delta}"),
    ))
}

pub const IDENTITY_TOL: f64 = 1e-9;

fn check_identities(cfg: &VerifyConfig) -> CheckOutcome {
    let r = identity_suite(cfg.identity_samples, cfg.seed);
    CheckOutcome::at_most(
        "identities",
        r.max_violation(),
        IDENTITY_TOL,
        format!("{} samples, seed {}", r.n_samples, r.seed),
    )
}

pub const INEQUALITY_TOL: f64 = 1e-9;

/// Seeded `q` uniform in `[0, 100]`; the slack is sampled on `[0, 50]`.
pub fn tangent_inequality_worst(trials: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qs: Vec<f64> = (0..trials).map(|_| rng.random_range(0.0..=100.0)).collect();
    let mins: Vec<(f64, f64)> = qs
        .into_par_iter()
        .map(|q| Ok((q, check_tangent_inequality(q, 50.0, samples)?.min_gap)))
        .collect::<Result<_>>()?;
    Ok(mins.into_iter().fold(
        (f64::NAN, f64::INFINITY),
        |a, b| if b.1 < a.1 { b } else { a },
    ))
}

fn check_inequality(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let (q, min) =
        tangent_inequality_worst(cfg.inequality_trials, cfg.inequality_samples, cfg.seed)?;
    Ok(CheckOutcome::at_most(
        "tangent_inequality",
        -min,
        INEQUALITY_TOL,
        format!("min slack {min:e} at q={q}"),
    ))
}

pub const ARC_ZERO_TOL: f64 = 1e-8;

/// Rounding allowance for "non-negative": at the tangency end the gap is a
/// difference of equal quantities.
pub const ARC_ROUNDOFF: f64 = 1e-12;

/// Arc-gap summary for one `delta`: most negative gap on each arc and the
/// gap magnitude where each arc meets its tangency end. `None` fields mark
/// an arc the circle does not reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcGapSummary {
    pub delta: f64,
    pub ab_min: Option<f64>,
    pub ab_end: Option<f64>,
    pub cd_min: Option<f64>,
    pub cd_end: Option<f64>,
}

pub fn arc_gap_summary(delta: f64, samples: usize) -> Result<ArcGapSummary> {
    let yb = y_bounds();
    let samples = samples.max(2);
    let grid = |(lo, hi): (f64, f64)| {
        (0..samples).map(move |i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
    };
    let scan = |range: Option<(f64, f64)>,
                gap: fn(f64, f64, Branch) -> Result<f64>|
     -> Result<Option<f64>> {
        let Some(range) = range else { return Ok(None) };
        let mut min = f64::INFINITY;
        for psi in grid(range) {
            for b in Branch::BOTH {
                min = min.min(gap(psi, delta, b)?);
            }
        }
        Ok(Some(min))
    };
    let end = |range: Option<(f64, f64)>,
               psi: f64,
               gap: fn(f64, f64, Branch) -> Result<f64>|
     -> Result<Option<f64>> {
        if range.is_none() {
            return Ok(None);
        }
        let mut worst = 0.0f64;
        for b in Branch::BOTH {
            worst = worst.max(gap(psi, delta, b)?.abs());
        }
        Ok(Some(worst))
    };
    let ab = ab_arc_psi_range(delta)?;
    let cd = cd_arc_psi_range(delta)?;
    Ok(ArcGapSummary {
        delta,
        ab_min: scan(ab, arc_gap_ab)?,
        ab_end: end(ab, 0.5 * yb.y_plus, arc_gap_ab)?,
        cd_min: scan(cd, arc_gap_cd)?,
        cd_end: end(cd, 0.5 * yb.y_minus, arc_gap_cd)?,
    })
}

fn check_arc_gaps(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let mut worst_neg = 0.0f64;
    let mut worst_end = 0.0f64;
    let mut empty = Vec::new();
    for &d in &ARC_DELTAS {
        let s = arc_gap_summary(d, cfg.arc_samples)?;
        for (min, end, arc) in [(s.ab_min, s.ab_end, "AB"), (s.cd_min, s.cd_end, "CD")] {
            match (min, end) {
                (Some(m), Some(e)) => {
                    worst_neg = worst_neg.max(-m);
                    worst_end = worst_end.max(e);
                }
                _ => empty.push(format!("{arc}@{d}")),
            }
        }
    }
    let mut out = CheckOutcome::at_most(
        "arc_gaps",
        worst_end,
        ARC_ZERO_TOL,
        format!(
            "most negative gap {:e}; empty arcs: {}",
            -worst_neg,
            if empty.is_empty() {
                "none".into()
            } else {
                empty.join(" ")
            }
        ),
    );
    out.passed &= worst_neg <= ARC_ROUNDOFF;
    Ok(out)
}

/// Relative agreement used for finite-difference checks, with a small
/// absolute floor for derivatives that vanish.
pub fn derivative_mismatch(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs().max(numeric.abs()) + 1e-3)
}

pub const DERIVATIVE_TOL: f64 = 1e-6;

/// Worst mismatch between `dq/dy`, `da/dq`, `dF/dy` and central
/// differences of their parents at `n` seeded interior points.
pub fn derivative_worst(n: usize, seed: u64) -> Result<f64> {
    let yb = y_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let lo = yb.y_minus + 10.0 * h;
    let hi = yb.y_plus - 10.0 * h - Y_PLUS_MARGIN;
    let mut worst = 0.0f64;
    for _ in 0..n {
        let y = rng.random_range(lo..hi);
        let dq = (q_of_y(y + h)? - q_of_y(y - h)?) / (2.0 * h);
        worst = worst.max(derivative_mismatch(dq_dy(y)?, dq));
        let da_chain = (a_of_y(y + h)? - a_of_y(y - h)?) / (q_of_y(y + h)? - q_of_y(y - h)?);
        worst = worst.max(derivative_mismatch(da_dq(y)?, da_chain));
        let p = rho_sigma(rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..1.0))?;
        let df = (f_of_y(y + h, &p)? - f_of_y(y - h, &p)?) / (2.0 * h);
        worst = worst.max(derivative_mismatch(df_dy(y, &p)?, df));
    }
    Ok(worst)
}

fn check_derivatives(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let worst = derivative_worst(cfg.derivative_points, cfg.seed)?;
    Ok(CheckOutcome::at_most(
        "derivatives",
        worst,
        DERIVATIVE_TOL,
        format!("{} points", cfg.derivative_points),
    ))
}

fn worst(pairs: &[(f64, f64)]) -> (f64, f64) {
    pairs
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |a, b| {
            if b.1 > a.1 || b.1.is_nan() {
                b
            } else {
                a
            }
        })
}
