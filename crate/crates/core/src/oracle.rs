//! Brute-force cross-checks that share no closed forms with [`crate::bounds`].
//!
//! * [`minimax_bruteforce`] evaluates the inner objective on a dense
//!   `(theta, y)` grid with no case analysis.
//! * [`two_level_min_time`] minimizes the exact passage time of the
//!   two-level family over its mixing parameter.
//! * [`identity_suite`] spot-checks the algebraic rewrites the closed form
//!   relies on.

use std::f64::consts::{FRAC_2_PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{f_max_arccos, f_max_formula, omega_to_z, rho_sigma};
use crate::error::{check_delta, domain, Result};
use crate::minimize::grid_then_golden;
use crate::report::Report;
use crate::rootfind::y_bounds;

pub const MIN_GRID: usize = 64;

/// Grid points for the two-level mixing parameter.
pub const XI_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxReport {
    pub delta: f64,
    pub value: f64,
    pub argmin_theta: f64,
    pub argmax_y_per_theta: Vec<f64>,
    pub grid_sizes: (usize, usize),
}

impl MinimaxReport {
    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.real("delta", self.delta)
            .real("value", self.value)
            .real("argmin_theta", self.argmin_theta)
            .int("n_theta", self.grid_sizes.0)
            .int("n_y", self.grid_sizes.1);
        r
    }
}

/// `(2/pi) min_theta max_y F(y; theta, delta)` on a `theta` grid over
/// `[0, 2 pi)` and a closed `y` grid over `[y_minus, y_plus]`.
pub fn minimax_bruteforce(delta: f64, n_theta: usize, n_y: usize) -> Result<MinimaxReport> {
    check_delta(delta)?;
    if n_theta < MIN_GRID || n_y < MIN_GRID {
        return Err(domain("grid size", n_theta.min(n_y) as f64, "grids >= 64"));
    }
    let yb = y_bounds();
    let y_step = (yb.y_plus - yb.y_minus) / (n_y - 1) as f64;
    // F = rho * A(y) + sigma * B(y), with A and B independent of theta.
    let coeffs: Vec<(f64, f64, f64)> = (0..n_y)
        .map(|j| {
            let y = if j == n_y - 1 {
                yb.y_plus
            } else {
                yb.y_minus + y_step * j as f64
            };
            let (s, c) = y.sin_cos();
            let w = 1.0 - c;
            (y, (s - y * c) / w, (1.0 - c - y * s) / w)
        })
        .collect();

    let inner: Vec<(f64, f64)> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = TAU * i as f64 / n_theta as f64;
            let p = rho_sigma(theta, delta).expect("delta checked above");
            coeffs
                .iter()
                .map(|&(y, a, b)| (y, p.rho * a + p.sigma * b))
                .fold((yb.y_minus, f64::NEG_INFINITY), |acc, v| {
                    if v.1 > acc.1 {
                        v
                    } else {
                        acc
                    }
                })
        })
        .collect();

    let (best_i, best) =
        inner.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (i, v)| if v.1 < acc.1 { (i, v.1) } else { acc },
        );

    Ok(MinimaxReport {
        delta,
        value: FRAC_2_PI * best,
        argmin_theta: TAU * best_i as f64 / n_theta as f64,
        argmax_y_per_theta: inner.into_iter().map(|(y, _)| y).collect(),
        grid_sizes: (n_theta, n_y),
    })
}

fn check_e0(e0: f64) -> Result<()> {
    if e0 > 0.0 && e0.is_finite() {
        Ok(())
    } else {
        Err(domain("E0", e0, "finite E0 > 0"))
    }
}

/// Earliest `t >= 0` at which the state `sqrt(1 - xi^2)|0> + xi|E0>`
/// reaches fidelity `delta`; `None` if its fidelity never drops that low.
///
/// The fidelity is `(1-u)^2 + u^2 + 2u(1-u) cos(E0 t)` with `u = xi^2`.
pub fn two_level_passage_time(xi: f64, delta: f64, e0: f64) -> Result<Option<f64>> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(domain("xi", xi, "0 < xi < 1"));
    }
    check_delta(delta)?;
    check_e0(e0)?;
    let u = xi * xi;
    let v = 1.0 - u;
    let c = (delta - v * v - u * u) / (2.0 * u * v);
    if c < -1.0 - 1e-12 {
        return Ok(None);
    }
    Ok(Some(c.clamp(-1.0, 1.0).acos() / e0))
}

/// `min_xi (2/pi) xi^2 E0 t(xi)` over the reachable mixing parameters.
/// Dimensionless and independent of `E0`.
pub fn two_level_min_time(delta: f64, e0: f64) -> Result<f64> {
    Ok(two_level_argmin(delta, e0)?.1)
}

/// `(xi*, value)` for [`two_level_min_time`].
pub fn two_level_argmin(delta: f64, e0: f64) -> Result<(f64, f64)> {
    check_delta(delta)?;
    check_e0(e0)?;
    // Reachable iff the minimum fidelity (1 - 2 xi^2)^2 is at most delta.
    let r = delta.sqrt();
    let lo = ((1.0 - r) / 2.0).sqrt().max(f64::EPSILON);
    let hi = ((1.0 + r) / 2.0).sqrt().min(1.0 - f64::EPSILON);
    let objective = |xi: f64| match two_level_passage_time(xi, delta, e0) {
        Ok(Some(t)) => FRAC_2_PI * xi * xi * e0 * t,
        _ => f64::INFINITY,
    };
    Ok(grid_then_golden(objective, lo, hi, XI_GRID, 1e-12))
}

/// Largest violations found by [`identity_suite`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub n_samples: usize,
    pub double_angle: f64,
    pub omega_z_endpoints: f64,
    pub omega_z_monotone: bool,
    pub f_max_forms: f64,
}

impl IdentityReport {
    pub fn max_violation(&self) -> f64 {
        let mono = if self.omega_z_monotone {
            0.0
        } else {
            f64::INFINITY
        };
        self.double_angle
            .max(self.omega_z_endpoints)
            .max(self.f_max_forms)
            .max(mono)
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.int("seed", self.seed)
            .int("n_samples", self.n_samples)
            .real("double_angle", self.double_angle)
            .real("omega_z_endpoints", self.omega_z_endpoints)
            .flag("omega_z_monotone", self.omega_z_monotone)
            .real("f_max_forms", self.f_max_forms)
            .real("max_violation", self.max_violation());
        r
    }
}

/// Randomized checks of `arccos(2 t^2 - 1) = 2 arccos t`, the `omega -> z`
/// bijection, and agreement of the two interior-maximum forms.
pub fn identity_suite(n_samples: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IdentityReport {
        seed,
        n_samples,
        double_angle: 0.0,
        omega_z_endpoints: 0.0,
        omega_z_monotone: true,
        f_max_forms: 0.0,
    };

    for _ in 0..n_samples {
        let tau: f64 = rng.random();
        let lhs = (2.0 * tau * tau - 1.0).clamp(-1.0, 1.0).acos();
        report.double_angle = report.double_angle.max((lhs - 2.0 * tau.acos()).abs());

        let delta: f64 = rng.random_range(0.0..1.0);
        let r = delta.sqrt();
        // Endpoints swap: z(sqrt d) = -sqrt d, z(-sqrt d) = sqrt d.
        if let (Ok(a), Ok(b)) = (omega_to_z(r, delta), omega_to_z(-r, delta)) {
            let err = (a + r).abs().max((b - r).abs());
            report.omega_z_endpoints = report.omega_z_endpoints.max(err);
        }
        let w1 = rng.random_range(-r..=r);
        let w2 = rng.random_range(-r..=r);
        if let (Ok(z1), Ok(z2)) = (omega_to_z(w1.min(w2), delta), omega_to_z(w1.max(w2), delta)) {
            if w1 != w2 && z1 <= z2 {
                report.omega_z_monotone = false;
            }
        }

        let theta = rng.random_range(0.0..TAU);
        if let Ok(p) = rho_sigma(theta, delta) {
            if let (Ok(a), Ok(b)) = (f_max_formula(&p), f_max_arccos(&p)) {
                report.f_max_forms = report.f_max_forms.max((a - b).abs());
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::upper_bound;
    use std::f64::consts::PI;

    #[test]
    fn minimax_at_zero_fidelity() {
        let r = minimax_bruteforce(0.0, 64, 256).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4);
        assert_eq!(r.argmax_y_per_theta.len(), 64);
        let yb = y_bounds();
        assert!(r
            .argmax_y_per_theta
            .iter()
            .all(|&y| y >= yb.y_minus && y <= yb.y_plus));
    }

    #[test]
    fn minimax_rejects_small_grids() {
        assert!(minimax_bruteforce(0.5, 32, 128).is_err());
        assert!(minimax_bruteforce(1.5, 128, 128).is_err());
    }

    #[test]
    fn minimax_error_within_shrinking_envelope() {
        // Outer-grid error is quadratic in the theta step; it plateaus when a
        // doubling adds no point nearer the minimizer, so only the envelope
        // shrinks monotonically.
        for delta in [0.1, 0.2, 0.5, 0.8, 0.9] {
            let exact = upper_bound(delta).unwrap();
            let mut first = None;
            for n in [64, 128, 256, 512, 1024] {
                let err = (minimax_bruteforce(delta, n, n).unwrap().value - exact).abs();
                let h = TAU / n as f64;
                // Outer curvature in theta stays below ~10 for delta <= 0.9.
                assert!(err <= 3.0 * h * h, "{delta} n={n}: {err:e}");
                first.get_or_insert(err);
                if n == 1024 {
                    assert!(err < first.unwrap() / 5.0, "{delta}: {err:e}");
                }
            }
        }
    }

    #[test]
    fn passage_time_examples() {
        let xi = 0.5f64.sqrt();
        let t = two_level_passage_time(xi, 0.0, 1.0).unwrap().unwrap();
        assert!((t - PI).abs() < 1e-7);
        assert_eq!(
            two_level_passage_time(0.9f64.sqrt(), 0.0, 1.0).unwrap(),
            None
        );
        assert!(two_level_passage_time(0.0, 0.5, 1.0).is_err());
        assert!(two_level_passage_time(0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn passage_time_plug_back() {
        for &(xi, delta) in &[(0.3, 0.8), (0.6, 0.2), (0.7, 0.5), (0.9, 0.9)] {
            let Some(t) = two_level_passage_time(xi, delta, 2.0).unwrap() else {
                continue;
            };
            let u: f64 = xi * xi;
            let f = (1.0 - u).powi(2) + u * u + 2.0 * u * (1.0 - u) * (2.0 * t).cos();
            assert!((f - delta).abs() < 1e-10);
        }
    }

    #[test]
    fn reachability_frontier() {
        for delta in [0.1f64, 0.4, 0.7] {
            let u_edge = (1.0 + delta.sqrt()) / 2.0;
            let inside = (u_edge - 1e-9).sqrt();
            let outside = (u_edge + 1e-9).sqrt();
            assert!(two_level_passage_time(inside, delta, 1.0)
                .unwrap()
                .is_some());
            assert!(two_level_passage_time(outside, delta, 1.0)
                .unwrap()
                .is_none());
        }
    }

    #[test]
    fn two_level_min_examples() {
        assert!((two_level_min_time(0.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let a = two_level_min_time(0.5, 1.0).unwrap();
        assert!((a - upper_bound(0.5).unwrap()).abs() < 1e-8);
        assert!((a - two_level_min_time(0.5, 7.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn identities_hold() {
        let r = identity_suite(10_000, 11);
        assert!(r.max_violation() <= 1e-12, "{r:?}");
        assert_eq!(identity_suite(100, 5), identity_suite(100, 5));
        let tau: f64 = 0.0;
        assert!(((2.0 * tau * tau - 1.0).acos() - 2.0 * tau.acos()).abs() < 1e-15);
    }
}
