//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsl::bounds::{
    ab_arc_psi_range, alpha, arc_gap_ab, arc_gap_cd, cd_arc_psi_range, df_dy, f_of_y, lower_bound,
    mt_alpha, rho_sigma, upper_bound, Branch, DEFAULT_GRID,
};
use qsl::oracle::{minimax_bruteforce, two_level_min_time};
use qsl::qsim::{verify_limits, LimitsConfig};
use qsl::rootfind::{compute_y_bounds, y_bounds, DEFAULT_TOL};
use qsl::tangent_family::{a_of_y, check_tangent_inequality, da_dq, dq_dy, q_of_y};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn criterion(
    id: u32,
    name: &str,
    budget: Option<Duration>,
    body: impl FnOnce() -> Verdict,
) -> bool {
    let start = Instant::now();
    let v = body();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed < b);
    let passed = v.passed && in_time;
    let budget_note = match budget {
        Some(b) if !in_time => format!(" [over budget {b:?}]"),
        Some(b) => format!(" [budget {b:?}]"),
        None => String::new(),
    };
    println!(
        "{} {id}. {name}: {} ({elapsed:.3?}){budget_note}",
        if passed { "PASS" } else { "FAIL" },
        v.detail
    );
    passed
}

fn constants() -> Verdict {
    // Fresh solve, bypassing the cache, so the timing is real.
    let yb = compute_y_bounds(DEFAULT_TOL).expect("brackets are valid");
    let round4 = |x: f64| (x * 1e4).round() / 1e4;
    verdict(
        round4(yb.y_minus) == 2.3311 && round4(yb.y_plus) == 4.4934,
        format!("y_minus={:.6} y_plus={:.6}", yb.y_minus, yb.y_plus),
    )
}

fn equality() -> Verdict {
    let mut worst = (0.0, 0.0);
    for i in 1..100 {
        let d = i as f64 / 100.0;
        let gap = (lower_bound(d, DEFAULT_GRID).unwrap() - upper_bound(d).unwrap()).abs();
        if gap > worst.1 {
            worst = (d, gap);
        }
    }
    verdict(
        worst.1 <= 1e-6,
        format!("max |m-M| = {:.3e} at delta={}", worst.1, worst.0),
    )
}

fn oracles() -> Verdict {
    let mut brute_worst = 0.0f64;
    let mut two_level_worst = 0.0f64;
    for d in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let m = upper_bound(d).unwrap();
        brute_worst = brute_worst.max((minimax_bruteforce(d, 2048, 2048).unwrap().value - m).abs());
        two_level_worst = two_level_worst.max((two_level_min_time(d, 1.0).unwrap() - m).abs());
    }
    verdict(
        brute_worst <= 1e-4 && two_level_worst <= 1e-8,
        format!("minimax 2048x2048 err {brute_worst:.3e} (tol 1e-4), two-level err {two_level_worst:.3e} (tol 1e-8)"),
    )
}

fn endpoints() -> Verdict {
    let errs = [
        (alpha(0.0).unwrap() - 1.0).abs(),
        alpha(1.0).unwrap().abs(),
        (mt_alpha(0.0).unwrap() - FRAC_PI_2).abs(),
        mt_alpha(1.0).unwrap().abs(),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    verdict(worst <= 1e-12, format!("worst endpoint error {worst:.3e}"))
}

fn tangent_inequality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = (f64::NAN, f64::INFINITY);
    for _ in 0..1000 {
        let q = rng.random_range(0.0..=100.0);
        let gap = check_tangent_inequality(q, 50.0, 50_001).unwrap().min_gap;
        if gap < worst.1 {
            worst = (q, gap);
        }
    }
    verdict(
        worst.1 >= -1e-9,
        format!("min slack {:.3e} at q={:.4}", worst.1, worst.0),
    )
}

fn arc_gaps() -> Verdict {
    const SAMPLES: usize = 10_001;
    const ROUNDOFF: f64 = 1e-12;
    let yb = y_bounds();
    let mut min_gap = f64::INFINITY;
    let mut end_gap = 0.0f64;
    let mut notes = Vec::new();
    for d in [0.3, 0.6, 0.9] {
        type Gap = fn(f64, f64, Branch) -> qsl::Result<f64>;
        type Arc<'a> = (&'a str, Option<(f64, f64)>, f64, Gap);
        let arcs: [Arc; 2] = [
            (
                "AB",
                ab_arc_psi_range(d).unwrap(),
                0.5 * yb.y_plus,
                arc_gap_ab,
            ),
            (
                "CD",
                cd_arc_psi_range(d).unwrap(),
                0.5 * yb.y_minus,
                arc_gap_cd,
            ),
        ];
        for (name, range, psi_end, gap) in arcs {
            let Some((lo, hi)) = range else {
                notes.push(format!("{name} arc empty at delta={d}"));
                continue;
            };
            for i in 0..SAMPLES {
                let psi = lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64;
                for b in Branch::BOTH {
                    min_gap = min_gap.min(gap(psi, d, b).unwrap());
                }
            }
            for b in Branch::BOTH {
                end_gap = end_gap.max(gap(psi_end, d, b).unwrap().abs());
            }
        }
    }
    // The bracketed factor of each gap vanishes at its tangency end for any
    // delta, including one whose circle misses the arc.
    let factor_ab = (yb.y_plus - yb.y_plus.sin() / yb.y_plus.cos()).abs();
    let factor_cd = (yb.y_minus - (1.0 - yb.y_minus.cos()) / yb.y_minus.sin()).abs();
    end_gap = end_gap.max(factor_ab).max(factor_cd);
    let note = if notes.is_empty() {
        String::new()
    } else {
        format!("; {}", notes.join(", "))
    };
    verdict(
        min_gap >= -ROUNDOFF && end_gap <= 1e-8,
        format!("min gap {min_gap:.3e}, max |gap| at tangency end {end_gap:.3e}{note}"),
    )
}

fn speed_limits() -> Verdict {
    let cfg = LimitsConfig {
        trials: 10_000,
        d_max: 8,
        deltas: (0..10).map(|i| i as f64 / 10.0).collect(),
        seed: 1,
        ..LimitsConfig::default()
    };
    let r = verify_limits(&cfg).unwrap();
    verdict(
        r.total_violations() == 0 && r.saturation_checks == 10 && r.saturation_max_slack <= 1e-6,
        format!(
            "{} checks, {} skips, {} ML + {} MT violations, saturation slack {:.3e} over {} states",
            r.checks,
            r.skips,
            r.ml_violations,
            r.mt_violations,
            r.saturation_max_slack,
            r.saturation_checks
        ),
    )
}

fn derivatives() -> Verdict {
    let yb = y_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let h = 1e-6;
    let mismatch = |an: f64, fd: f64| (an - fd).abs() / (an.abs().max(fd.abs()) + 1e-3);
    let mut worst = [0.0f64; 3];
    for _ in 0..100 {
        let y = rng.random_range(yb.y_minus + 1e-4..yb.y_plus - 1e-4);
        let dq = (q_of_y(y + h).unwrap() - q_of_y(y - h).unwrap()) / (2.0 * h);
        worst[0] = worst[0].max(mismatch(dq_dy(y).unwrap(), dq));
        let da = (a_of_y(y + h).unwrap() - a_of_y(y - h).unwrap()) / (2.0 * h);
        worst[1] = worst[1].max(mismatch(da_dq(y).unwrap(), da / dq));
        let p = rho_sigma(rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..=1.0)).unwrap();
        let df = (f_of_y(y + h, &p).unwrap() - f_of_y(y - h, &p).unwrap()) / (2.0 * h);
        worst[2] = worst[2].max(mismatch(df_dy(y, &p).unwrap(), df));
    }
    verdict(
        worst.iter().all(|&w| w <= 1e-6),
        format!(
            "dq/dy {:.2e}, da/dq {:.2e}, dF/dy {:.2e} (tol 1e-6)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        criterion(
            1,
            "tangency constants",
            Some(Duration::from_millis(1)),
            constants,
        ),
        criterion(2, "lower/upper equality", Some(secs(10)), equality),
        criterion(3, "oracle triangulation", Some(secs(60)), oracles),
        criterion(4, "endpoints", None, endpoints),
        criterion(5, "tangent inequality", Some(secs(10)), tangent_inequality),
        criterion(6, "arc gaps", None, arc_gaps),
        criterion(7, "speed-limit Monte Carlo", Some(secs(120)), speed_limits),
        criterion(8, "derivative checks", None, derivatives),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
