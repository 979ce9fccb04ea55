//! Pure-state evolution under a time-independent Hamiltonian, given as the
//! spectrum restricted to the state's support.
//!
//! The fidelity `|<psi(0)|psi(t)>|^2 = |sum_k p_k exp(-i E_k t)|^2` depends
//! only on the weights `p_k = |c_k|^2` and the energies. First-passage times
//! to a target fidelity are measured on a time grid and refined by
//! bracketed root solving, then compared against both speed limits.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{alpha, mt_alpha, upper_bound_argmin};
use crate::error::{check_delta, domain, Error, Result};
use crate::report::Report;
use crate::rootfind::{bracketed_root, Bracket};

/// Amplitudes below this modulus are treated as absent.
pub const AMPLITUDE_CUTOFF: f64 = 1e-15;

pub const NORM_TOL: f64 = 1e-12;

/// Bound checks tolerate this much shortfall on the bound side.
pub const BOUND_SLACK: f64 = 1e-9;

/// A local fidelity minimum within this distance above the target counts
/// as reaching it.
const TOUCH_TOL: f64 = 1e-12;

const MIN_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    #[serde(serialize_with = "ser_complex")]
    pub amplitude: Complex64,
}

fn ser_complex<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&c.re)?;
    t.serialize_element(&c.im)?;
    t.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumState {
    levels: Vec<Level>,
}

impl QuantumState {
    /// Builds a state from `(energy, amplitude)` pairs. The amplitudes must
    /// already be normalized.
    pub fn new(levels: impl IntoIterator<Item = (f64, Complex64)>) -> Result<Self> {
        let levels: Vec<Level> = levels
            .into_iter()
            .map(|(energy, amplitude)| Level { energy, amplitude })
            .collect();
        if let Some(bad) = levels
            .iter()
            .find(|l| !l.energy.is_finite() || !l.amplitude.is_finite())
        {
            return Err(Error::State(format!("non-finite level {bad:?}")));
        }
        let norm: f64 = levels.iter().map(|l| l.amplitude.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::State(format!("squared norm {norm} differs from 1")));
        }
        let levels: Vec<Level> = levels
            .into_iter()
            .filter(|l| l.amplitude.norm() >= AMPLITUDE_CUTOFF)
            .collect();
        if levels.is_empty() {
            return Err(Error::State("no level with nonzero amplitude".into()));
        }
        Ok(Self { levels })
    }

    /// Like [`QuantumState::new`] but rescales the amplitudes first.
    pub fn normalized(levels: impl IntoIterator<Item = (f64, Complex64)>) -> Result<Self> {
        let levels: Vec<(f64, Complex64)> = levels.into_iter().collect();
        let norm = levels.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::State(format!("cannot normalize, norm = {norm}")));
        }
        Self::new(levels.into_iter().map(|(e, c)| (e, c / norm)))
    }

    /// `sqrt(1 - xi^2)|0> + xi|e0>`.
    pub fn two_level(xi: f64, e0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(domain("xi", xi, "0 <= xi <= 1"));
        }
        Self::new([
            (0.0, Complex64::new((1.0 - xi * xi).sqrt(), 0.0)),
            (e0, Complex64::new(xi, 0.0)),
        ])
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn dimension(&self) -> usize {
        self.levels.len()
    }

    /// Same state with every energy shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            levels: self
                .levels
                .iter()
                .map(|l| Level {
                    energy: l.energy + offset,
                    ..*l
                })
                .collect(),
        }
    }

    /// Lowest energy carrying amplitude.
    pub fn ground_energy(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| l.energy)
            .fold(f64::INFINITY, f64::min)
    }

    fn weights(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.levels
            .iter()
            .map(|l| (l.energy, l.amplitude.norm_sqr()))
    }

    pub fn mean_energy(&self) -> f64 {
        self.weights().map(|(e, p)| p * e).sum()
    }

    /// `sqrt(<H^2> - <H>^2)`, computed about the mean.
    pub fn dispersion(&self) -> f64 {
        let mean = self.mean_energy();
        self.weights()
            .map(|(e, p)| p * (e - mean).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `<H - E0>` with `E0` the ground energy of the support.
    pub fn mean_excess_energy(&self) -> f64 {
        let e0 = self.ground_energy();
        self.weights()
            .map(|(e, p)| p * (e - e0))
            .sum::<f64>()
            .max(0.0)
    }

    /// Overlap amplitude `sum_k p_k exp(-i (E_k - E0) t)` and its time
    /// derivative. The global phase `exp(-i E0 t)` drops out of the modulus.
    fn overlap(&self, t: f64) -> (Complex64, Complex64) {
        let e0 = self.ground_energy();
        self.weights().fold(
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            |(s, ds), (e, p)| {
                let w = e - e0;
                let z = Complex64::from_polar(p, -w * t);
                (s + z, ds + z * Complex64::new(0.0, -w))
            },
        )
    }

    /// Sum of the weights, within `NORM_TOL` of 1. Dividing by its square
    /// makes the fidelity exactly 1 at `t = 0`.
    fn total_weight(&self) -> f64 {
        self.weights().map(|(_, p)| p).sum()
    }

    pub fn fidelity(&self, t: f64) -> f64 {
        self.overlap(t).0.norm_sqr() / self.total_weight().powi(2)
    }

    pub fn fidelity_derivative(&self, t: f64) -> f64 {
        let (s, ds) = self.overlap(t);
        2.0 * (s.conj() * ds).re / self.total_weight().powi(2)
    }

    /// Smallest and largest nonzero distances between support energies.
    pub fn gap_range(&self) -> Option<(f64, f64)> {
        let mut energies: Vec<f64> = self.levels.iter().map(|l| l.energy).collect();
        energies.sort_by(f64::total_cmp);
        energies.dedup();
        let min = energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let max = energies.last()? - energies.first()?;
        (max > 0.0).then_some((min, max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassageResult {
    /// First time the fidelity falls to the target.
    pub t_star: Option<f64>,
    /// Fidelity at `t_star`, or the lowest fidelity seen if absent.
    pub achieved_fidelity: f64,
    pub horizon: f64,
}

/// `mult * 2 pi / gap_min`; `None` for a stationary state.
pub fn default_horizon(state: &QuantumState, mult: f64) -> Option<f64> {
    state.gap_range().map(|(min, _)| mult * TAU / min)
}

/// Grid size giving `per_period` points per period of the fastest beat
/// over `horizon`, clamped to `[16, cap]`.
pub fn grid_for(state: &QuantumState, horizon: f64, per_period: usize, cap: usize) -> usize {
    let Some((_, max_gap)) = state.gap_range() else {
        return MIN_GRID;
    };
    let periods = horizon * max_gap / TAU;
    ((periods * per_period as f64).ceil() as usize).clamp(MIN_GRID, cap.max(MIN_GRID))
}

fn check_passage_args(horizon: f64, n_grid: usize) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain("horizon", horizon, "finite horizon > 0"));
    }
    if n_grid < MIN_GRID {
        return Err(domain("n_grid", n_grid as f64, "n_grid >= 16"));
    }
    Ok(())
}

pub fn first_passage(
    state: &QuantumState,
    delta: f64,
    horizon: f64,
    n_grid: usize,
) -> Result<PassageResult> {
    Ok(first_passages(state, &[delta], horizon, n_grid)?[0])
}

/// First passage to each target in one scan of the time grid.
///
/// A crossing is detected either as a grid point at or below the target,
/// or as a local minimum (sign change of the derivative) that dips to the
/// target between grid points. Dips narrower than the grid spacing and
/// containing no derivative sign change at grid points can be missed; a
/// miss only ever delays `t_star`.
pub fn first_passages(
    state: &QuantumState,
    deltas: &[f64],
    horizon: f64,
    n_grid: usize,
) -> Result<Vec<PassageResult>> {
    for &d in deltas {
        check_delta(d)?;
    }
    check_passage_args(horizon, n_grid)?;

    let mut results: Vec<PassageResult> = deltas
        .iter()
        .map(|_| PassageResult {
            t_star: None,
            achieved_fidelity: 1.0,
            horizon,
        })
        .collect();
    let mut pending: Vec<usize> = Vec::with_capacity(deltas.len());
    for (i, &d) in deltas.iter().enumerate() {
        if d >= 1.0 {
            results[i].t_star = Some(0.0);
        } else {
            pending.push(i);
        }
    }

    let h = horizon / n_grid as f64;
    let e0 = state.ground_energy();
    let weights: Vec<(f64, f64)> = state.weights().map(|(e, p)| (e - e0, p)).collect();
    let scale = state.total_weight().powi(2);
    let steps: Vec<Complex64> = weights
        .iter()
        .map(|&(w, _)| Complex64::from_polar(1.0, -w * h))
        .collect();
    let mut phases: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); weights.len()];
    let mut lowest = 1.0f64;

    let (mut t0, mut g0) = (0.0, 0.0);
    for i in 1..=n_grid {
        if pending.is_empty() {
            break;
        }
        let t1 = h * i as f64;
        // Phase recurrence, resynchronized periodically against drift.
        if i % 1024 == 0 {
            for (z, &(w, _)) in phases.iter_mut().zip(&weights) {
                *z = Complex64::from_polar(1.0, -w * t1);
            }
        } else {
            for (z, s) in phases.iter_mut().zip(&steps) {
                *z *= s;
            }
        }
        let (s, ds) = phases.iter().zip(&weights).fold(
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            |(s, ds), (z, &(w, p))| (s + z * p, ds + z * Complex64::new(0.0, -w * p)),
        );
        let f1 = s.norm_sqr() / scale;
        let g1 = 2.0 * (s.conj() * ds).re / scale;
        lowest = lowest.min(f1);

        let mut dip: Option<(f64, f64)> = None;
        let mut k = 0;
        while k < pending.len() {
            let idx = pending[k];
            let target = deltas[idx];
            let found = if f1 <= target {
                Some(crossing(state, target, t0, t1)?)
            } else if g0 < 0.0 && g1 > 0.0 {
                let (tm, fm) = match dip {
                    Some(d) => d,
                    None => {
                        let tm = local_minimum(state, t0, t1)?;
                        *dip.insert((tm, state.fidelity(tm)))
                    }
                };
                lowest = lowest.min(fm);
                if fm < target {
                    Some(crossing(state, target, t0, tm)?)
                } else if fm - target <= TOUCH_TOL {
                    Some(tm)
                } else {
                    None
                }
            } else {
                None
            };
            match found {
                Some(t) => {
                    results[idx].t_star = Some(t);
                    results[idx].achieved_fidelity = state.fidelity(t);
                    pending.swap_remove(k);
                }
                None => k += 1,
            }
        }
        (t0, g0) = (t1, g1);
    }

    for &idx in &pending {
        results[idx].achieved_fidelity = lowest;
    }
    Ok(results)
}

fn root_tol(t: f64) -> f64 {
    1e-14 * t.max(1.0)
}

/// Zero of the fidelity derivative in `[a, b]`. The scan saw the sign
/// change through the phase recurrence; direct evaluation near a flat
/// minimum can disagree in the last bits, so the endpoints are rechecked.
fn local_minimum(state: &QuantumState, a: f64, b: f64) -> Result<f64> {
    let g = |t| state.fidelity_derivative(t);
    if g(a) >= 0.0 {
        return Ok(a);
    }
    if g(b) <= 0.0 {
        return Ok(b);
    }
    Ok(bracketed_root(g, &Bracket::new(a, b, root_tol(b))?)?)
}

/// Down-crossing of `target` in `[a, b]`, where the scan saw
/// `f(a) > target >= f(b)`.
fn crossing(state: &QuantumState, target: f64, a: f64, b: f64) -> Result<f64> {
    if state.fidelity(a) <= target {
        return Ok(a);
    }
    if state.fidelity(b) >= target {
        return Ok(b);
    }
    Ok(bracketed_root(
        |t| state.fidelity(t) - target,
        &Bracket::new(a, b, root_tol(b))?,
    )?)
}

/// Generalized Margolus-Levitin bound `(pi/2) alpha(delta) / <H - E0>`.
/// `+inf` if the state has no excess energy and the target is below 1.
pub fn ml_bound(state: &QuantumState, delta: f64) -> Result<f64> {
    Ok(ratio_bound(
        FRAC_PI_2 * alpha(delta)?,
        state.mean_excess_energy(),
    ))
}

/// Mandelstam-Tamm bound `arccos(sqrt(delta)) / dE`.
pub fn mt_bound(state: &QuantumState, delta: f64) -> Result<f64> {
    Ok(ratio_bound(mt_alpha(delta)?, state.dispersion()))
}

fn ratio_bound(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Energies uniform on `[0, e_max]` (sorted), amplitudes uniform on the
/// complex unit sphere in `d` dimensions.
pub fn sample_random_state(d: usize, e_max: f64, seed: u64) -> Result<QuantumState> {
    sample_state_with(&mut ChaCha8Rng::seed_from_u64(seed), d, e_max)
}

fn sample_state_with<R: Rng>(rng: &mut R, d: usize, e_max: f64) -> Result<QuantumState> {
    if d == 0 {
        return Err(domain("d", 0.0, "d >= 1"));
    }
    if !(e_max > 0.0 && e_max.is_finite()) {
        return Err(domain("e_max", e_max, "finite e_max > 0"));
    }
    let mut energies: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..=e_max)).collect();
    energies.sort_by(f64::total_cmp);
    let amplitudes: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    QuantumState::normalized(energies.into_iter().zip(amplitudes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitsConfig {
    pub trials: usize,
    pub d_max: usize,
    pub deltas: Vec<f64>,
    pub seed: u64,
    pub e_max: f64,
    /// Horizon in units of `2 pi / gap_min`.
    pub horizon_mult: f64,
    /// Grid points per period of the fastest beat frequency.
    pub points_per_period: usize,
    pub max_grid: usize,
    /// Also run the saturating two-level state for each target.
    pub saturating_cases: bool,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            d_max: 8,
            deltas: (0..10).map(|i| i as f64 / 10.0).collect(),
            seed: 0,
            e_max: 1.0,
            horizon_mult: 2.0,
            points_per_period: 64,
            max_grid: 1 << 18,
            saturating_cases: true,
        }
    }
}

/// Upper edges of the relative-slack histogram bins; a final bin collects
/// everything above the last edge.
pub const SLACK_BIN_EDGES: [f64; 8] = [0.0, 1e-6, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub delta: f64,
    pub t_star: f64,
    pub bound: f64,
    pub kind: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitsReport {
    pub seed: u64,
    pub trials: usize,
    pub checks: usize,
    pub skips: usize,
    pub ml_violations: usize,
    pub mt_violations: usize,
    /// Minimum of `t_star / bound - 1` over all checks.
    pub ml_min_slack: f64,
    pub mt_min_slack: f64,
    /// Counts of `t_star / ml_bound - 1` per bin, see [`SLACK_BIN_EDGES`].
    pub ml_slack_histogram: Vec<usize>,
    pub saturation_checks: usize,
    /// Largest `t_star / ml_bound - 1` among the saturating states.
    pub saturation_max_slack: f64,
    pub violations: Vec<Violation>,
}

impl LimitsReport {
    pub fn total_violations(&self) -> usize {
        self.ml_violations + self.mt_violations
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.int("seed", self.seed)
            .int("trials", self.trials)
            .int("checks", self.checks)
            .int("skips", self.skips)
            .int("ml_violations", self.ml_violations)
            .int("mt_violations", self.mt_violations)
            .real("ml_min_slack", self.ml_min_slack)
            .real("mt_min_slack", self.mt_min_slack)
            .int("saturation_checks", self.saturation_checks)
            .real("saturation_max_slack", self.saturation_max_slack);
        for (i, count) in self.ml_slack_histogram.iter().enumerate() {
            let label = match SLACK_BIN_EDGES.get(i) {
                Some(edge) => format!("ml_slack_hist.le_{edge}"),
                None => format!(
                    "ml_slack_hist.gt_{}",
                    SLACK_BIN_EDGES[SLACK_BIN_EDGES.len() - 1]
                ),
            };
            r.int(label, *count);
        }
        r
    }
}

#[derive(Default)]
struct Tally {
    checks: usize,
    skips: usize,
    ml_min: f64,
    mt_min: f64,
    hist: Vec<usize>,
    violations: Vec<Violation>,
}

impl Tally {
    fn new() -> Self {
        Self {
            ml_min: f64::INFINITY,
            mt_min: f64::INFINITY,
            hist: vec![0; SLACK_BIN_EDGES.len() + 1],
            ..Default::default()
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.skips += other.skips;
        self.ml_min = self.ml_min.min(other.ml_min);
        self.mt_min = self.mt_min.min(other.mt_min);
        for (a, b) in self.hist.iter_mut().zip(other.hist) {
            *a += b;
        }
        self.violations.extend(other.violations);
        self
    }
}

fn relative_slack(t: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        t / bound - 1.0
    } else {
        f64::INFINITY
    }
}

fn check_state(
    state: &QuantumState,
    cfg: &LimitsConfig,
    bounds: &[(f64, f64, f64)],
    trial: usize,
) -> Result<(Tally, Vec<Option<f64>>)> {
    let mut tally = Tally::new();
    let Some(horizon) = default_horizon(state, cfg.horizon_mult) else {
        tally.skips += cfg.deltas.len();
        return Ok((tally, vec![None; cfg.deltas.len()]));
    };
    let n_grid = grid_for(state, horizon, cfg.points_per_period, cfg.max_grid);
    let passages = first_passages(state, &cfg.deltas, horizon, n_grid)?;
    let excess = state.mean_excess_energy();
    let spread = state.dispersion();
    let mut ml_slacks = Vec::with_capacity(bounds.len());

    for (p, &(delta, ml_num, mt_num)) in passages.iter().zip(bounds) {
        let Some(t) = p.t_star else {
            tally.skips += 1;
            ml_slacks.push(None);
            continue;
        };
        tally.checks += 1;
        let ml = ratio_bound(ml_num, excess);
        let mt = ratio_bound(mt_num, spread);
        for (bound, kind) in [(ml, "ml"), (mt, "mt")] {
            if t < bound - BOUND_SLACK {
                tally.violations.push(Violation {
                    trial,
                    delta,
                    t_star: t,
                    bound,
                    kind,
                });
            }
        }
        let ml_slack = relative_slack(t, ml);
        tally.ml_min = tally.ml_min.min(ml_slack);
        tally.mt_min = tally.mt_min.min(relative_slack(t, mt));
        let bin = SLACK_BIN_EDGES
            .iter()
            .position(|&edge| ml_slack <= edge)
            .unwrap_or(SLACK_BIN_EDGES.len());
        tally.hist[bin] += 1;
        ml_slacks.push(Some(ml_slack));
    }
    Ok((tally, ml_slacks))
}

/// Monte-Carlo check that no sampled evolution beats either speed limit.
///
/// Trial `i` draws its dimension and state from seed `seed + i`, so the
/// report does not depend on how trials are scheduled across threads.
pub fn verify_limits(cfg: &LimitsConfig) -> Result<LimitsReport> {
    if cfg.d_max < 2 {
        return Err(domain("d_max", cfg.d_max as f64, "d_max >= 2"));
    }
    let bounds: Vec<(f64, f64, f64)> = cfg
        .deltas
        .iter()
        .map(|&d| Ok((d, FRAC_PI_2 * alpha(d)?, mt_alpha(d)?)))
        .collect::<Result<_>>()?;

    let tallies: Vec<Tally> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(trial as u64));
            let d = rng.random_range(2..=cfg.d_max);
            let state = sample_state_with(&mut rng, d, cfg.e_max)?;
            Ok(check_state(&state, cfg, &bounds, trial)?.0)
        })
        .collect::<Result<_>>()?;
    let mut tally = tallies.into_iter().fold(Tally::new(), Tally::merge);

    let mut saturation_checks = 0;
    let mut saturation_max_slack = 0.0f64;
    if cfg.saturating_cases {
        for (i, &(delta, ml_num, mt_num)) in bounds.iter().enumerate() {
            if delta >= 1.0 {
                continue;
            }
            let (z, _) = upper_bound_argmin(delta)?;
            let state = QuantumState::two_level(((1.0 + z) / 2.0).sqrt(), 1.0)?;
            let single = [(delta, ml_num, mt_num)];
            let sub_cfg = LimitsConfig {
                deltas: vec![delta],
                ..cfg.clone()
            };
            let (t, slacks) = check_state(&state, &sub_cfg, &single, cfg.trials + i)?;
            tally = tally.merge(t);
            if let Some(Some(s)) = slacks.first() {
                saturation_checks += 1;
                saturation_max_slack = saturation_max_slack.max(s.abs());
            }
        }
    }

    let ml_violations = tally.violations.iter().filter(|v| v.kind == "ml").count();
    Ok(LimitsReport {
        seed: cfg.seed,
        trials: cfg.trials,
        checks: tally.checks,
        skips: tally.skips,
        ml_violations,
        mt_violations: tally.violations.len() - ml_violations,
        ml_min_slack: tally.ml_min,
        mt_min_slack: tally.mt_min,
        ml_slack_histogram: tally.hist,
        saturation_checks,
        saturation_max_slack,
        violations: tally.violations,
    })
}
