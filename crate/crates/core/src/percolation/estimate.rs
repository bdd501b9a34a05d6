//! Monte Carlo estimators of one-arm probabilities and the audits built on them.

use serde::{Deserialize, Serialize};

use super::events::{arm_thresholds, explore, world_event, world_pivotal, Coloring, LocalEvent};
use super::stats::{EstimateResult, Z95};
use super::{run_trials, tile_epsilon, trial_world};
use crate::error::{Error, Result};

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

fn check_p(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_n(n: f64) -> Result<()> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!("n must be a finite value >= 0, got {n}")));
    }
    Ok(())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Usage("trials must be at least 1".into()));
    }
    Ok(())
}

/// `θ_n(p)`: fraction of trials in which the owner of the origin is black and
/// its black cluster reaches distance `n`.
pub fn estimate_theta(lambda: f64, p: f64, n: f64, trials: u64, seed: u64) -> Result<EstimateResult> {
    check_lambda(lambda)?;
    check_p(p, "p")?;
    check_n(n)?;
    check_trials(trials)?;
    let event = LocalEvent::one_arm(n);
    let out = run_trials(trials, |i| {
        let mut w = trial_world(lambda, tile_epsilon(lambda), seed, i)?;
        world_event(&mut w, &event, Coloring::new(p))
    })?;
    Ok(EstimateResult::from_indicators(out, seed))
}

/// `θ_n(p)` for several `n` at one `p`, from a single cluster exploration per
/// trial (so the estimates are nonincreasing in `n` sample by sample).
pub fn theta_decay(lambda: f64, p: f64, ns: &[f64], trials: u64, seed: u64) -> Result<Vec<(f64, EstimateResult)>> {
    check_lambda(lambda)?;
    check_p(p, "p")?;
    ns.iter().try_for_each(|&n| check_n(n))?;
    check_trials(trials)?;
    let cap = ns.iter().copied().fold(0.0, f64::max);
    let reach = run_trials(trials, |i| {
        let mut w = trial_world(lambda, tile_epsilon(lambda), seed, i)?;
        explore(&mut w, [0.0, 0.0], Coloring::new(p), cap, None)
    })?;
    Ok(ns
        .iter()
        .map(|&n| (n, EstimateResult::from_indicators(reach.iter().map(|r| r.is_some_and(|r| r >= n)), seed)))
        .collect())
}

/// Per-trial arm thresholds: `out[i][j]` is the smallest `p` at which trial
/// `i` has `{0 <-> S(0, ns[j])}`.
pub fn arm_threshold_samples(lambda: f64, ns: &[f64], trials: u64, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_lambda(lambda)?;
    ns.iter().try_for_each(|&n| check_n(n))?;
    check_trials(trials)?;
    run_trials(trials, |i| {
        let mut w = trial_world(lambda, tile_epsilon(lambda), seed, i)?;
        arm_thresholds(&mut w, [0.0, 0.0], ns)
    })
}

fn count_at(samples: &[Vec<f64>], j: usize, p: f64) -> u64 {
    samples.iter().filter(|t| t[j] <= p).count() as u64
}

/// `θ_n(p)` over a grid, coupled: `out[a][b]` is the estimate at `ns[a]`,
/// `ps[b]`, all from the same trials.
pub fn estimate_theta_grid(
    lambda: f64,
    ps: &[f64],
    ns: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<Vec<EstimateResult>>> {
    ps.iter().try_for_each(|&p| check_p(p, "p"))?;
    let samples = arm_threshold_samples(lambda, ns, trials, seed)?;
    Ok((0..ns.len())
        .map(|j| ps.iter().map(|&p| EstimateResult::from_count(count_at(&samples, j, p), trials, seed)).collect())
        .collect())
}

/// Finite-size critical point proxy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    pub lambda: f64,
    pub n: f64,
    pub trials: u64,
    pub seed: u64,
    /// Bracketing interval of the crossing.
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    /// `P(0 <-> S(0, n) | owner of 0 black)` at `mid`, over the trials with a
    /// black owner.
    pub conditional: EstimateResult,
    /// `θ_n(mid)`.
    pub theta: EstimateResult,
}

/// Bisection for the level where a black origin cell reaches distance `n`
/// with probability one half, `P(0 <-> S(0, n) | owner black) = 1/2`, on
/// one coupled sample set (the same trials serve every level).
pub fn estimate_pc(lambda: f64, n: f64, trials: u64, p_tolerance: f64, seed: u64) -> Result<PcEstimate> {
    if n < 2.0 {
        return Err(Error::Usage(format!("n must be at least 2, got {n}")));
    }
    if trials < 100 {
        return Err(Error::Usage(format!("trials must be at least 100, got {trials}")));
    }
    if !(p_tolerance > 0.0) {
        return Err(Error::Usage(format!("p tolerance must be positive, got {p_tolerance}")));
    }
    let samples = arm_threshold_samples(lambda, &[0.0, n], trials, seed)?;
    let h = |p: f64| {
        let black = count_at(&samples, 0, p);
        if black == 0 {
            -0.5
        } else {
            count_at(&samples, 1, p) as f64 / black as f64 - 0.5
        }
    };
    let (mut lo, mut hi) = (0.01, 0.99);
    if h(lo) >= 0.0 || h(hi) < 0.0 {
        return Err(Error::Bracket(format!(
            "conditional crossing not bracketed in [0.01, 0.99] (h = {:.3}, {:.3})",
            h(lo),
            h(hi)
        )));
    }
    while hi - lo > p_tolerance {
        let mid = 0.5 * (lo + hi);
        if h(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let black = count_at(&samples, 0, mid);
    let hits = count_at(&samples, 1, mid);
    Ok(PcEstimate {
        lambda,
        n,
        trials,
        seed,
        lo,
        hi,
        mid,
        conditional: EstimateResult::from_count(hits, black, seed),
        theta: EstimateResult::from_count(hits, trials, seed),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldPoint {
    pub p: f64,
    pub theta: EstimateResult,
    /// `θ_{2n}(p)`, for the stability ratio.
    pub theta_double: EstimateResult,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldReport {
    pub pc: f64,
    pub n: f64,
    pub points: Vec<MeanFieldPoint>,
    pub stable: bool,
    /// `min_p θ̂_n(p) / (p - p̂_c)`.
    pub c_hat: Option<f64>,
    /// Same with the lower 95% limits of `θ̂_n(p)`.
    pub c_lower: Option<f64>,
    pub warning: Option<String>,
}

impl MeanFieldReport {
    pub fn passes(&self) -> bool {
        self.c_lower.is_some_and(|c| c > 0.0)
    }
}

/// Fits `θ_n(p) >= c (p - pc)` over a grid above `pc`. Refuses the fit (with a
/// warning) when `θ̂_{2n} / θ̂_n < 0.9` somewhere on the grid.
pub fn mean_field_check(
    lambda: f64,
    p_grid: &[f64],
    pc: f64,
    n_large: f64,
    trials: u64,
    seed: u64,
) -> Result<MeanFieldReport> {
    if p_grid.is_empty() {
        return Err(Error::Usage("empty p grid".into()));
    }
    for &p in p_grid {
        check_p(p, "p")?;
        if p <= pc {
            return Err(Error::Domain(format!("grid point {p} is not above pc = {pc}")));
        }
    }
    let grid = estimate_theta_grid(lambda, p_grid, &[n_large, 2.0 * n_large], trials, seed)?;
    let points: Vec<MeanFieldPoint> = p_grid
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let (a, b) = (grid[0][j].clone(), grid[1][j].clone());
            let ratio = if a.mean > 0.0 { b.mean / a.mean } else { 0.0 };
            MeanFieldPoint { p, theta: a, theta_double: b, ratio }
        })
        .collect();
    let stable = points.iter().all(|q| q.ratio >= 0.9);
    let (mut c_hat, mut c_lower, mut warning) = (None, None, None);
    if stable {
        c_hat = points.iter().map(|q| q.theta.mean / (q.p - pc)).reduce(f64::min);
        c_lower = points.iter().map(|q| q.theta.ci95.0 / (q.p - pc)).reduce(f64::min);
    } else {
        let worst = points.iter().map(|q| q.ratio).fold(f64::INFINITY, f64::min);
        warning = Some(format!("theta not stabilized at n = {n_large}: worst ratio {worst:.3} < 0.9; no fit"));
    }
    Ok(MeanFieldReport { pc, n: n_large, points, stable, c_hat, c_lower, warning })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RussoReport {
    pub event: LocalEvent,
    pub p: f64,
    pub dp: f64,
    /// Central finite difference, per trial `(1_A(p+dp) - 1_A(p-dp)) / 2dp`.
    pub derivative: EstimateResult,
    /// Number of pivotal nuclei at `p`.
    pub pivotal: EstimateResult,
    pub overlap: bool,
    /// Smallest and largest per-trial pivotal counts.
    pub pivotal_range: (u64, u64),
}

impl RussoReport {
    pub fn passes(&self) -> bool {
        self.overlap
    }
}

/// Compares the finite-difference derivative of `P_p(A)` with the mean number
/// of pivotal nuclei, on coupled samples.
pub fn russo_audit(lambda: f64, event: &LocalEvent, p: f64, dp: f64, trials: u64, seed: u64) -> Result<RussoReport> {
    check_lambda(lambda)?;
    check_trials(trials)?;
    if !(dp > 0.0) {
        return Err(Error::Usage(format!("dp must be positive, got {dp}")));
    }
    if p - dp < 0.0 || p + dp > 1.0 {
        return Err(Error::Usage(format!("p +- dp must stay in [0, 1] (p = {p}, dp = {dp})")));
    }
    let per = run_trials(trials, |i| {
        let mut w = trial_world(lambda, tile_epsilon(lambda), seed, i)?;
        let up = world_event(&mut w, event, Coloring::new(p + dp))?;
        let down = world_event(&mut w, event, Coloring::new(p - dp))?;
        let piv = world_pivotal(&mut w, event, p)?.len() as u64;
        Ok(((up as i32 - down as i32) as f64 / (2.0 * dp), piv))
    })?;
    let d: Vec<f64> = per.iter().map(|x| x.0).collect();
    let k: Vec<f64> = per.iter().map(|x| x.1 as f64).collect();
    let derivative = EstimateResult::from_values(&d, seed);
    let pivotal = EstimateResult::from_values(&k, seed);
    let overlap = derivative.ci95.0 <= pivotal.ci95.1 && pivotal.ci95.0 <= derivative.ci95.1;
    let hi = per.iter().map(|x| x.1).max().unwrap_or(0);
    let lo = per.iter().map(|x| x.1).min().unwrap_or(0);
    Ok(RussoReport { event: *event, p, dp, derivative, pivotal, overlap, pivotal_range: (lo, hi) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkgReport {
    pub p: f64,
    pub event_a: LocalEvent,
    pub event_b: LocalEvent,
    pub p_a: EstimateResult,
    pub p_b: EstimateResult,
    pub p_ab: EstimateResult,
    /// `P(A ∩ B) - P(A) P(B)`.
    pub gap: f64,
    /// Delta-method standard error of `gap`.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl FkgReport {
    /// The correlation is not significantly negative.
    pub fn passes(&self) -> bool {
        self.gap >= -3.0 * self.std_error
    }

    pub fn ci95(&self) -> (f64, f64) {
        (self.gap - Z95 * self.std_error, self.gap + Z95 * self.std_error)
    }
}

/// Estimates the correlation of two increasing events on the same samples.
pub fn fkg_audit(
    lambda: f64,
    p: f64,
    event_a: &LocalEvent,
    event_b: &LocalEvent,
    trials: u64,
    seed: u64,
) -> Result<FkgReport> {
    check_lambda(lambda)?;
    check_p(p, "p")?;
    check_trials(trials)?;
    let per = run_trials(trials, |i| {
        let mut w = trial_world(lambda, tile_epsilon(lambda), seed, i)?;
        let a = world_event(&mut w, event_a, Coloring::new(p))?;
        let b = world_event(&mut w, event_b, Coloring::new(p))?;
        Ok((a, b))
    })?;
    let p_a = EstimateResult::from_indicators(per.iter().map(|x| x.0), seed);
    let p_b = EstimateResult::from_indicators(per.iter().map(|x| x.1), seed);
    let p_ab = EstimateResult::from_indicators(per.iter().map(|x| x.0 && x.1), seed);
    let gap = p_ab.mean - p_a.mean * p_b.mean;
    // influence function of (a, b) -> E[ab] - E[a]E[b]
    let phi: Vec<f64> = per
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (a as u8 as f64, b as u8 as f64);
            a * b - p_b.mean * a - p_a.mean * b
        })
        .collect();
    let std_error = EstimateResult::from_values(&phi, seed).std_error;
    Ok(FkgReport { p, event_a: *event_a, event_b: *event_b, p_a, p_b, p_ab, gap, std_error, trials, seed })
}
