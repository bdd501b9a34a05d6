//! Monte Carlo revealments and influences of the sector coordinates, and the
//! audit comparing `dθ_n/dp` with half the total influence.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::algorithm::run_algorithm_k_world;
use crate::discretization::SectorId;
use crate::error::{Error, Result};
use crate::percolation::{run_trials, trial_stream, trial_world, world_event, Coloring, EstimateResult, LocalEvent};
use crate::rng::{tag, RngStream};
use crate::sampling;

fn check_common(lambda: f64, p: f64, epsilon: f64, n: f64, trials: u64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!("n must be a finite value >= 0, got {n}")));
    }
    if trials == 0 {
        return Err(Error::Usage("trials must be at least 1".into()));
    }
    Ok(())
}

/// Per-sector estimates; sectors absent from the map have estimate exactly 0.
pub type SectorMap = BTreeMap<SectorId, EstimateResult>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RevealmentReport {
    /// Frequency with which `A_k` picks the sector (the coordinates it
    /// queries through the frontier).
    pub picked: SectorMap,
    /// Frequency with which the sector is sampled at all, DISCOVER's padding
    /// included.
    pub queried: SectorMap,
    /// Fraction of trials where `A_k` returned 1.
    pub value: EstimateResult,
    pub trials: u64,
    pub seed: u64,
}

fn to_map(counts: HashMap<SectorId, u64>, trials: u64, seed: u64) -> SectorMap {
    counts.into_iter().map(|(id, c)| (id, EstimateResult::from_count(c, trials, seed))).collect()
}

/// Revealments of `A_k` for `{0 <-> S(0, n)}`.
pub fn estimate_revealment(
    lambda: f64,
    p: f64,
    epsilon: f64,
    n: f64,
    k: f64,
    trials: u64,
    seed: u64,
) -> Result<RevealmentReport> {
    check_common(lambda, p, epsilon, n, trials)?;
    let per = run_trials(trials, |i| {
        let mut w = trial_world(lambda, epsilon, seed, i)?;
        let (value, trace) = run_algorithm_k_world(&mut w, p, n, k)?;
        Ok((value, trace.picked, trace.revealed))
    })?;
    let mut picked = HashMap::new();
    let mut queried = HashMap::new();
    for (_, a, b) in &per {
        for id in a {
            *picked.entry(*id).or_insert(0u64) += 1;
        }
        for id in b {
            *queried.entry(*id).or_insert(0u64) += 1;
        }
    }
    Ok(RevealmentReport {
        picked: to_map(picked, trials, seed),
        queried: to_map(queried, trials, seed),
        value: EstimateResult::from_indicators(per.iter().map(|x| x.0), seed),
        trials,
        seed,
    })
}

/// Stream redrawing sector `id` in trial `i`.
pub fn resample_stream(seed: u64, i: u64, id: SectorId) -> RngStream {
    trial_stream(seed, i).descend(&[tag::RESAMPLE, id.k as u64, id.l])
}

/// One trial of the influence estimator: the event value on the base world
/// and the sectors whose resampling flips it.
fn influence_trial(lambda: f64, p: f64, epsilon: f64, n: f64, seed: u64, i: u64) -> Result<(bool, Vec<SectorId>)> {
    let event = LocalEvent::one_arm(n);
    let mut base = trial_world(lambda, epsilon, seed, i)?;
    let value = world_event(&mut base, &event, Coloring::new(p))?;
    let mut occupied: HashMap<SectorId, usize> = HashMap::new();
    for v in 0..base.num_points() as u32 {
        *occupied.entry(base.tile_of(v)).or_insert(0) += 1;
    }
    // unsampled sectors cannot change an evaluation that never looked at them
    let sampled = base.sampled_tiles().to_vec();
    let mut flips = Vec::new();
    for id in sampled {
        let stream = resample_stream(seed, i, id);
        let count = base.count(id.k);
        let fresh = sampling::sample_sector(&mut stream.rng(), lambda, epsilon, id, count);
        if fresh.is_empty() && !occupied.contains_key(&id) {
            continue;
        }
        let mut w = trial_world(lambda, epsilon, seed, i)?;
        w.resample_tile(id, stream)?;
        if world_event(&mut w, &event, Coloring::new(p))? != value {
            flips.push(id);
        }
    }
    Ok((value, flips))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub influences: SectorMap,
    /// `Σ_x Inf_x`, with the standard error of the per-trial flip count.
    pub total: EstimateResult,
    pub theta: EstimateResult,
    pub trials: u64,
    pub seed: u64,
}

/// Influences `Inf_x = P(1_A(Z) != 1_A(Z~))` of the sectors for
/// `A = {0 <-> S(0, n)}`, where `Z~` redraws sector `x` only. Each trial
/// shares one base sample across all sectors.
pub fn estimate_influence(lambda: f64, p: f64, epsilon: f64, n: f64, trials: u64, seed: u64) -> Result<InfluenceReport> {
    check_common(lambda, p, epsilon, n, trials)?;
    let per = run_trials(trials, |i| influence_trial(lambda, p, epsilon, n, seed, i))?;
    let mut counts = HashMap::new();
    for (_, flips) in &per {
        for id in flips {
            *counts.entry(*id).or_insert(0u64) += 1;
        }
    }
    let totals: Vec<f64> = per.iter().map(|x| x.1.len() as f64).collect();
    Ok(InfluenceReport {
        influences: to_map(counts, trials, seed),
        total: EstimateResult::from_values(&totals, seed),
        theta: EstimateResult::from_indicators(per.iter().map(|x| x.0), seed),
        trials,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Report {
    pub p: f64,
    pub dp: f64,
    pub n: f64,
    pub epsilon: f64,
    /// Central difference `(θ_n(p + dp) - θ_n(p - dp)) / 2dp`.
    pub derivative: EstimateResult,
    /// `Σ_x Inf_x` at `p`.
    pub total_influence: EstimateResult,
    /// Standard error of `derivative - total_influence / 2` from the paired
    /// per-trial differences.
    pub sigma: f64,
    pub holds: bool,
    pub trials: u64,
    pub seed: u64,
}

/// Checks `dθ_n/dp >= Σ_x Inf_x / 2 - 3σ` on coupled samples.
pub fn lemma4_audit(
    lambda: f64,
    p: f64,
    epsilon: f64,
    n: f64,
    dp: f64,
    trials: u64,
    seed: u64,
) -> Result<Lemma4Report> {
    check_common(lambda, p, epsilon, n, trials)?;
    if !(dp > 0.0) {
        return Err(Error::Usage(format!("dp must be positive, got {dp}")));
    }
    if p - dp < 0.0 || p + dp > 1.0 {
        return Err(Error::Usage(format!("p +- dp must stay in [0, 1] (p = {p}, dp = {dp})")));
    }
    let event = LocalEvent::one_arm(n);
    let per = run_trials(trials, |i| {
        let mut w = trial_world(lambda, epsilon, seed, i)?;
        let up = world_event(&mut w, &event, Coloring::new(p + dp))?;
        let down = world_event(&mut w, &event, Coloring::new(p - dp))?;
        let (_, flips) = influence_trial(lambda, p, epsilon, n, seed, i)?;
        Ok(((up as i32 - down as i32) as f64 / (2.0 * dp), flips.len() as f64))
    })?;
    let d: Vec<f64> = per.iter().map(|x| x.0).collect();
    let f: Vec<f64> = per.iter().map(|x| x.1).collect();
    let diff: Vec<f64> = per.iter().map(|x| x.0 - 0.5 * x.1).collect();
    let derivative = EstimateResult::from_values(&d, seed);
    let total_influence = EstimateResult::from_values(&f, seed);
    let sigma = EstimateResult::from_values(&diff, seed).std_error;
    let holds = derivative.mean >= 0.5 * total_influence.mean - 3.0 * sigma;
    Ok(Lemma4Report { p, dp, n, epsilon, derivative, total_influence, sigma, holds, trials, seed })
}

/// Writes a sector map as CSV `k,l,rep_radius,rep_angle,estimate,std_err`.
pub fn write_sector_csv<W: Write>(map: &SectorMap, epsilon: f64, mut out: W) -> Result<()> {
    writeln!(out, "k,l,rep_radius,rep_angle,estimate,std_err")?;
    let mut counts: HashMap<u32, u64> = HashMap::new();
    for (id, est) in map {
        let count = match counts.get(&id.k) {
            Some(&c) => c,
            None => {
                let c = crate::discretization::sector_count(epsilon, id.k)?;
                counts.insert(id.k, c);
                c
            }
        };
        let (r, th) = if id.k == 0 {
            (0.0, 0.0)
        } else {
            (2.0 * id.k as f64 * epsilon, crate::discretization::wedge_start(count, id.l))
        };
        writeln!(out, "{},{},{:.16e},{:.16e},{:.16e},{:.16e}", id.k, id.l, r, th, est.mean, est.std_error)?;
    }
    Ok(())
}
