//! Monte Carlo summaries and the log-linear decay fit.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Mean of independent per-trial values with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub ci95: (f64, f64),
    pub seed: u64,
}

impl EstimateResult {
    /// Summarizes per-trial values, summed in the given order.
    pub fn from_values(values: &[f64], seed: u64) -> Self {
        let t = values.len() as u64;
        if t == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, trials: 0, ci95: (f64::NAN, f64::NAN), seed };
        }
        let mean = values.iter().sum::<f64>() / t as f64;
        let var = if t > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1) as f64
        } else {
            0.0
        };
        Self::from_moments(mean, (var / t as f64).sqrt(), t, seed)
    }

    /// Summarizes 0/1 outcomes from the success count alone (exact integer
    /// aggregation, so the result does not depend on evaluation order).
    pub fn from_count(successes: u64, trials: u64, seed: u64) -> Self {
        if trials == 0 {
            return Self::from_values(&[], seed);
        }
        let t = trials as f64;
        let mean = successes as f64 / t;
        // sample variance with the T - 1 denominator
        let var = if trials > 1 { successes as f64 * (1.0 - mean) / (t - 1.0) } else { 0.0 };
        Self::from_moments(mean, (var / t).sqrt(), trials, seed)
    }

    pub fn from_indicators(outcomes: impl IntoIterator<Item = bool>, seed: u64) -> Self {
        let (mut s, mut t) = (0u64, 0u64);
        for o in outcomes {
            s += o as u64;
            t += 1;
        }
        Self::from_count(s, t, seed)
    }

    pub fn from_moments(mean: f64, std_error: f64, trials: u64, seed: u64) -> Self {
        Self { mean, std_error, trials, ci95: (mean - Z95 * std_error, mean + Z95 * std_error), seed }
    }
}

/// Weighted least-squares fit of `log θ_n = intercept + slope * n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_ci95: (f64, f64),
    /// Points used, as `(n, log mean, weight)`.
    pub points: Vec<(f64, f64, f64)>,
}

impl DecayFit {
    /// Whether the slope is negative at 95% confidence.
    pub fn decays(&self) -> bool {
        self.slope_ci95.1 < 0.0
    }
}

/// Fits the decay rate on the positive estimates. Weights are inverse
/// delta-method variances `(se / mean)^2`; if any positive estimate has zero
/// standard error all weights are taken equal.
pub fn fit_decay(estimates: &[(f64, EstimateResult)]) -> Result<DecayFit> {
    let pos: Vec<&(f64, EstimateResult)> = estimates.iter().filter(|(_, e)| e.mean > 0.0).collect();
    if pos.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs at least 4 positive estimates, got {}",
            pos.len()
        )));
    }
    let known = pos.iter().all(|(_, e)| e.std_error > 0.0);
    let pts: Vec<(f64, f64, f64)> = pos
        .iter()
        .map(|(n, e)| {
            let w = if known { (e.mean / e.std_error).powi(2) } else { 1.0 };
            (*n, e.mean.ln(), w)
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum();
    let syy: f64 = pts.iter().map(|p| p.2 * (p.1 - ym).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("decay fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    let df = (pts.len() - 2) as f64;
    // with known variances the reduced chi-square only ever inflates the error
    let scale = if known { (rss / df).max(1.0) } else { rss / df };
    let se = (scale / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, df).expect("df >= 2").inverse_cdf(0.975);
    Ok(DecayFit { slope, intercept, r_squared, slope_ci95: (slope - q * se, slope + q * se), points: pts })
}
