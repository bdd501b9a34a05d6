//! Numerical check of the differential inequality `f_n' >= (n / Σ_n) f_n`,
//! `Σ_n = f_0 + ... + f_{n-1}`, on a uniform grid.

use serde::{Deserialize, Serialize};

use super::estimate::arm_threshold_samples;
use super::stats::{EstimateResult, Z95};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessCheck {
    /// Uniform grid of `p` values.
    pub grid: Vec<f64>,
    /// `f[n][j] = f_n(grid[j])` for `n = 0, 1, ...`.
    pub f: Vec<Vec<f64>>,
    /// `sigma[n][j] = Σ_n(grid[j])`.
    pub sigma: Vec<Vec<f64>>,
    /// Standard errors of `f` for Monte Carlo input.
    pub f_se: Option<Vec<Vec<f64>>>,
    /// Standard errors of the central differences (NaN at the grid ends).
    pub deriv_se: Option<Vec<Vec<f64>>>,
    /// Where a check found `f'_n < (c n / Σ_n) f_n - tolerance`, as `(n, p)`.
    pub violations: Vec<(usize, f64)>,
}

impl SharpnessCheck {
    /// Exact input: `f[n][j]` on a uniform grid.
    pub fn new(grid: Vec<f64>, f: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::Usage("the grid needs at least 3 points".into()));
        }
        let h = grid[1] - grid[0];
        if !(h > 0.0) || grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
            return Err(Error::Usage("grid spacing must be uniform and increasing".into()));
        }
        if f.iter().any(|row| row.len() != grid.len()) {
            return Err(Error::Usage("every f_n needs one value per grid point".into()));
        }
        let mut sigma = Vec::with_capacity(f.len());
        let mut acc = vec![0.0; grid.len()];
        for row in &f {
            sigma.push(acc.clone());
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        Ok(Self { grid, f, sigma, f_se: None, deriv_se: None, violations: Vec::new() })
    }

    fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    fn derivative(&self, n: usize, j: usize) -> f64 {
        (self.f[n][j + 1] - self.f[n][j - 1]) / (2.0 * self.spacing())
    }

    /// Allowed shortfall at `(n, j)` for constant `c`.
    fn slack(&self, n: usize, j: usize, c: f64, tolerance: f64) -> f64 {
        let (Some(fse), Some(dse)) = (&self.f_se, &self.deriv_se) else {
            return tolerance;
        };
        let k = c * n as f64 / self.sigma[n][j];
        tolerance + Z95 * (dse[n][j].powi(2) + (k * fse[n][j]).powi(2)).sqrt()
    }

    fn violations_for(&self, c: f64, tolerance: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for n in 1..self.f.len() {
            for j in 1..self.grid.len() - 1 {
                let s = self.sigma[n][j];
                if s <= 0.0 {
                    continue;
                }
                let rhs = c * n as f64 / s * self.f[n][j];
                if self.derivative(n, j) < rhs - self.slack(n, j, c, tolerance) {
                    out.push((n, self.grid[j]));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub c: f64,
    pub tolerance: f64,
    pub violations: Vec<(usize, f64)>,
    /// Largest `c` (up to 1e3) with no violation at this tolerance.
    pub max_c: f64,
    /// Largest grid point where the sequence is still visibly decaying:
    /// `f_n` nonincreasing in `n` and `f_N <= f_{ceil(N/2)} / 2` for the last `N`.
    pub x1_proxy: Option<f64>,
    pub warnings: Vec<String>,
}

impl SharpnessReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flags grid cells where the finite-difference inequality fails beyond
/// `tolerance` (plus propagated 95% errors for Monte Carlo input).
pub fn sharpness_ode_check(check: &SharpnessCheck, c: f64, tolerance: f64) -> Result<SharpnessReport> {
    if !(c >= 0.0) || !(tolerance >= 0.0) {
        return Err(Error::Usage("c and tolerance must be >= 0".into()));
    }
    let violations = check.violations_for(c, tolerance);
    const C_MAX: f64 = 1e3;
    let max_c = if check.violations_for(C_MAX, tolerance).is_empty() {
        C_MAX
    } else if !check.violations_for(0.0, tolerance).is_empty() {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, C_MAX);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if check.violations_for(mid, tolerance).is_empty() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let mut warnings = Vec::new();
    for (n, row) in check.f.iter().enumerate() {
        for j in 1..row.len() {
            let allow = match &check.f_se {
                Some(se) => tolerance + Z95 * (se[n][j].powi(2) + se[n][j - 1].powi(2)).sqrt(),
                None => tolerance,
            };
            if row[j] < row[j - 1] - allow {
                warnings.push(format!("f_{n} decreases in p between {} and {}", check.grid[j - 1], check.grid[j]));
            }
        }
    }
    let last = check.f.len() - 1;
    let x1_proxy = (last >= 1)
        .then(|| {
            (0..check.grid.len())
                .filter(|&j| {
                    (1..=last).all(|n| check.f[n][j] <= check.f[n - 1][j])
                        && check.f[last][j] <= 0.5 * check.f[last.div_ceil(2)][j]
                })
                .map(|j| check.grid[j])
                .reduce(f64::max)
        })
        .flatten();
    Ok(SharpnessReport { c, tolerance, violations, max_c, x1_proxy, warnings })
}

/// Monte Carlo `f_n = θ_n` for `n = 0..=n_max` over `grid`, from coupled trials.
pub fn sharpness_grid(lambda: f64, grid: &[f64], n_max: u32, trials: u64, seed: u64) -> Result<SharpnessCheck> {
    let ns: Vec<f64> = (0..=n_max).map(f64::from).collect();
    let samples = arm_threshold_samples(lambda, &ns, trials, seed)?;
    let est = |n: usize, p: f64| EstimateResult::from_indicators(samples.iter().map(|t| t[n] <= p), seed);
    let f: Vec<Vec<f64>> = (0..ns.len()).map(|n| grid.iter().map(|&p| est(n, p).mean).collect()).collect();
    let f_se = (0..ns.len()).map(|n| grid.iter().map(|&p| est(n, p).std_error).collect()).collect();
    let mut check = SharpnessCheck::new(grid.to_vec(), f)?;
    let h = check.spacing();
    let deriv_se = (0..ns.len())
        .map(|n| {
            (0..grid.len())
                .map(|j| {
                    if j == 0 || j + 1 == grid.len() {
                        return f64::NAN;
                    }
                    let d: Vec<f64> = samples
                        .iter()
                        .map(|t| ((t[n] <= grid[j + 1]) as u8 as f64 - (t[n] <= grid[j - 1]) as u8 as f64) / (2.0 * h))
                        .collect();
                    EstimateResult::from_values(&d, seed).std_error
                })
                .collect()
        })
        .collect();
    check.f_se = Some(f_se);
    check.deriv_se = Some(deriv_se);
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..=16).map(|j| 0.1 + 0.05 * j as f64).collect()
    }

    #[test]
    fn powers_have_no_violations() {
        let g = grid();
        let f = (0..8).map(|n| g.iter().map(|x: &f64| x.powi(n)).collect()).collect();
        let check = SharpnessCheck::new(g, f).unwrap();
        let rep = sharpness_ode_check(&check, 1.0, 1e-9).unwrap();
        assert!(rep.passes(), "{:?}", rep.violations);
        assert!(rep.max_c >= 1.0);
    }

    #[test]
    fn constants_violate_everywhere() {
        let g = grid();
        let f = (0..5).map(|_| vec![0.5; g.len()]).collect();
        let check = SharpnessCheck::new(g.clone(), f).unwrap();
        let rep = sharpness_ode_check(&check, 1.0, 1e-9).unwrap();
        for n in 1..5 {
            assert!(rep.violations.iter().any(|v| v.0 == n));
        }
        assert_eq!(rep.violations.len(), 4 * (g.len() - 2));
        assert!(rep.max_c < 1e-6, "{}", rep.max_c);
    }

    #[test]
    fn sigma_is_the_prefix_sum() {
        let g = grid();
        let f: Vec<Vec<f64>> = (0..4).map(|n| g.iter().map(|x| x.powi(n)).collect()).collect();
        let check = SharpnessCheck::new(g, f.clone()).unwrap();
        for n in 0..4 {
            for j in 0..check.grid.len() {
                let s: f64 = (0..n).map(|k| f[k][j]).sum();
                assert_eq!(check.sigma[n][j], s);
            }
        }
    }

    #[test]
    fn rejects_uneven_grids() {
        assert!(SharpnessCheck::new(vec![0.1, 0.2, 0.4], vec![vec![1.0; 3]]).is_err());
    }
}
