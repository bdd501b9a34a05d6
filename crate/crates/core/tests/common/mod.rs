//! Brute-force geometry shared by the integration tests.

#![allow(dead_code)]

use std::collections::VecDeque;

use hyperperc::geometry::hyp_distance;
use hyperperc::sampling::sample_ppp;
use hyperperc::tessellation::Tessellation;
use hyperperc::{HPoint, RngStream};

pub fn small_configs(count: usize, max_points: usize) -> Vec<hyperperc::sampling::ColoredConfig> {
    let mut out = Vec::new();
    let mut s = 0;
    while out.len() < count {
        s += 1;
        let c = sample_ppp(1.0, 1.6, 2, &RngStream::new(1000 + s)).unwrap();
        if c.len() >= 2 && c.len() <= max_points {
            out.push(c);
        }
    }
    out
}

pub fn d(a: [f64; 2], b: &HPoint) -> f64 {
    hyp_distance(&HPoint::new(a.to_vec()).unwrap(), b).unwrap()
}

/// The arc of the hyperbolic bisector of `z` and `w` inside the unit disk,
/// parametrized over `[0, 1]`.
pub fn bisector_arc(z: [f64; 2], w: [f64; 2]) -> impl Fn(f64) -> [f64; 2] {
    // f_z(y) = f_w(y) with f_u(y) = |y-u|^2 / (1-|u|^2): a|y|^2 + b.y + c = 0
    let al = 1.0 / (1.0 - z[0] * z[0] - z[1] * z[1]);
    let be = 1.0 / (1.0 - w[0] * w[0] - w[1] * w[1]);
    let a = al - be;
    let b = [2.0 * (be * w[0] - al * z[0]), 2.0 * (be * w[1] - al * z[1])];
    let c = al * (z[0] * z[0] + z[1] * z[1]) - be * (w[0] * w[0] + w[1] * w[1]);
    let line = a.abs() < 1e-12;
    let (mut m, mut r) = ([0.0; 2], 0.0);
    let (lo, hi);
    let (mut foot, mut dir) = ([0.0; 2], [0.0; 2]);
    if line {
        let nb = (b[0] * b[0] + b[1] * b[1]).sqrt();
        foot = [-c * b[0] / (nb * nb), -c * b[1] / (nb * nb)];
        dir = [-b[1] / nb, b[0] / nb];
        let half = (1.0 - foot[0] * foot[0] - foot[1] * foot[1]).max(0.0).sqrt();
        (lo, hi) = (-half, half);
    } else {
        m = [-b[0] / (2.0 * a), -b[1] / (2.0 * a)];
        r = ((m[0] * m[0] + m[1] * m[1]) - c / a).sqrt();
        // inside the disk iff cos(t - arg m) < (1 - |m|^2 - r^2) / (2 r |m|)
        let nm = (m[0] * m[0] + m[1] * m[1]).sqrt();
        let bound = ((1.0 - nm * nm - r * r) / (2.0 * r * nm)).clamp(-1.0, 1.0);
        let half = std::f64::consts::PI - bound.acos();
        let phi = m[1].atan2(m[0]) + std::f64::consts::PI;
        (lo, hi) = (phi - half, phi + half);
    }
    move |u: f64| {
        let t = lo + (hi - lo) * u;
        if line {
            [foot[0] + t * dir[0], foot[1] + t * dir[1]]
        } else {
            [m[0] + r * t.cos(), m[1] + r * t.sin()]
        }
    }
}

/// Largest margin `min_k d(y, z_k) - d(y, z_i)` over the bisector of `i, j`,
/// by a coarse scan refined around its best local maxima.
pub fn bisector_margin(nuclei: &[&HPoint], i: usize, j: usize) -> f64 {
    let arc = bisector_arc(nuclei[i].xy(), nuclei[j].xy());
    let margin = |u: f64| {
        let y = arc(u);
        if y[0] * y[0] + y[1] * y[1] >= 1.0 - 1e-12 {
            return f64::NEG_INFINITY;
        }
        let di = d(y, nuclei[i]);
        (0..nuclei.len())
            .filter(|&k| k != i && k != j)
            .map(|k| d(y, nuclei[k]))
            .fold(f64::INFINITY, f64::min)
            - di
    };
    const COARSE: usize = 4000;
    let vals: Vec<f64> = (1..COARSE).map(|s| margin(s as f64 / COARSE as f64)).collect();
    let mut peaks: Vec<usize> = (0..vals.len())
        .filter(|&s| (s == 0 || vals[s] >= vals[s - 1]) && (s + 1 == vals.len() || vals[s] >= vals[s + 1]))
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for &s in peaks.iter().take(3) {
        let centre = (s + 1) as f64 / COARSE as f64;
        for f in 0..=400 {
            let u = centre + (f as f64 / 200.0 - 1.0) / COARSE as f64;
            if u > 0.0 && u < 1.0 {
                best = best.max(margin(u));
            }
        }
    }
    best
}

/// Black clusters by breadth-first search over the Delaunay graph, sorted.
pub fn bfs_clusters(tess: &Tessellation<'_>, p: f64) -> Vec<Vec<usize>> {
    let cfg = tess.config();
    let mut seen = vec![false; tess.len()];
    let mut out = Vec::new();
    for s in 0..tess.len() {
        if seen[s] || !cfg.is_black(s, p) {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(z) = queue.pop_front() {
            for &w in tess.neighbors(z) {
                if !seen[w] && cfg.is_black(w, p) {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort();
    out
}
