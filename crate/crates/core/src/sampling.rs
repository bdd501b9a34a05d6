//! Homogeneous Poisson point processes on hyperbolic balls and sectors.
//!
//! Each nucleus carries a uniform mark; it is black at parameter `p` iff
//! `mark <= p`, which couples all values of `p` on one sample.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::discretization::{self, SectorId};
use crate::error::{Error, Result};
use crate::geometry::{self, BallSpec, HPoint};
use crate::plane::P2;
use crate::rng::RngStream;

/// Bisection tolerance (hyperbolic length) of the radial CDF inversion.
pub const RADIAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nucleus {
    pub point: HPoint,
    pub mark: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoredConfig {
    pub lambda: f64,
    pub d: usize,
    pub window_radius: f64,
    pub seed: u64,
    pub nuclei: Vec<Nucleus>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    lambda: f64,
    d: usize,
    window_radius: f64,
    seed: u64,
}

impl ColoredConfig {
    /// A configuration from explicit nuclei (used by tests and tooling).
    pub fn from_nuclei(
        lambda: f64,
        window_radius: f64,
        seed: u64,
        nuclei: Vec<Nucleus>,
    ) -> Result<Self> {
        let d = nuclei.first().map_or(2, |n| n.point.dim());
        for n in &nuclei {
            if n.point.dim() != d {
                return Err(Error::Usage("nuclei of mixed dimension".into()));
            }
            if !(0.0..=1.0).contains(&n.mark) {
                return Err(Error::Domain(format!("mark {} outside [0, 1]", n.mark)));
            }
        }
        Ok(Self { lambda, d, window_radius, seed, nuclei })
    }

    /// Planar nuclei with the given marks, window radius taken from the farthest point.
    pub fn planar(points: &[(P2, f64)]) -> Result<Self> {
        let nuclei = points
            .iter()
            .map(|&(p, mark)| Ok(Nucleus { point: HPoint::new(p.to_vec())?, mark }))
            .collect::<Result<Vec<_>>>()?;
        let r = nuclei.iter().map(|n| n.point.radius()).fold(0.0, f64::max);
        Self::from_nuclei(1.0, r, 0, nuclei)
    }

    pub fn len(&self) -> usize {
        self.nuclei.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nuclei.is_empty()
    }

    pub fn is_black(&self, i: usize, p: f64) -> bool {
        self.nuclei[i].mark <= p
    }

    /// Header line plus one `x_1 ... x_d mark` line per nucleus.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            lambda: self.lambda,
            d: self.d,
            window_radius: self.window_radius,
            seed: self.seed,
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for n in &self.nuclei {
            let mut line = String::new();
            for c in n.point.coords() {
                line.push_str(&format!("{c:.16e} "));
            }
            line.push_str(&format!("{:.16e}", n.mark));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::Parse("missing header line".into()))??;
        let h: Header = serde_json::from_str(&first)?;
        let mut nuclei = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))?;
            if vals.len() != h.d + 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields, found {}",
                    i + 2,
                    h.d + 1,
                    vals.len()
                )));
            }
            let mark = vals[h.d];
            nuclei.push(Nucleus { point: HPoint::new(vals[..h.d].to_vec())?, mark });
        }
        let mut cfg = Self::from_nuclei(h.lambda, h.window_radius, h.seed, nuclei)?;
        cfg.d = h.d;
        Ok(cfg)
    }
}

pub fn expected_count(lambda: f64, window_radius: f64, d: usize) -> Result<f64> {
    Ok(lambda * geometry::hyp_ball_volume(window_radius, d)?)
}

pub(crate) fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
}

fn unit_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Hyperbolic radius with law `vol(t)` restricted to `[r1, r2)`, by bisection.
fn radius_by_bisection(u: f64, r1: f64, r2: f64, d: usize) -> f64 {
    let v = |t: f64| geometry::hyp_ball_volume(t, d).expect("valid radius");
    let (v1, v2) = (v(r1), v(r2));
    let target = v1 + u * (v2 - v1);
    let (mut lo, mut hi) = (r1, r2);
    while hi - lo > RADIAL_TOL {
        let mid = 0.5 * (lo + hi);
        if v(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Euclidean radius of a hyperbolic-uniform point of the annulus `[r1, r2)`.
pub(crate) fn sample_euclidean_radius(rng: &mut ChaCha8Rng, r1: f64, r2: f64, d: usize) -> f64 {
    let u: f64 = rng.random();
    if d == 2 {
        // the area inside radius t is 4π sinh²(t/2), so invert in s = sinh(t/2)
        let (s1, s2) = ((0.5 * r1).sinh(), (0.5 * r2).sinh());
        let s = (s1 * s1 + u * (s2 * s2 - s1 * s1)).sqrt();
        s / (1.0 + s * s).sqrt()
    } else {
        (0.5 * radius_by_bisection(u, r1, r2, d)).tanh()
    }
}

fn validate(lambda: f64, radius: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("window radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Poisson process of intensity `lambda` in `B(0, window_radius)` of H^d.
pub fn sample_ppp(lambda: f64, window_radius: f64, d: usize, stream: &RngStream) -> Result<ColoredConfig> {
    validate(lambda, window_radius)?;
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
    }
    let mut rng = stream.rng();
    let count = poisson_count(&mut rng, expected_count(lambda, window_radius, d)?);
    let mut nuclei = Vec::with_capacity(count);
    for _ in 0..count {
        let rho = sample_euclidean_radius(&mut rng, 0.0, window_radius, d);
        let dir = unit_direction(&mut rng, d);
        let point = HPoint::new(dir.iter().map(|x| x * rho).collect())?;
        nuclei.push(Nucleus { point, mark: rng.random() });
    }
    Ok(ColoredConfig { lambda, d, window_radius, seed: stream.seed(), nuclei })
}

/// Indices of nuclei with `mark <= p`.
pub fn black_nuclei(config: &ColoredConfig, p: f64) -> Vec<usize> {
    (0..config.len()).filter(|&i| config.nuclei[i].mark <= p).collect()
}

/// Poisson points of one sector of the ε-grid, as `(point, mark)` pairs.
pub(crate) fn sample_sector(
    rng: &mut ChaCha8Rng,
    lambda: f64,
    epsilon: f64,
    id: SectorId,
    count_k: u64,
) -> Vec<(P2, f64)> {
    let mean = lambda * discretization::sector_area(epsilon, id.k, count_k);
    let n = poisson_count(rng, mean);
    let (r1, r2) = (2.0 * id.k as f64 * epsilon, 2.0 * (id.k + 1) as f64 * epsilon);
    let (t1, t2) = if id.k == 0 {
        (0.0, TAU)
    } else {
        (discretization::wedge_start(count_k, id.l), discretization::wedge_start(count_k, id.l + 1))
    };
    (0..n)
        .map(|_| {
            let rho = sample_euclidean_radius(rng, r1, r2, 2);
            let th = t1 + (t2 - t1) * rng.random::<f64>();
            ([rho * th.cos(), rho * th.sin()], rng.random())
        })
        .collect()
}

/// A region of the window that can be resampled independently.
#[derive(Clone, Debug)]
pub enum Region {
    /// Sector `id` of the ε-grid (planar only).
    Sector { epsilon: f64, id: SectorId },
    Ball(BallSpec),
}

impl Region {
    fn contains(&self, y: &HPoint) -> bool {
        match self {
            Region::Sector { epsilon, id } => {
                let k = discretization::ring_of(*epsilon, y.radius());
                if k != id.k {
                    return false;
                }
                if k == 0 {
                    return true;
                }
                let n = discretization::sector_count(*epsilon, k).expect("checked on entry");
                discretization::wedge_of(n, discretization::angle_of(y.xy())) == id.l
            }
            Region::Ball(b) => b.contains(y),
        }
    }
}

/// Möbius translation of the ball taking the origin to `a`.
fn translate(a: &[f64], x: &[f64]) -> Vec<f64> {
    let ax: f64 = a.iter().zip(x).map(|(u, v)| u * v).sum();
    let a2: f64 = a.iter().map(|u| u * u).sum();
    let x2: f64 = x.iter().map(|u| u * u).sum();
    let den = 1.0 + 2.0 * ax + a2 * x2;
    a.iter()
        .zip(x)
        .map(|(ai, xi)| ((1.0 + 2.0 * ax + x2) * ai + (1.0 - a2) * xi) / den)
        .collect()
}

/// Replaces the points of `region` by a fresh Poisson sample of the same
/// intensity; nuclei outside the region are kept bit-for-bit and in order.
pub fn resample_region(config: &ColoredConfig, region: &Region, stream: &RngStream) -> Result<ColoredConfig> {
    let mut rng = stream.rng();
    let fresh: Vec<Nucleus> = match region {
        Region::Sector { epsilon, id } => {
            if config.d != 2 {
                return Err(Error::Usage("sector regions are planar".into()));
            }
            let n = discretization::sector_count(*epsilon, id.k)?;
            if id.l >= n {
                return Err(Error::Usage(format!("no sector {id}")));
            }
            if 2.0 * (id.k + 1) as f64 * epsilon > config.window_radius + 1e-12 {
                return Err(Error::Usage(format!("sector {id} is not inside the window")));
            }
            sample_sector(&mut rng, config.lambda, *epsilon, *id, n)
                .into_iter()
                .map(|(p, mark)| Ok(Nucleus { point: HPoint::new(p.to_vec())?, mark }))
                .collect::<Result<_>>()?
        }
        Region::Ball(b) => {
            if b.center.dim() != config.d {
                return Err(Error::Usage("ball dimension differs from the config".into()));
            }
            if b.outer_radius() > config.window_radius + 1e-12 {
                return Err(Error::Usage("ball is not inside the window".into()));
            }
            let count = if b.radius > 0.0 {
                poisson_count(&mut rng, expected_count(config.lambda, b.radius, config.d)?)
            } else {
                0
            };
            (0..count)
                .map(|_| {
                    let rho = sample_euclidean_radius(&mut rng, 0.0, b.radius, config.d);
                    let dir = unit_direction(&mut rng, config.d);
                    let local: Vec<f64> = dir.iter().map(|x| x * rho).collect();
                    let point = HPoint::new(translate(b.center.coords(), &local))?;
                    Ok(Nucleus { point, mark: rng.random() })
                })
                .collect::<Result<_>>()?
        }
    };
    let mut nuclei: Vec<Nucleus> =
        config.nuclei.iter().filter(|n| !region.contains(&n.point)).cloned().collect();
    nuclei.extend(fresh);
    Ok(ColoredConfig { nuclei, ..config.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_config() {
        let s = RngStream::new(11);
        let a = sample_ppp(1.0, 2.0, 2, &s).unwrap();
        let b = sample_ppp(1.0, 2.0, 2, &s).unwrap();
        assert_eq!(a, b);
        assert!(a.nuclei.iter().all(|n| n.point.radius() < 2.0 + 1e-9));
    }

    #[test]
    fn tiny_intensity_is_empty() {
        let c = sample_ppp(1e-12, 1.0, 2, &RngStream::new(1)).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(sample_ppp(0.0, 1.0, 2, &RngStream::new(1)).is_err());
        assert!(sample_ppp(1.0, -1.0, 2, &RngStream::new(1)).is_err());
    }

    #[test]
    fn expected_count_examples() {
        let e = expected_count(1.0, 2.0, 2).unwrap();
        assert!((e - 17.3554).abs() < 1e-4);
        assert_eq!(expected_count(2.0, 2.0, 2).unwrap(), 2.0 * e);
        assert_eq!(expected_count(1.0, 0.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn black_sets_are_nested() {
        let c = sample_ppp(1.0, 3.0, 2, &RngStream::new(4)).unwrap();
        assert_eq!(black_nuclei(&c, 1.0).len(), c.len());
        assert!(black_nuclei(&c, 0.0).is_empty());
        let a = black_nuclei(&c, 0.3);
        let b = black_nuclei(&c, 0.6);
        assert!(a.iter().all(|i| b.contains(i)));
    }

    #[test]
    fn bisection_matches_closed_form_in_the_plane() {
        for &u in &[0.0, 0.1, 0.5, 0.93] {
            let t = radius_by_bisection(u, 0.5, 3.0, 2);
            let (s1, s2) = (0.25f64.sinh(), 1.5f64.sinh());
            let s = (s1 * s1 + u * (s2 * s2 - s1 * s1)).sqrt();
            assert!((t - 2.0 * s.asinh()).abs() < 1e-10);
        }
    }

    #[test]
    fn serialization_round_trips_bitwise() {
        let c = sample_ppp(1.0, 2.5, 2, &RngStream::new(3)).unwrap();
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        let back = ColoredConfig::read_from(&buf[..]).unwrap();
        assert_eq!(back, c);
        let c3 = sample_ppp(0.5, 1.5, 3, &RngStream::new(3)).unwrap();
        let mut buf = Vec::new();
        c3.write_to(&mut buf).unwrap();
        assert_eq!(ColoredConfig::read_from(&buf[..]).unwrap(), c3);
    }

    #[test]
    fn resampling_is_local() {
        let c = sample_ppp(1.0, 3.0, 2, &RngStream::new(8)).unwrap();
        let region = Region::Sector { epsilon: 0.5, id: SectorId::new(1, 2) };
        let r = resample_region(&c, &region, &RngStream::new(8).child(99)).unwrap();
        let outside: Vec<Nucleus> =
            c.nuclei.iter().filter(|n| !region.contains(&n.point)).cloned().collect();
        assert_eq!(&r.nuclei[..outside.len()], &outside[..]);
        assert!(r.nuclei[outside.len()..].iter().all(|n| region.contains(&n.point)));
        let far = Region::Sector { epsilon: 0.5, id: SectorId::new(5, 0) };
        assert!(resample_region(&c, &far, &RngStream::new(1)).is_err());
    }

    #[test]
    fn resampling_an_empty_ball_changes_nothing() {
        let c = sample_ppp(1.0, 3.0, 2, &RngStream::new(8)).unwrap();
        let b = BallSpec::new(HPoint::from_polar(1.0, 0.2).unwrap(), 0.0).unwrap();
        let r = resample_region(&c, &Region::Ball(b), &RngStream::new(2)).unwrap();
        assert_eq!(r, c);
    }

    #[test]
    fn ball_resample_stays_in_ball() {
        let c = sample_ppp(1.0, 3.0, 2, &RngStream::new(8)).unwrap();
        let b = BallSpec::new(HPoint::from_polar(1.0, 0.2).unwrap(), 1.5).unwrap();
        let region = Region::Ball(b.clone());
        for s in 0..20 {
            let r = resample_region(&c, &region, &RngStream::new(s)).unwrap();
            let kept = c.nuclei.iter().filter(|n| !b.contains(&n.point)).count();
            assert!(r.nuclei[kept..].iter().all(|n| b.contains(&n.point)));
        }
    }
}
