//! The ε-grid of annulus sectors on the hyperbolic plane.
//!
//! Annulus `k` covers hyperbolic radii `[2kε, 2(k+1)ε)` and is cut into
//! `N_k = floor(sinh((2k+1)ε) / sinh ε) + 1` congruent sectors starting at angle
//! 0; annulus 0 is the single disk `B(0, 2ε)`. Every sector has area at most
//! `4π sinh²ε`, and each carries a representative point at its inner,
//! low-angle corner (the origin for `k = 0`).

use std::f64::consts::{PI, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::HPoint;
use crate::plane::P2;

/// Largest sector count handled; beyond 2^53 the floor is not representable.
pub const MAX_SECTOR_COUNT: u64 = 1 << 53;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectorId {
    pub k: u32,
    pub l: u64,
}

impl SectorId {
    pub const ORIGIN: SectorId = SectorId { k: 0, l: 0 };

    pub fn new(k: u32, l: u64) -> Self {
        Self { k, l }
    }
}

impl std::fmt::Display for SectorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.k, self.l)
    }
}

/// `N_k` for annulus `k`, or an out-of-range error when it exceeds 2^53.
pub fn sector_count(epsilon: f64, k: u32) -> Result<u64> {
    if k == 0 {
        return Ok(1);
    }
    let ratio = ((2 * k + 1) as f64 * epsilon).sinh() / epsilon.sinh();
    if !ratio.is_finite() || ratio >= MAX_SECTOR_COUNT as f64 {
        return Err(Error::OutOfRange(format!(
            "annulus {k} at epsilon {epsilon} has more than 2^53 sectors"
        )));
    }
    Ok(ratio.floor() as u64 + 1)
}

#[inline]
fn ring_inner(epsilon: f64, k: u32) -> f64 {
    2.0 * k as f64 * epsilon
}

/// Angle of `p` normalized to `[0, 2π)`.
#[inline]
pub(crate) fn angle_of(p: P2) -> f64 {
    let a = p[1].atan2(p[0]);
    if a < 0.0 {
        let w = a + TAU;
        if w >= TAU {
            0.0
        } else {
            w
        }
    } else {
        a
    }
}

/// Annulus index of hyperbolic radius `r` (inner boundary included).
pub(crate) fn ring_of(epsilon: f64, r: f64) -> u32 {
    let mut k = (r / (2.0 * epsilon)).floor().max(0.0) as u32;
    while k > 0 && ring_inner(epsilon, k) > r {
        k -= 1;
    }
    while ring_inner(epsilon, k + 1) <= r {
        k += 1;
    }
    k
}

/// Sector index of angle `theta ∈ [0, 2π)` among `count` equal wedges.
pub(crate) fn wedge_of(count: u64, theta: f64) -> u64 {
    let c = count as f64;
    let mut l = ((theta * c / TAU).floor().max(0.0) as u64).min(count - 1);
    while l > 0 && wedge_start(count, l) > theta {
        l -= 1;
    }
    while l + 1 < count && wedge_start(count, l + 1) <= theta {
        l += 1;
    }
    l
}

#[inline]
pub(crate) fn wedge_start(count: u64, l: u64) -> f64 {
    TAU * l as f64 / count as f64
}

/// The discretization of `B(0, max_radius)` (rounded up to a multiple of 2ε).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SectorIndex {
    epsilon: f64,
    counts: Vec<u64>,
}

impl SectorIndex {
    pub fn new(epsilon: f64, max_radius: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(max_radius >= 2.0 * epsilon && max_radius.is_finite()) {
            return Err(Error::Domain(format!(
                "max_radius {max_radius} must be at least 2*epsilon = {}",
                2.0 * epsilon
            )));
        }
        let q = max_radius / (2.0 * epsilon);
        let rings = if (q - q.round()).abs() < 1e-9 { q.round() } else { q.ceil() } as u32;
        let counts = (0..rings).map(|k| sector_count(epsilon, k)).collect::<Result<_>>()?;
        Ok(Self { epsilon, counts })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rings(&self) -> u32 {
        self.counts.len() as u32
    }

    /// Radius of the covered ball, a multiple of 2ε.
    pub fn covered_radius(&self) -> f64 {
        ring_inner(self.epsilon, self.rings())
    }

    pub fn count(&self, k: u32) -> u64 {
        self.counts[k as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_sectors(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn contains_id(&self, id: SectorId) -> bool {
        id.k < self.rings() && id.l < self.count(id.k)
    }

    /// All sector ids in lexicographic `(k, l)` order.
    pub fn ids(&self) -> impl Iterator<Item = SectorId> + '_ {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(k, &n)| (0..n).map(move |l| SectorId::new(k as u32, l)))
    }

    pub fn radial_interval(&self, id: SectorId) -> (f64, f64) {
        (ring_inner(self.epsilon, id.k), ring_inner(self.epsilon, id.k + 1))
    }

    pub fn angular_interval(&self, id: SectorId) -> (f64, f64) {
        let n = self.count(id.k);
        (wedge_start(n, id.l), wedge_start(n, id.l + 1))
    }

    pub fn representative(&self, id: SectorId) -> HPoint {
        if id.k == 0 {
            return HPoint::origin(2);
        }
        let r = ring_inner(self.epsilon, id.k);
        let theta = wedge_start(self.count(id.k), id.l);
        HPoint::from_polar(r, theta).expect("representative inside the disk")
    }

    pub fn locate(&self, y: &HPoint) -> Result<SectorId> {
        if y.dim() != 2 {
            return Err(Error::Usage("sectors are planar".into()));
        }
        let r = y.radius();
        if r >= self.covered_radius() {
            return Err(Error::OutOfRange(format!(
                "radius {r} is outside the covered ball of radius {}",
                self.covered_radius()
            )));
        }
        let k = ring_of(self.epsilon, r);
        if k == 0 {
            return Ok(SectorId::ORIGIN);
        }
        Ok(SectorId::new(k, wedge_of(self.count(k), angle_of(y.xy()))))
    }

    /// `4π sinh((2k+1)ε) sinh(ε) / N_k`, which is `4π sinh²ε` for `k = 0`.
    pub fn area(&self, id: SectorId) -> f64 {
        sector_area(self.epsilon, id.k, self.count(id.k))
    }

    /// Whether the sphere `S(0, rho)` meets the sector (or its closure).
    pub fn intersects_sphere(&self, id: SectorId, rho: f64, closure: bool) -> bool {
        let (lo, hi) = self.radial_interval(id);
        lo <= rho && (rho < hi || (closure && rho == hi))
    }

    /// CSV table `k,N_k,sector_area`.
    pub fn write_summary<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,N_k,sector_area")?;
        for k in 0..self.rings() {
            let n = self.count(k);
            writeln!(w, "{k},{n},{:.16e}", sector_area(self.epsilon, k, n))?;
        }
        Ok(())
    }
}

pub(crate) fn sector_area(epsilon: f64, k: u32, count: u64) -> f64 {
    if k == 0 {
        4.0 * PI * epsilon.sinh().powi(2)
    } else {
        4.0 * PI * ((2 * k + 1) as f64 * epsilon).sinh() * epsilon.sinh() / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::adaptive_simpson;

    #[test]
    fn count_examples() {
        assert_eq!(sector_count(0.5, 1).unwrap(), 5);
        assert_eq!(sector_count(0.5, 2).unwrap(), 12);
        assert_eq!(sector_count(0.5, 0).unwrap(), 1);
        assert!(sector_count(1.0, 400).is_err());
    }

    #[test]
    fn origin_annulus_is_one_sector() {
        let idx = SectorIndex::new(0.5, 3.0).unwrap();
        assert_eq!(idx.count(0), 1);
        assert_eq!(idx.representative(SectorId::ORIGIN), HPoint::origin(2));
        assert_eq!(idx.locate(&HPoint::origin(2)).unwrap(), SectorId::ORIGIN);
    }

    #[test]
    fn covered_radius_rounds_up() {
        assert_eq!(SectorIndex::new(0.5, 3.0).unwrap().rings(), 3);
        assert_eq!(SectorIndex::new(0.5, 3.2).unwrap().rings(), 4);
        assert!(SectorIndex::new(0.5, 0.9).is_err());
        assert!(SectorIndex::new(0.0, 3.0).is_err());
    }

    #[test]
    fn locate_examples() {
        let idx = SectorIndex::new(0.5, 4.0).unwrap();
        let y = HPoint::from_polar(1.2, 0.1).unwrap();
        assert_eq!(idx.locate(&y).unwrap(), SectorId::new(1, 0));
        // exactly 2ε = 1: Euclidean radius tanh(1/2) maps back to 1 within an ulp
        let on = HPoint::new(vec![0.5f64.tanh(), 0.0]).unwrap();
        assert_eq!(idx.locate(&on).unwrap().k, 1);
        let far = HPoint::from_polar(4.5, 0.0).unwrap();
        assert!(matches!(idx.locate(&far), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn area_examples() {
        let idx = SectorIndex::new(0.5, 4.0).unwrap();
        let a0 = idx.area(SectorId::ORIGIN);
        // 4π sinh²(0.5) = 3.41228; the commonly quoted 3.4127 is a loose rounding
        assert!((a0 - 4.0 * PI * 0.5f64.sinh().powi(2)).abs() < 1e-15);
        assert!((a0 - 3.4127).abs() < 1e-3, "{a0}");
        let a1 = idx.area(SectorId::new(1, 0));
        assert!((a1 - 2.789).abs() < 1e-3, "{a1}");
        // quadrature of the area element over the sector (1, 0)
        let (lo, hi) = idx.radial_interval(SectorId::new(1, 0));
        let (t1, t2) = idx.angular_interval(SectorId::new(1, 0));
        let dens = |s: f64| s * 4.0 / (1.0 - s * s).powi(2);
        let q = (t2 - t1) * adaptive_simpson(&dens, (lo / 2.0).tanh(), (hi / 2.0).tanh(), 1e-12);
        assert!((q - a1).abs() < 1e-9, "{q} {a1}");
    }

    #[test]
    fn sphere_intersection_rule() {
        let idx = SectorIndex::new(0.5, 4.0).unwrap();
        let hits = |rho: f64, closure: bool| {
            idx.ids().filter(|&id| idx.intersects_sphere(id, rho, closure)).collect::<Vec<_>>()
        };
        assert_eq!(hits(0.0, false), vec![SectorId::ORIGIN]);
        assert_eq!(hits(1.0, false).len(), 5);
        assert!(hits(1.0, false).iter().all(|id| id.k == 1));
        assert_eq!(hits(1.5, false).len(), 5);
        assert_eq!(hits(1.0, true).len(), 6);
    }

    #[test]
    fn representative_sits_on_corner() {
        let idx = SectorIndex::new(0.25, 3.0).unwrap();
        for id in idx.ids().filter(|id| id.k > 0) {
            let rep = idx.representative(id);
            assert!((rep.radius() - 2.0 * id.k as f64 * 0.25).abs() < 1e-12);
            let (t1, _) = idx.angular_interval(id);
            assert!((angle_of(rep.xy()) - t1).abs() < 1e-12 || (t1 == 0.0));
        }
    }

    #[test]
    fn summary_csv() {
        let idx = SectorIndex::new(0.5, 2.0).unwrap();
        let mut buf = Vec::new();
        idx.write_summary(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "k,N_k,sector_area");
        assert!(lines[2].starts_with("1,5,"));
    }
}
