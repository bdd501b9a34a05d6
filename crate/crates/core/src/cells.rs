//! Hyperbolic Voronoi cells in the Poincaré disk.
//!
//! With `f_z(y) = |y - z|^2 / (1 - |z|^2)`, the hyperbolic distance from `y`
//! to `z` is increasing in `f_z(y)` for fixed `y`, so the cell of `z` is
//! `{y : f_z(y) <= f_w(y) for all w}`: an intersection of generalized-circle
//! constraints. Delaunay neighbors suffice for `w`.
//!
//! Hyperbolic disks are Euclidean disks inside the unit disk, so a Euclidean
//! Delaunay edge is a hyperbolic one iff some empty circle through its ends
//! fits inside the unit disk.

use crate::delaunay::{Delaunay, TriId, VertexId};
use crate::plane::{self, Quadric, P2};

/// Constraint `f_z(y) <= f_w(y)`: the closed side of the bisector towards `z`.
/// `None` if it cannot bind (identical points).
pub(crate) fn bisector(z: P2, w: P2) -> Option<Quadric> {
    let alpha = 1.0 / (1.0 - plane::norm2(z));
    let beta = 1.0 / (1.0 - plane::norm2(w));
    let a = alpha - beta;
    let b = plane::sub(plane::scale(w, 2.0 * beta), plane::scale(z, 2.0 * alpha));
    let c = alpha * plane::norm2(z) - beta * plane::norm2(w);
    Quadric::new(a, b, c).ok().flatten()
}

/// Constraints of the cell of `z` against the listed neighbors.
pub(crate) fn cell_constraints(z: P2, neighbors: impl IntoIterator<Item = P2>) -> Vec<Quadric> {
    neighbors.into_iter().filter_map(|w| bisector(z, w)).collect()
}

/// Euclidean disk of the closed hyperbolic ball `B(0, r)`.
pub(crate) fn origin_ball(r: f64) -> Quadric {
    Quadric::disk([0.0, 0.0], (0.5 * r).tanh())
}

/// Whether the circumdisk `(c, r)` lies inside the open unit disk.
#[inline]
pub(crate) fn circle_inside(c: P2, r: f64) -> bool {
    plane::norm(c) + r < 1.0
}

/// Hyperbolic distance from the origin to the hyperbolic center of the
/// Euclidean circle `(c, r)` (which must lie inside the unit disk).
pub(crate) fn center_distance_from_origin(c: P2, r: f64) -> f64 {
    let nc = plane::norm(c);
    ((nc + r).atanh() + (nc - r).atanh()).abs()
}

/// Decides whether a circle through `a` and `b` with center `m + s n`, for some
/// `s` in `[lo, hi]` (`n` the left unit normal of `a -> b`), fits inside the
/// unit disk.
pub(crate) fn witness_exists(a: P2, b: P2, lo: f64, hi: f64) -> bool {
    let m = plane::scale(plane::add(a, b), 0.5);
    let ab = plane::sub(b, a);
    let len = plane::norm(ab);
    if len == 0.0 {
        return false;
    }
    let h = 0.5 * len;
    let n = [-ab[1] / len, ab[0] / len];
    // a circle of radius >= 1 never fits, and the radius is sqrt(h^2 + s^2)
    let (lo, hi) = (lo.max(-1.0), hi.min(1.0));
    if lo > hi {
        return false;
    }
    let g = |s: f64| plane::norm(plane::add(m, plane::scale(n, s))) + (h * h + s * s).sqrt();
    if g(lo) < 1.0 || g(hi) < 1.0 {
        return true;
    }
    // g is convex: golden-section search for its minimum
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x0, mut x3) = (lo, hi);
    let mut x1 = x3 - phi * (x3 - x0);
    let mut x2 = x0 + phi * (x3 - x0);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..200 {
        if g1.min(g2) < 1.0 {
            return true;
        }
        if x3 - x0 < 1e-15 {
            break;
        }
        if g1 < g2 {
            x3 = x2;
            x2 = x1;
            g2 = g1;
            x1 = x3 - phi * (x3 - x0);
            g1 = g(x1);
        } else {
            x0 = x1;
            x1 = x2;
            g1 = g2;
            x2 = x0 + phi * (x3 - x0);
            g2 = g(x2);
        }
    }
    g1.min(g2) < 1.0
}

/// Parameter `s` of a circumcenter `c` along the bisector of `a -> b`.
fn center_param(a: P2, b: P2, c: P2) -> f64 {
    let m = plane::scale(plane::add(a, b), 0.5);
    let ab = plane::sub(b, a);
    let len = plane::norm(ab);
    plane::dot(plane::sub(c, m), [-ab[1] / len, ab[0] / len])
}

/// Circumcircle of a finite triangle of `dt`.
pub(crate) fn tri_circle(dt: &Delaunay, t: TriId) -> (P2, f64) {
    let [a, b, c] = dt.tri(t).v.map(|v| dt.point(v));
    plane::circumcircle(a, b, c).expect("Delaunay triangles are non-degenerate")
}

/// Whether the Delaunay edge `a -> b` with the given left/right triangles is
/// an edge of the hyperbolic Delaunay graph.
pub(crate) fn hyperbolic_edge(
    dt: &Delaunay,
    a: VertexId,
    b: VertexId,
    left: Option<TriId>,
    right: Option<TriId>,
) -> bool {
    let (pa, pb) = (dt.point(a), dt.point(b));
    let param = |t: Option<TriId>| -> Option<f64> {
        let t = t?;
        if dt.tri(t).is_ghost() {
            None
        } else {
            Some(center_param(pa, pb, tri_circle(dt, t).0))
        }
    };
    // circles with s beyond the left circumcenter swallow the left apex
    let hi = param(left).unwrap_or(f64::INFINITY);
    let lo = param(right).unwrap_or(f64::NEG_INFINITY);
    witness_exists(pa, pb, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dist2d, hyperbolic_center_of_circle};

    #[test]
    fn bisector_sides() {
        let z = [0.1, 0.2];
        let w = [-0.4, 0.3];
        let q = bisector(z, w).unwrap();
        assert!(q.eval(z) < 0.0);
        assert!(q.eval(w) > 0.0);
        // a point on the hyperbolic bisector evaluates to ~0
        let mut lo = z;
        let mut hi = w;
        for _ in 0..80 {
            let mid = plane::scale(plane::add(lo, hi), 0.5);
            if dist2d(mid, z) < dist2d(mid, w) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(q.eval(lo).abs() < 1e-12);
    }

    #[test]
    fn center_distance_matches_center_point() {
        let (c, r) = ([0.2, -0.1], 0.3);
        let h = hyperbolic_center_of_circle(c, r);
        let d = dist2d([0.0, 0.0], h);
        assert!((center_distance_from_origin(c, r) - d).abs() < 1e-12);
    }

    #[test]
    fn small_pair_always_has_witness() {
        assert!(witness_exists([0.1, 0.0], [0.2, 0.0], f64::NEG_INFINITY, f64::INFINITY));
        // far apart near the boundary but on a common diameter-ish geodesic
        assert!(witness_exists([0.99, 0.0], [0.0, 0.99], f64::NEG_INFINITY, f64::INFINITY));
        // constrained to circles bulging outward from the disk
        assert!(!witness_exists([0.9, 0.0], [0.0, 0.9], -1.0, -0.9));
    }
}
