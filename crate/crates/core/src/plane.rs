//! Planar Euclidean helpers in Poincaré-disk coordinates.
//!
//! Besides vector arithmetic and exact predicates this module hosts a small
//! feasibility solver for regions cut out by "generalized circles"
//! `a|y|^2 + b.y + c <= 0`. Hyperbolic half-planes, hyperbolic disks, annuli
//! about the origin and wedges are all of this form, so cell/sector/ball
//! intersection questions reduce to one call of [`feasible_point`].

use robust::{incircle, orient2d, Coord};

pub type P2 = [f64; 2];

#[inline]
pub fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: P2, b: P2) -> P2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: P2, s: f64) -> P2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm2(a: P2) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: P2) -> f64 {
    norm2(a).sqrt()
}

#[inline]
fn coord(p: P2) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

/// Exact orientation: positive when `a, b, c` turn counter-clockwise.
#[inline]
pub fn orient(a: P2, b: P2, c: P2) -> f64 {
    orient2d(coord(a), coord(b), coord(c))
}

/// Exact in-circle test: positive when `d` lies strictly inside the circle
/// through the counter-clockwise triple `a, b, c`.
#[inline]
pub fn in_circle(a: P2, b: P2, c: P2, d: P2) -> f64 {
    incircle(coord(a), coord(b), coord(c), coord(d))
}

/// Euclidean circumcircle `(center, radius)`; `None` for collinear input.
pub fn circumcircle(a: P2, b: P2, c: P2) -> Option<(P2, f64)> {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let d = 2.0 * cross(ab, ac);
    if d == 0.0 {
        return None;
    }
    let (l1, l2) = (norm2(ab), norm2(ac));
    let ux = (ac[1] * l1 - ab[1] * l2) / d;
    let uy = (ab[0] * l2 - ac[0] * l1) / d;
    let center = [a[0] + ux, a[1] + uy];
    Some((center, (ux * ux + uy * uy).sqrt()))
}

/// Constraint `a|y|^2 + b.y + c <= 0`, scaled so that its value is close to the
/// signed Euclidean distance to the boundary curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadric {
    pub a: f64,
    pub b: P2,
    pub c: f64,
}

/// Largest circle radius handled as a genuine circle when generating candidates;
/// flatter circles are seeded as lines and then polished.
const LINE_RADIUS: f64 = 1e6;
/// Feasibility slack in normalized (≈ Euclidean distance) units.
pub const FEAS_TOL: f64 = 1e-10;

impl Quadric {
    /// Normalizes a raw constraint. Returns `Ok(None)` if the constraint is
    /// vacuous (holds everywhere) and `Err(())` if it can never hold.
    pub fn new(a: f64, b: P2, c: f64) -> Result<Option<Self>, ()> {
        let disc = norm2(b) - 4.0 * a * c;
        if disc <= 0.0 || !disc.is_finite() {
            // no boundary curve: sign is constant (up to a single point)
            let sign = if a != 0.0 { a } else { c };
            return if sign > 0.0 { Err(()) } else { Ok(None) };
        }
        let g = disc.sqrt();
        Ok(Some(Self {
            a: a / g,
            b: scale(b, 1.0 / g),
            c: c / g,
        }))
    }

    /// Closed Euclidean disk `|y - center| <= r`.
    pub fn disk(center: P2, r: f64) -> Self {
        Self::new(1.0, scale(center, -2.0), norm2(center) - r * r)
            .ok()
            .flatten()
            .unwrap_or(Self { a: 0.0, b: [0.0, 0.0], c: 0.0 })
    }

    /// Complement of the open disk: `|y - center| >= r`.
    pub fn outside_disk(center: P2, r: f64) -> Self {
        let d = Self::disk(center, r);
        Self { a: -d.a, b: scale(d.b, -1.0), c: -d.c }
    }

    /// Half-plane `n.y <= offset`.
    pub fn half_plane(n: P2, offset: f64) -> Self {
        let l = norm(n);
        Self { a: 0.0, b: scale(n, 1.0 / l), c: -offset / l }
    }

    #[inline]
    pub fn eval(&self, y: P2) -> f64 {
        self.a * norm2(y) + dot(self.b, y) + self.c
    }

    /// Euclidean distance from `y` to the boundary curve.
    pub fn boundary_distance(&self, y: P2) -> f64 {
        if self.a == 0.0 {
            // normalized: |b| = 1
            return (dot(self.b, y) + self.c).abs();
        }
        let m = scale(self.b, -0.5 / self.a);
        (norm(sub(y, m)) - 0.5 / self.a.abs()).abs()
    }

    /// Whether the closed disk `(c, r)` lies strictly outside the constraint.
    pub fn excludes_disk(&self, c: P2, r: f64) -> bool {
        self.eval(c) > 0.0 && self.boundary_distance(c) > r
    }

    #[inline]
    fn grad(&self, y: P2) -> P2 {
        add(scale(y, 2.0 * self.a), self.b)
    }

    fn radius(&self) -> f64 {
        if self.a == 0.0 {
            f64::INFINITY
        } else {
            0.5 / self.a.abs()
        }
    }

    fn is_line_like(&self) -> bool {
        self.radius() > LINE_RADIUS
    }

    fn center(&self) -> P2 {
        scale(self.b, -0.5 / self.a)
    }

    /// Some point on the boundary curve.
    fn boundary_point(&self) -> P2 {
        if self.is_line_like() {
            let nb = norm2(self.b);
            // foot of the (approximate) line from the origin, then polish
            let p = scale(self.b, -self.c / nb);
            project(self, p)
        } else {
            let c = self.center();
            let r = self.radius();
            let nc = norm(c);
            if nc > 0.0 {
                sub(c, scale(c, r / nc))
            } else {
                add(c, [r, 0.0])
            }
        }
    }
}

/// Newton projection of `p` onto the zero set of `q`.
fn project(q: &Quadric, mut p: P2) -> P2 {
    for _ in 0..4 {
        let g = q.grad(p);
        let gg = norm2(g);
        if gg == 0.0 {
            break;
        }
        p = sub(p, scale(g, q.eval(p) / gg));
    }
    p
}

/// Newton polish of a common zero of two constraints.
fn polish(q1: &Quadric, q2: &Quadric, mut p: P2) -> P2 {
    for _ in 0..3 {
        let g1 = q1.grad(p);
        let g2 = q2.grad(p);
        let det = cross(g1, g2);
        if det.abs() < 1e-300 {
            break;
        }
        let (f1, f2) = (q1.eval(p), q2.eval(p));
        let dx = (f1 * g2[1] - f2 * g1[1]) / det;
        let dy = (g1[0] * f2 - g2[0] * f1) / det;
        let next = [p[0] - dx, p[1] - dy];
        if !next[0].is_finite() || !next[1].is_finite() {
            break;
        }
        p = next;
    }
    p
}

/// Points where a line `y = p0 + s d` (|d| = 1) meets the zero set of `q`.
fn line_hits(q: &Quadric, p0: P2, d: P2, out: &mut Vec<P2>) {
    let qa = q.a;
    let qb = 2.0 * q.a * dot(p0, d) + dot(q.b, d);
    let qc = q.eval(p0);
    if qa.abs() < 1e-14 * (qb.abs() + qc.abs()).max(1e-300) {
        if qb != 0.0 {
            out.push(add(p0, scale(d, -qc / qb)));
        }
        return;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    let disc = if disc < 0.0 && disc > -1e-12 * qb * qb { 0.0 } else { disc };
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    // numerically stable root pair
    let t = -0.5 * (qb + qb.signum() * sq);
    if t != 0.0 {
        out.push(add(p0, scale(d, t / qa)));
        out.push(add(p0, scale(d, qc / t)));
    } else {
        out.push(p0);
    }
}

/// Points where the circle of `q1` (not line-like) meets the zero set of `q2`.
fn circle_hits(q1: &Quadric, q2: &Quadric, out: &mut Vec<P2>) {
    let m = q1.center();
    let r = q1.radius();
    let k = q2.a * (norm2(m) + r * r) + dot(q2.b, m) + q2.c;
    let pc = r * (2.0 * q2.a * m[0] + q2.b[0]);
    let ps = r * (2.0 * q2.a * m[1] + q2.b[1]);
    let amp = pc.hypot(ps);
    if amp == 0.0 {
        return;
    }
    let ratio = -k / amp;
    if ratio.abs() > 1.0 + 1e-9 {
        return;
    }
    let phi = ps.atan2(pc);
    let delta = ratio.clamp(-1.0, 1.0).acos();
    for t in [phi + delta, phi - delta] {
        out.push([m[0] + r * t.cos(), m[1] + r * t.sin()]);
    }
}

fn pair_hits(q1: &Quadric, q2: &Quadric, out: &mut Vec<P2>) {
    let start = out.len();
    match (q1.is_line_like(), q2.is_line_like()) {
        (false, _) => circle_hits(q1, q2, out),
        (true, false) => circle_hits(q2, q1, out),
        (true, true) => {
            // seed from the two tangent lines at their boundary points
            let p1 = q1.boundary_point();
            let n1 = q1.grad(p1);
            let d1 = [-n1[1], n1[0]];
            let l = norm(d1);
            if l > 0.0 {
                line_hits(q2, p1, scale(d1, 1.0 / l), out);
            }
        }
    }
    for p in &mut out[start..] {
        *p = polish(q1, q2, *p);
    }
}

/// Returns a point satisfying every constraint within [`FEAS_TOL`], or `None`
/// when the region is empty.
///
/// If the feasible set is non-empty and not the whole plane, its boundary
/// contains either a whole constraint curve or a point where two curves meet,
/// so testing one point per curve plus all pairwise intersections is complete.
pub fn feasible_point(constraints: &[Quadric]) -> Option<P2> {
    let ok = |y: P2| constraints.iter().all(|q| q.eval(y) <= FEAS_TOL);
    if constraints.is_empty() {
        return Some([0.0, 0.0]);
    }
    for q in constraints {
        let y = q.boundary_point();
        if ok(y) {
            return Some(y);
        }
    }
    let mut hits = Vec::with_capacity(4);
    for i in 0..constraints.len() {
        for j in (i + 1)..constraints.len() {
            hits.clear();
            pair_hits(&constraints[i], &constraints[j], &mut hits);
            if let Some(&y) = hits.iter().find(|&&y| ok(y)) {
                return Some(y);
            }
        }
    }
    None
}
