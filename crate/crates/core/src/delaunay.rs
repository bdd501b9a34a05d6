//! Incremental Euclidean Delaunay triangulation (Bowyer-Watson).
//!
//! The convex hull is closed off with ghost triangles `(a, b, GHOST)`, one per
//! hull edge, so every vertex star is a closed cycle and the hull needs no
//! special casing. Predicates are exact (`robust`). Exactly cocircular
//! configurations are resolved by insertion order: a new point on an existing
//! circumcircle does not conflict with that triangle.
//!
//! Until three non-collinear points have arrived, points are buffered and the
//! structure reports the path graph along their common line.

use crate::plane::{self, P2};

pub type VertexId = u32;
pub type TriId = u32;

/// Vertex index standing for the point at infinity.
pub const GHOST: VertexId = u32::MAX;
const NONE: TriId = u32::MAX;

/// Triangle `v` in counter-clockwise order; `n[i]` is the triangle across the
/// edge opposite `v[i]`. Ghost triangles carry `GHOST` in slot 2, and the
/// outside of the hull lies to the left of `v[0] -> v[1]`.
#[derive(Clone, Copy, Debug)]
pub struct Triangle {
    pub v: [VertexId; 3],
    pub n: [TriId; 3],
    alive: bool,
}

impl Triangle {
    #[inline]
    pub fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }

    #[inline]
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.v.iter().position(|&x| x == v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insertion {
    New(VertexId),
    Duplicate(VertexId),
}

impl Insertion {
    pub fn id(self) -> VertexId {
        match self {
            Insertion::New(v) | Insertion::Duplicate(v) => v,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Delaunay {
    points: Vec<P2>,
    tris: Vec<Triangle>,
    free: Vec<TriId>,
    vertex_tri: Vec<TriId>,
    last: TriId,
    // scratch buffers reused across insertions
    cavity: Vec<TriId>,
    stack: Vec<TriId>,
    mark: Vec<u32>,
    epoch: u32,
}

#[inline]
fn rot(i: usize, k: usize) -> usize {
    (i + k) % 3
}

impl Delaunay {
    pub fn new() -> Self {
        Self { last: NONE, ..Default::default() }
    }

    /// Triangulation of `points` inserted in order; vertex ids of duplicates
    /// point to their first occurrence.
    pub fn from_points(points: &[P2]) -> (Self, Vec<VertexId>) {
        let mut dt = Self::new();
        let ids = points.iter().map(|&p| dt.insert(p).id()).collect();
        (dt, ids)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn point(&self, v: VertexId) -> P2 {
        self.points[v as usize]
    }

    pub fn points(&self) -> &[P2] {
        &self.points
    }

    /// `true` once a genuine two-dimensional triangulation exists.
    pub fn is_planar(&self) -> bool {
        self.last != NONE
    }

    #[inline]
    pub fn tri(&self, t: TriId) -> &Triangle {
        &self.tris[t as usize]
    }

    /// Live finite triangles.
    pub fn triangles(&self) -> impl Iterator<Item = (TriId, &Triangle)> {
        self.tris
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive && !t.is_ghost())
            .map(|(i, t)| (i as TriId, t))
    }

    pub fn insert(&mut self, p: P2) -> Insertion {
        assert!(p[0].is_finite() && p[1].is_finite(), "non-finite point");
        if !self.is_planar() {
            return self.insert_degenerate(p);
        }
        let t = self.locate(p);
        let tri = self.tris[t as usize];
        if !tri.is_ghost() {
            if let Some(&v) = tri.v.iter().find(|&&v| self.points[v as usize] == p) {
                return Insertion::Duplicate(v);
            }
        }
        let id = self.push_point(p);
        self.dig(id, t);
        Insertion::New(id)
    }

    fn push_point(&mut self, p: P2) -> VertexId {
        self.points.push(p);
        self.vertex_tri.push(NONE);
        (self.points.len() - 1) as VertexId
    }

    fn insert_degenerate(&mut self, p: P2) -> Insertion {
        if let Some(i) = self.points.iter().position(|&q| q == p) {
            return Insertion::Duplicate(i as VertexId);
        }
        let id = self.push_point(p);
        if self.points.len() < 3 {
            return Insertion::New(id);
        }
        let (a, b) = (self.points[0], self.points[1]);
        if plane::orient(a, b, p) == 0.0 {
            return Insertion::New(id);
        }
        // first triangle from the first two points and p; the remaining
        // buffered points are collinear with the first two and go in normally
        let (i0, i1) = if plane::orient(a, b, p) > 0.0 { (0, 1) } else { (1, 0) };
        self.seed_triangle(i0, i1, id);
        for v in 2..id {
            let q = self.points[v as usize];
            let t = self.locate(q);
            self.dig(v, t);
        }
        Insertion::New(id)
    }

    fn new_tri(&mut self, v: [VertexId; 3], n: [TriId; 3]) -> TriId {
        let tri = Triangle { v, n, alive: true };
        if let Some(t) = self.free.pop() {
            self.tris[t as usize] = tri;
            t
        } else {
            self.tris.push(tri);
            self.mark.push(0);
            (self.tris.len() - 1) as TriId
        }
    }

    fn seed_triangle(&mut self, a: VertexId, b: VertexId, c: VertexId) {
        let t = self.new_tri([a, b, c], [NONE; 3]);
        // ghosts on the outer side of each edge, reversed orientation
        let g0 = self.new_tri([c, b, GHOST], [NONE; 3]);
        let g1 = self.new_tri([a, c, GHOST], [NONE; 3]);
        let g2 = self.new_tri([b, a, GHOST], [NONE; 3]);
        self.tris[t as usize].n = [g0, g1, g2];
        // ghost (x, y, G): n[2] is the real triangle, n[0] across (y, G), n[1] across (G, x)
        self.tris[g0 as usize].n = [g2, g1, t];
        self.tris[g1 as usize].n = [g0, g2, t];
        self.tris[g2 as usize].n = [g1, g0, t];
        for v in [a, b, c] {
            self.vertex_tri[v as usize] = t;
        }
        self.last = t;
    }

    fn ghost_conflict(&self, a: VertexId, b: VertexId, p: P2) -> bool {
        let (pa, pb) = (self.points[a as usize], self.points[b as usize]);
        let o = plane::orient(pa, pb, p);
        if o != 0.0 {
            return o > 0.0;
        }
        let ab = plane::sub(pb, pa);
        plane::dot(plane::sub(p, pa), ab) > 0.0 && plane::dot(plane::sub(p, pb), ab) < 0.0
    }

    fn conflicts(&self, t: TriId, p: P2) -> bool {
        let tri = &self.tris[t as usize];
        if tri.is_ghost() {
            self.ghost_conflict(tri.v[0], tri.v[1], p)
        } else {
            let [a, b, c] = tri.v.map(|v| self.points[v as usize]);
            plane::in_circle(a, b, c, p) > 0.0
        }
    }

    /// A triangle in conflict with `p` (a finite triangle containing it, or a
    /// ghost whose hull edge sees it), found by a visibility walk.
    pub fn locate(&self, p: P2) -> TriId {
        assert!(self.is_planar(), "locate needs a planar triangulation");
        let mut t = self.last;
        if !self.tris[t as usize].alive {
            t = self.tris.iter().position(|x| x.alive).unwrap() as TriId;
        }
        let mut turn = 0usize;
        let limit = 4 * self.tris.len() + 16;
        for _ in 0..limit {
            let tri = &self.tris[t as usize];
            if tri.is_ghost() {
                if self.ghost_conflict(tri.v[0], tri.v[1], p) {
                    return t;
                }
                t = tri.n[2];
                continue;
            }
            turn = turn.wrapping_add(1);
            let mut moved = false;
            for k in 0..3 {
                let i = rot(turn, k);
                let a = self.points[tri.v[rot(i, 1)] as usize];
                let b = self.points[tri.v[rot(i, 2)] as usize];
                if plane::orient(a, b, p) < 0.0 {
                    t = tri.n[i];
                    moved = true;
                    break;
                }
            }
            if !moved {
                return t;
            }
        }
        // a walk that fails to settle only happens on pathological input; scan
        (0..self.tris.len() as TriId)
            .find(|&t| self.tris[t as usize].alive && self.conflicts(t, p))
            .expect("some triangle must conflict with a new point")
    }

    fn dig(&mut self, p: VertexId, start: TriId) {
        let pp = self.points[p as usize];
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.cavity.clear();
        self.stack.clear();
        self.stack.push(start);
        self.mark[start as usize] = epoch;
        while let Some(t) = self.stack.pop() {
            self.cavity.push(t);
            for i in 0..3 {
                let nb = self.tris[t as usize].n[i];
                if self.mark[nb as usize] != epoch && self.conflicts(nb, pp) {
                    self.mark[nb as usize] = epoch;
                    self.stack.push(nb);
                }
            }
        }
        // boundary edges (e0, e1) with the outer triangle beyond them
        let mut boundary: Vec<(VertexId, VertexId, TriId, TriId)> = Vec::new();
        for &t in &self.cavity {
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.n[i];
                if self.mark[nb as usize] != epoch {
                    boundary.push((tri.v[rot(i, 1)], tri.v[rot(i, 2)], nb, t));
                }
            }
        }
        // the cavity boundary is short, so linear scans beat hashing
        let mut made: Vec<TriId> = Vec::with_capacity(boundary.len());
        for &(e0, e1, outer, old) in &boundary {
            let t = self.new_tri([e0, e1, p], [NONE, NONE, outer]);
            let o = &mut self.tris[outer as usize];
            let slot = o.n.iter().position(|&x| x == old).expect("outer triangle links back");
            o.n[slot] = t;
            made.push(t);
        }
        // cavity slots are recycled only now, so the link-back search above
        // never confuses an old triangle id with a freshly made one
        let cavity = std::mem::take(&mut self.cavity);
        for &t in &cavity {
            self.tris[t as usize].alive = false;
            self.free.push(t);
        }
        self.cavity = cavity;
        for &t in &made {
            let [e0, e1, _] = self.tris[t as usize].v;
            let n0 = *made.iter().find(|&&u| self.tris[u as usize].v[0] == e1).expect("closed cavity");
            let n1 = *made.iter().find(|&&u| self.tris[u as usize].v[1] == e0).expect("closed cavity");
            let tri = &mut self.tris[t as usize];
            tri.n[0] = n0;
            tri.n[1] = n1;
        }
        for &t in &made {
            // put GHOST in slot 2 keeping the cyclic order
            let tri = self.tris[t as usize];
            if let Some(g) = tri.index_of(GHOST) {
                if g != 2 {
                    let k = rot(g, 1);
                    let v = [tri.v[k], tri.v[rot(k, 1)], tri.v[rot(k, 2)]];
                    let n = [tri.n[k], tri.n[rot(k, 1)], tri.n[rot(k, 2)]];
                    let x = &mut self.tris[t as usize];
                    x.v = v;
                    x.n = n;
                }
            }
            for v in self.tris[t as usize].v {
                if v != GHOST {
                    self.vertex_tri[v as usize] = t;
                }
            }
        }
        self.last = *made
            .iter()
            .find(|&&t| !self.tris[t as usize].is_ghost())
            .unwrap_or(&made[0]);
    }

    /// Triangles around `v` in counter-clockwise order, ghosts included.
    pub fn star(&self, v: VertexId) -> Vec<TriId> {
        let mut out = Vec::with_capacity(8);
        if !self.is_planar() {
            return out;
        }
        let first = self.vertex_tri[v as usize];
        let mut t = first;
        loop {
            out.push(t);
            let tri = &self.tris[t as usize];
            let i = tri.index_of(v).expect("star triangle contains the vertex");
            t = tri.n[rot(i, 1)];
            if t == first {
                break;
            }
        }
        out
    }

    /// Delaunay neighbors of `v`, counter-clockwise (path order when degenerate).
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        if !self.is_planar() {
            let order = self.line_order();
            let pos = order.iter().position(|&x| x == v).unwrap();
            let mut out = Vec::with_capacity(2);
            if pos > 0 {
                out.push(order[pos - 1]);
            }
            if pos + 1 < order.len() {
                out.push(order[pos + 1]);
            }
            return out;
        }
        self.star(v)
            .into_iter()
            .filter_map(|t| {
                let tri = &self.tris[t as usize];
                let i = tri.index_of(v).unwrap();
                let w = tri.v[rot(i, 1)];
                (w != GHOST).then_some(w)
            })
            .collect()
    }

    pub fn is_hull(&self, v: VertexId) -> bool {
        if !self.is_planar() {
            return true;
        }
        self.star(v).iter().any(|&t| self.tris[t as usize].is_ghost())
    }

    /// Vertices of a degenerate (collinear) configuration sorted along the line.
    fn line_order(&self) -> Vec<VertexId> {
        let mut order: Vec<VertexId> = (0..self.points.len() as VertexId).collect();
        if self.points.len() >= 2 {
            let d = plane::sub(self.points[1], self.points[0]);
            order.sort_by(|&a, &b| {
                let ka = plane::dot(self.points[a as usize], d);
                let kb = plane::dot(self.points[b as usize], d);
                ka.total_cmp(&kb).then(a.cmp(&b))
            });
        }
        order
    }

    /// Every undirected edge once, as `(a, b, left, right)` where `left` is the
    /// triangle to the left of `a -> b`. When degenerate the triangles are `None`.
    pub fn edges(&self) -> Vec<(VertexId, VertexId, Option<TriId>, Option<TriId>)> {
        if !self.is_planar() {
            let order = self.line_order();
            return order.windows(2).map(|w| (w[0], w[1], None, None)).collect();
        }
        let mut out = Vec::new();
        for (t, tri) in self.tris.iter().enumerate() {
            if !tri.alive {
                continue;
            }
            for i in 0..3 {
                let (a, b) = (tri.v[rot(i, 1)], tri.v[rot(i, 2)]);
                if a == GHOST || b == GHOST {
                    continue;
                }
                let nb = tri.n[i];
                // report each edge from its finite side, or from the lower id
                let other_ghost = self.tris[nb as usize].is_ghost();
                if tri.is_ghost() || (!other_ghost && nb < t as TriId) {
                    continue;
                }
                out.push((a, b, Some(t as TriId), Some(nb)));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_delaunay_edges(pts: &[P2]) -> Vec<(usize, usize)> {
        // edges of triangles with empty circumcircles (points in general position)
        let n = pts.len();
        let mut e = std::collections::BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (pts[i], pts[j], pts[k]);
                    let o = plane::orient(a, b, c);
                    if o == 0.0 {
                        continue;
                    }
                    let (a, b) = if o > 0.0 { (a, b) } else { (b, a) };
                    let empty = (0..n)
                        .filter(|&m| m != i && m != j && m != k)
                        .all(|m| plane::in_circle(a, b, c, pts[m]) < 0.0);
                    if empty {
                        e.insert((i, j));
                        e.insert((i, k));
                        e.insert((j, k));
                    }
                }
            }
        }
        e.into_iter().collect()
    }

    fn edge_set(dt: &Delaunay) -> Vec<(usize, usize)> {
        let mut s: Vec<_> = dt
            .edges()
            .into_iter()
            .map(|(a, b, _, _)| (a.min(b) as usize, a.max(b) as usize))
            .collect();
        s.sort();
        s
    }

    fn check_structure(dt: &Delaunay) {
        for (t, tri) in dt.tris.iter().enumerate() {
            if !tri.alive {
                continue;
            }
            for i in 0..3 {
                let nb = &dt.tris[tri.n[i] as usize];
                assert!(nb.alive);
                assert!(nb.n.contains(&(t as TriId)), "neighbor links are symmetric");
            }
            if !tri.is_ghost() {
                let [a, b, c] = tri.v.map(|v| dt.point(v));
                assert!(plane::orient(a, b, c) > 0.0);
                for (v, &q) in dt.points.iter().enumerate() {
                    if !tri.v.contains(&(v as VertexId)) {
                        assert!(plane::in_circle(a, b, c, q) <= 0.0, "empty circumcircle");
                    }
                }
            }
        }
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.random_range(3..40);
            let pts: Vec<P2> = (0..n)
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let (dt, ids) = Delaunay::from_points(&pts);
            assert_eq!(ids, (0..n as u32).collect::<Vec<_>>());
            check_structure(&dt);
            assert_eq!(edge_set(&dt), brute_delaunay_edges(&pts));
        }
    }

    #[test]
    fn collinear_points_form_a_path() {
        let pts = [[0.0, 0.0], [0.2, 0.0], [-0.3, 0.0], [0.1, 0.0]];
        let (dt, _) = Delaunay::from_points(&pts);
        assert!(!dt.is_planar());
        let mut e = edge_set(&dt);
        e.sort();
        assert_eq!(e, vec![(0, 2), (0, 3), (1, 3)]);
        assert_eq!(dt.neighbors(0), vec![2, 3]);
    }

    #[test]
    fn collinear_prefix_then_apex() {
        let mut pts: Vec<P2> = (0..6).map(|i| [i as f64 * 0.1 - 0.25, 0.0]).collect();
        pts.push([0.0, 0.3]);
        let (dt, _) = Delaunay::from_points(&pts);
        check_structure(&dt);
        assert_eq!(edge_set(&dt), brute_delaunay_edges(&pts));
        assert_eq!(dt.triangles().count(), 5);
    }

    #[test]
    fn duplicates_are_reported() {
        let mut dt = Delaunay::new();
        for p in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.3, 0.3]] {
            dt.insert(p);
        }
        assert_eq!(dt.insert([1.0, 0.0]), Insertion::Duplicate(1));
        assert_eq!(dt.insert([0.3, 0.3]), Insertion::Duplicate(3));
        assert_eq!(dt.len(), 4);
        let mut dt = Delaunay::new();
        dt.insert([0.0, 0.0]);
        assert_eq!(dt.insert([0.0, 0.0]), Insertion::Duplicate(0));
    }

    #[test]
    fn points_on_hull_edges_and_grid() {
        // integer grid: heavy cocircularity and points landing on edges
        let mut pts = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                pts.push([i as f64, j as f64]);
            }
        }
        let (dt, _) = Delaunay::from_points(&pts);
        check_structure(&dt);
        assert_eq!(dt.triangles().count(), 2 * 25);
        let hull = (0..36).filter(|&v| dt.is_hull(v)).count();
        assert_eq!(hull, 20);
    }

    #[test]
    fn stars_are_closed_and_ccw() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<P2> = (0..200)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let (dt, _) = Delaunay::from_points(&pts);
        for v in 0..200u32 {
            let nb = dt.neighbors(v);
            assert!(nb.len() >= 2);
            for w in &nb {
                assert!(dt.neighbors(*w).contains(&v));
            }
        }
    }
}
