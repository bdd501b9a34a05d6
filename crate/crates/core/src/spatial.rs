//! Nearest-nucleus queries under the hyperbolic metric.
//!
//! A ball tree over Euclidean (Poincaré) coordinates. A node's bounding disc
//! `D(c, r)` gives the lower bound `|y - x| >= |y - c| - r` and
//! `1 - |x|^2 <= 1 - max(0, |c| - r)^2` for every `x` inside it, which bounds
//! the hyperbolic distance from below because it is monotone in
//! `|y - x|^2 / ((1 - |x|^2)(1 - |y|^2))`.

use crate::geometry::distance_from_parts;

const LEAF: usize = 8;

#[derive(Clone, Debug)]
struct Node {
    center: Vec<f64>,
    radius: f64,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct BallTree {
    dim: usize,
    coords: Vec<f64>,
    norms2: Vec<f64>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl BallTree {
    /// Builds the tree over `points` (all of dimension `dim`).
    pub fn new<'a, I>(dim: usize, points: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut coords = Vec::new();
        for p in points {
            assert_eq!(p.len(), dim, "point dimension");
            coords.extend_from_slice(p);
        }
        let n = coords.len() / dim.max(1);
        let norms2 = (0..n)
            .map(|i| coords[i * dim..(i + 1) * dim].iter().map(|c| c * c).sum())
            .collect();
        let mut tree = Self { dim, coords, norms2, order: (0..n as u32).collect(), nodes: Vec::new() };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn point(&self, i: u32) -> &[f64] {
        let i = i as usize;
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let dim = self.dim;
        let mut center = vec![0.0; dim];
        for &i in &self.order[start..end] {
            for (c, x) in center.iter_mut().zip(self.point(i)) {
                *c += x;
            }
        }
        let m = (end - start) as f64;
        center.iter_mut().for_each(|c| *c /= m);
        let radius = self.order[start..end]
            .iter()
            .map(|&i| sq_dist(&center, self.point(i)).sqrt())
            .fold(0.0, f64::max)
            * (1.0 + 1e-12);
        let id = self.nodes.len();
        self.nodes.push(Node { center, radius, start, end, children: None });
        if end - start > LEAF {
            // split at the median of the widest coordinate
            let axis = (0..dim)
                .max_by(|&a, &b| {
                    let spread = |ax: usize| {
                        let (lo, hi) = self.order[start..end].iter().fold(
                            (f64::INFINITY, f64::NEG_INFINITY),
                            |(lo, hi), &i| {
                                let v = self.point(i)[ax];
                                (lo.min(v), hi.max(v))
                            },
                        );
                        hi - lo
                    };
                    spread(a).total_cmp(&spread(b))
                })
                .unwrap();
            let mid = (start + end) / 2;
            let coords = &self.coords;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                coords[a as usize * dim + axis].total_cmp(&coords[b as usize * dim + axis])
            });
            let l = self.build(start, mid);
            let r = self.build(mid, end);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    fn lower_bound(&self, node: &Node, y: &[f64], ny2: f64) -> f64 {
        let gap = (sq_dist(&node.center, y).sqrt() - node.radius).max(0.0);
        let cn = node.center.iter().map(|c| c * c).sum::<f64>().sqrt();
        let inner = (cn - node.radius).max(0.0);
        distance_from_parts(gap * gap, inner * inner, ny2)
    }

    /// Index of the nearest point to `y` (lowest index on exact ties) and its
    /// hyperbolic distance, evaluated with the same arithmetic as
    /// [`crate::geometry::hyp_distance`].
    pub fn nearest(&self, y: &[f64]) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        let ny2: f64 = y.iter().map(|c| c * c).sum();
        let mut best = (f64::INFINITY, usize::MAX);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let lb = self.lower_bound(node, y, ny2);
            // rounding slack so that a bound never hides an exact tie
            if lb > best.0 * (1.0 + 1e-9) + 1e-12 {
                continue;
            }
            match node.children {
                None => {
                    for &i in &self.order[node.start..node.end] {
                        let d = distance_from_parts(
                            sq_dist(y, self.point(i)),
                            ny2,
                            self.norms2[i as usize],
                        );
                        let cand = (d, i as usize);
                        if cand.0 < best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                            best = cand;
                        }
                    }
                }
                Some((l, r)) => {
                    let dl = sq_dist(&self.nodes[l].center, y);
                    let dr = sq_dist(&self.nodes[r].center, y);
                    if dl < dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
        }
        Some((best.1, best.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hyp_distance, HPoint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for dim in [2usize, 3] {
            let pts: Vec<HPoint> = (0..500)
                .map(|_| loop {
                    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.95..0.95)).collect();
                    if let Ok(p) = HPoint::new(v) {
                        break p;
                    }
                })
                .collect();
            let tree = BallTree::new(dim, pts.iter().map(|p| p.coords()));
            for _ in 0..2000 {
                let q = loop {
                    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.99..0.99)).collect();
                    if let Ok(p) = HPoint::new(v) {
                        break p;
                    }
                };
                let brute = (0..pts.len())
                    .map(|i| (hyp_distance(&q, &pts[i]).unwrap(), i))
                    .fold((f64::INFINITY, usize::MAX), |b, c| if c.0 < b.0 { c } else { b });
                let (i, d) = tree.nearest(q.coords()).unwrap();
                assert_eq!((i, d), (brute.1, brute.0));
            }
        }
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let pts = [[0.3, 0.0], [-0.3, 0.0]];
        let tree = BallTree::new(2, pts.iter().map(|p| &p[..]));
        assert_eq!(tree.nearest(&[0.0, 0.2]).unwrap().0, 0);
        assert_eq!(tree.nearest(&[-0.1, 0.0]).unwrap().0, 1);
        let dup = [[0.1, 0.1], [0.1, 0.1]];
        let tree = BallTree::new(2, dup.iter().map(|p| &p[..]));
        assert_eq!(tree.nearest(&[0.5, 0.0]).unwrap().0, 0);
    }

    #[test]
    fn empty_tree_has_no_nearest() {
        let tree = BallTree::new(2, std::iter::empty());
        assert!(tree.nearest(&[0.0, 0.0]).is_none());
    }
}
