//! Hyperbolic Voronoi/Delaunay structure over a finite planar configuration.

use std::collections::HashMap;
use std::io::Write;

use crate::cells;
use crate::delaunay::{Delaunay, TriId, VertexId};
use crate::error::{Error, Result};
use crate::geometry::{self, HPoint};
use crate::plane::{self, P2};
use crate::sampling::ColoredConfig;
use crate::spatial::BallTree;

/// A Voronoi vertex: hyperbolic circumcenter of a retained Delaunay triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct VoronoiVertex {
    pub nuclei: [usize; 3],
    pub point: HPoint,
    /// Hyperbolic distance from the origin.
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReachReport {
    pub nucleus: usize,
    /// Largest distance from the origin attained on the closed cell
    /// (infinite for unbounded cells).
    pub reach: f64,
    pub unbounded: bool,
}

#[derive(Debug)]
pub struct Tessellation<'a> {
    config: &'a ColoredConfig,
    points: Vec<P2>,
    adjacency: Vec<Vec<usize>>,
    vertices: Vec<VoronoiVertex>,
    incident: Vec<Vec<usize>>,
    bounded: Vec<bool>,
    /// For duplicated nuclei, the first index with the same coordinates.
    twin: Vec<usize>,
    tree: BallTree,
}

/// Nearest nucleus to `y` for a configuration of any dimension, with ties to
/// the lowest index.
pub fn nearest_nucleus(config: &ColoredConfig, y: &HPoint) -> Result<usize> {
    if config.is_empty() {
        return Err(Error::EmptyConfig);
    }
    if y.dim() != config.d {
        return Err(Error::Usage("query dimension differs from the config".into()));
    }
    let tree = BallTree::new(config.d, config.nuclei.iter().map(|n| n.point.coords()));
    Ok(tree.nearest(y.coords()).expect("non-empty").0)
}

impl<'a> Tessellation<'a> {
    /// Builds the hyperbolic Delaunay graph of a planar configuration.
    pub fn build(config: &'a ColoredConfig) -> Result<Self> {
        if config.d != 2 {
            return Err(Error::Usage("tessellations are built for d = 2 only".into()));
        }
        if config.is_empty() {
            return Err(Error::EmptyConfig);
        }
        let points: Vec<P2> = config.nuclei.iter().map(|n| n.point.xy()).collect();
        let (dt, ids) = Delaunay::from_points(&points);
        let n = points.len();
        // the vertex ids of a fresh triangulation are first occurrences
        let mut first_of_vertex: Vec<usize> = vec![usize::MAX; dt.len()];
        for (i, &v) in ids.iter().enumerate() {
            if first_of_vertex[v as usize] == usize::MAX {
                first_of_vertex[v as usize] = i;
            }
        }
        let twin: Vec<usize> = ids.iter().map(|&v| first_of_vertex[v as usize]).collect();
        let nuc = |v: VertexId| first_of_vertex[v as usize];

        let mut adjacency = vec![Vec::new(); n];
        let mut dangling = vec![false; n];
        let mut retained_tri: HashMap<TriId, bool> = HashMap::new();
        let mut tri_ok = |t: Option<TriId>| -> bool {
            let Some(t) = t else { return false };
            if dt.tri(t).is_ghost() {
                return false;
            }
            *retained_tri.entry(t).or_insert_with(|| {
                let (c, r) = cells::tri_circle(&dt, t);
                cells::circle_inside(c, r)
            })
        };
        for (a, b, left, right) in dt.edges() {
            if cells::hyperbolic_edge(&dt, a, b, left, right) {
                let (i, j) = (nuc(a), nuc(b));
                adjacency[i].push(j);
                adjacency[j].push(i);
                if !(tri_ok(left) && tri_ok(right)) {
                    dangling[i] = true;
                    dangling[j] = true;
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }

        let mut vertices = Vec::new();
        let mut incident = vec![Vec::new(); n];
        for (t, tri) in dt.triangles() {
            let (c, r) = cells::tri_circle(&dt, t);
            if !cells::circle_inside(c, r) {
                continue;
            }
            let nuclei = tri.v.map(nuc);
            let idx = vertices.len();
            for &z in &nuclei {
                incident[z].push(idx);
            }
            vertices.push(VoronoiVertex {
                nuclei,
                point: HPoint::from_p2(geometry::hyperbolic_center_of_circle(c, r)),
                radius: cells::center_distance_from_origin(c, r),
            });
        }
        let bounded = (0..n)
            .map(|i| twin[i] == i && !adjacency[i].is_empty() && !dangling[i])
            .collect();
        let tree = BallTree::new(2, points.iter().map(|p| &p[..]));
        Ok(Self { config, points, adjacency, vertices, incident, bounded, twin, tree })
    }

    pub fn config(&self) -> &ColoredConfig {
        self.config
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sorted hyperbolic Delaunay neighbors of nucleus `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn voronoi_vertices(&self) -> &[VoronoiVertex] {
        &self.vertices
    }

    /// Nearest nucleus to `y`, ties broken by lowest index.
    pub fn owner_of(&self, y: &HPoint) -> Result<usize> {
        if y.dim() != 2 {
            return Err(Error::Usage("planar query expected".into()));
        }
        Ok(self.tree.nearest(y.coords()).expect("non-empty").0)
    }

    pub fn is_bounded(&self, z: usize) -> bool {
        self.bounded[z]
    }

    pub fn reach(&self, z: usize) -> ReachReport {
        let z0 = self.twin[z];
        if !self.bounded[z0] {
            return ReachReport { nucleus: z, reach: f64::INFINITY, unbounded: true };
        }
        let reach = self.incident[z0].iter().map(|&v| self.vertices[v].radius).fold(0.0, f64::max);
        ReachReport { nucleus: z, reach, unbounded: false }
    }

    /// Whether the closed cell of `z` has a point at distance `>= n` from 0.
    pub fn cell_reaches_distance(&self, z: usize, n: f64) -> bool {
        self.reach(z).reach >= n
    }

    fn cell_meets(&self, z: usize, extra: &[plane::Quadric]) -> bool {
        let z0 = self.twin[z];
        let mut cons =
            cells::cell_constraints(self.points[z0], self.adjacency[z0].iter().map(|&w| self.points[w]));
        cons.extend_from_slice(extra);
        plane::feasible_point(&cons).is_some()
    }

    /// Nuclei whose closed cell meets the closed ball `B(0, n)`, ascending.
    pub fn compute_dn(&self, n: f64) -> Vec<usize> {
        let ball = [cells::origin_ball(n)];
        (0..self.len())
            .filter(|&i| {
                self.config.nuclei[i].point.radius() <= n || self.cell_meets(i, &ball)
            })
            .collect()
    }

    /// Whether the closed cell of `z` contains `y`.
    pub fn cell_contains(&self, z: usize, y: &HPoint) -> bool {
        let p = y.xy();
        let d = geometry::dist2d(p, self.points[self.twin[z]]);
        self.adjacency[self.twin[z]]
            .iter()
            .all(|&w| d <= geometry::dist2d(p, self.points[w]) * (1.0 + 1e-12) + 1e-15)
    }

    /// JSON dump of nuclei, adjacency and Voronoi vertices.
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        let num = |x: f64| format!("{x:.16e}");
        writeln!(w, "{{")?;
        writeln!(w, "  \"nuclei\": [")?;
        for (i, n) in self.config.nuclei.iter().enumerate() {
            let sep = if i + 1 < self.len() { "," } else { "" };
            let c = n.point.coords();
            writeln!(w, "    [{}, {}, {}]{sep}", num(c[0]), num(c[1]), num(n.mark))?;
        }
        writeln!(w, "  ],")?;
        writeln!(w, "  \"adjacency\": [")?;
        for (i, adj) in self.adjacency.iter().enumerate() {
            let sep = if i + 1 < self.len() { "," } else { "" };
            let list: Vec<String> = adj.iter().map(|j| j.to_string()).collect();
            writeln!(w, "    [{}]{sep}", list.join(", "))?;
        }
        writeln!(w, "  ],")?;
        writeln!(w, "  \"voronoi_vertices\": [")?;
        for (i, v) in self.vertices.iter().enumerate() {
            let sep = if i + 1 < self.vertices.len() { "," } else { "" };
            let c = v.point.coords();
            writeln!(
                w,
                "    {{\"nuclei\": [{}, {}, {}], \"point\": [{}, {}]}}{sep}",
                v.nuclei[0],
                v.nuclei[1],
                v.nuclei[2],
                num(c[0]),
                num(c[1])
            )?;
        }
        writeln!(w, "  ]")?;
        writeln!(w, "}}")?;
        Ok(())
    }
}

/// `4 t*` with `t* = max(n, smallest t such that exp(-lambda vol B(0,t)) <= tol_fail)`.
pub fn truncation_radius(lambda: f64, n: f64, d: usize, tol_fail: f64) -> Result<f64> {
    if !(tol_fail > 0.0 && tol_fail < 1.0) {
        return Err(Error::Domain(format!("tol_fail must lie in (0, 1), got {tol_fail}")));
    }
    if !(lambda > 0.0) || n < 0.0 {
        return Err(Error::Domain("lambda must be positive and n nonnegative".into()));
    }
    let need = -tol_fail.ln() / lambda;
    let t = if d == 2 {
        2.0 * (need / (4.0 * std::f64::consts::PI)).sqrt().asinh()
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while geometry::hyp_ball_volume(hi, d)? < need {
            hi *= 2.0;
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if geometry::hyp_ball_volume(mid, d)? < need {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    Ok(4.0 * t.max(n))
}
