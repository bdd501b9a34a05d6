//! Exact, lazily sampled Poisson-Voronoi tessellation of the whole plane.
//!
//! The plane is tiled by the sectors of an ε-grid. Each tile draws its Poisson
//! points from its own random substream the first time it is needed, so a
//! trial is a fixed infinite configuration no matter which tiles are looked at
//! or in what order.
//!
//! Answers are certified rather than approximated: a Delaunay triangle is
//! final once every tile meeting its circumdisk has been sampled (no later
//! point can fall inside it), and a Voronoi cell is final once its whole star
//! consists of final triangles. The owner of a point `y` is final once every
//! tile meeting the ball `B(y, d(y, owner))` has been sampled.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::f64::consts::{PI, TAU};

use crate::cells;
use crate::delaunay::{Delaunay, Insertion, TriId, VertexId, GHOST};
use crate::discretization::{self, SectorId};
use crate::error::{Error, Result};
use crate::geometry::{self, dist2d};
use crate::plane::{self, P2};
use crate::rng::{tag, RngStream};
use crate::sampling::{self, ColoredConfig};

/// Tiles beyond this hyperbolic radius are never sampled; Poincaré coordinates
/// lose too much relative precision further out.
pub const MAX_RADIUS: f64 = 24.0;

/// A certified Voronoi cell.
#[derive(Clone, Debug)]
pub struct Cell {
    /// Hyperbolic Delaunay neighbors, counter-clockwise.
    pub neighbors: Vec<VertexId>,
    /// Voronoi vertices (hyperbolic circumcenters), counter-clockwise.
    pub vertices: Vec<P2>,
    /// Largest distance from the origin over the closed cell.
    pub reach: f64,
    /// Largest distance from the nucleus over the closed cell.
    pub extent: f64,
}

impl Cell {
    /// Largest distance from `base` over the closed cell (attained at a vertex
    /// because cells are convex and distance is geodesically convex).
    pub fn reach_from(&self, base: P2) -> f64 {
        self.vertices.iter().map(|&v| dist2d(base, v)).fold(0.0, f64::max)
    }
}

enum Check {
    Done,
    Missing { tiles: Vec<SectorId>, open: bool },
}

#[derive(Clone, Debug)]
pub struct TileWorld {
    lambda: f64,
    epsilon: f64,
    stream: RngStream,
    overrides: HashMap<SectorId, RngStream>,
    fixed: Option<Fixed>,
    labels: Vec<usize>,
    materialized: HashSet<SectorId>,
    order: Vec<SectorId>,
    max_ring: u32,
    dt: Delaunay,
    marks: Vec<f64>,
    tiles: Vec<SectorId>,
    cells: Vec<Option<Cell>>,
    final_tris: HashSet<[VertexId; 3]>,
    counts: HashMap<u32, u64>,
}

/// Tile contents taken from a finite configuration.
#[derive(Clone, Debug)]
struct Fixed {
    by_tile: HashMap<SectorId, Vec<(P2, f64, usize)>>,
    /// Rings lying wholly inside the configuration's window.
    rings: u32,
}

fn tri_key(mut v: [VertexId; 3]) -> [VertexId; 3] {
    v.sort_unstable();
    v
}

impl TileWorld {
    /// A world of intensity `lambda` tiled at scale `epsilon`, drawing tile
    /// `(k, l)` from `stream / TILE / k / l`.
    pub fn new(lambda: f64, epsilon: f64, stream: RngStream) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        let max_ring = discretization::ring_of(epsilon, MAX_RADIUS);
        Ok(Self {
            lambda,
            epsilon,
            stream,
            overrides: HashMap::default(),
            fixed: None,
            labels: Vec::new(),
            materialized: HashSet::default(),
            order: Vec::new(),
            max_ring,
            dt: Delaunay::new(),
            marks: Vec::new(),
            tiles: Vec::new(),
            cells: Vec::new(),
            final_tris: HashSet::default(),
            counts: HashMap::default(),
        })
    }

    /// A world whose tiles hold the nuclei of `config` (d = 2). Tiles of rings
    /// reaching past the configuration's window cannot be sampled and give a
    /// window error.
    pub fn from_config(config: &ColoredConfig, epsilon: f64) -> Result<Self> {
        if config.d != 2 {
            return Err(Error::Usage(format!("tiled worlds need d = 2, got d = {}", config.d)));
        }
        let mut w = Self::new(config.lambda, epsilon, RngStream::new(config.seed))?;
        let rings = ((config.window_radius / (2.0 * epsilon)) + 1e-9).floor().min(w.max_ring as f64 + 1.0) as u32;
        let mut by_tile: HashMap<SectorId, Vec<(P2, f64, usize)>> = HashMap::default();
        for (i, nu) in config.nuclei.iter().enumerate() {
            let p = nu.point.xy();
            let k = discretization::ring_of(epsilon, nu.point.radius());
            if k >= rings {
                continue;
            }
            let l = if k == 0 { 0 } else { discretization::wedge_of(w.count(k), discretization::angle_of(p)) };
            by_tile.entry(SectorId::new(k, l)).or_default().push((p, nu.mark, i));
        }
        w.fixed = Some(Fixed { by_tile, rings });
        Ok(w)
    }

    /// Index in the source configuration of a nucleus of a
    /// [`from_config`](Self::from_config) world.
    pub fn config_index(&self, v: VertexId) -> Option<usize> {
        self.fixed.as_ref().map(|_| self.labels[v as usize])
    }

    /// Replaces the content of tile `id` by an independent draw from `stream`.
    /// Must be called before the tile is sampled.
    pub fn resample_tile(&mut self, id: SectorId, stream: RngStream) -> Result<()> {
        if self.materialized.contains(&id) {
            return Err(Error::Usage(format!("tile {id} is already sampled")));
        }
        self.overrides.insert(id, stream);
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn stream(&self) -> &RngStream {
        &self.stream
    }

    pub fn point(&self, v: VertexId) -> P2 {
        self.dt.point(v)
    }

    pub fn mark(&self, v: VertexId) -> f64 {
        self.marks[v as usize]
    }

    pub fn tile_of(&self, v: VertexId) -> SectorId {
        self.tiles[v as usize]
    }

    pub fn num_points(&self) -> usize {
        self.marks.len()
    }

    /// Sampled tiles in the order they were sampled.
    pub fn sampled_tiles(&self) -> &[SectorId] {
        &self.order
    }

    pub fn is_sampled(&self, id: SectorId) -> bool {
        self.materialized.contains(&id)
    }

    pub fn count(&mut self, k: u32) -> u64 {
        let eps = self.epsilon;
        *self
            .counts
            .entry(k)
            .or_insert_with(|| discretization::sector_count(eps, k).expect("ring below the cap"))
    }

    pub fn max_ring(&self) -> u32 {
        self.max_ring
    }

    /// Samples tile `id` if needed; returns whether it was new.
    pub fn sample_tile(&mut self, id: SectorId) -> Result<bool> {
        if self.materialized.contains(&id) {
            return Ok(false);
        }
        if id.k > self.max_ring {
            return Err(Error::Window(format!(
                "tile {id} lies beyond hyperbolic radius {MAX_RADIUS}"
            )));
        }
        let pts: Vec<(P2, f64, usize)> = match &self.fixed {
            Some(f) => {
                if id.k >= f.rings {
                    return Err(Error::Window(format!("tile {id} reaches past the configuration window")));
                }
                f.by_tile.get(&id).cloned().unwrap_or_default()
            }
            None => {
                let n = self.count(id.k);
                let stream = self
                    .overrides
                    .get(&id)
                    .cloned()
                    .unwrap_or_else(|| self.stream.descend(&[tag::TILE, id.k as u64, id.l]));
                let mut rng = stream.rng();
                sampling::sample_sector(&mut rng, self.lambda, self.epsilon, id, n)
                    .into_iter()
                    .map(|(p, m)| (p, m, usize::MAX))
                    .collect()
            }
        };
        self.materialized.insert(id);
        self.order.push(id);
        for (p, mark, label) in pts {
            if let Insertion::New(v) = self.dt.insert(p) {
                debug_assert_eq!(v as usize, self.marks.len());
                self.marks.push(mark);
                self.tiles.push(id);
                self.labels.push(label);
                self.cells.push(None);
            }
        }
        Ok(true)
    }

    /// A superset of the tiles meeting the Euclidean disk `(c, r)`, ring by ring.
    /// Returns `Err` if the box reaches past the sampling cap.
    pub(crate) fn box_tiles(&mut self, c: P2, r: f64) -> Result<Vec<SectorId>> {
        let nc = plane::norm(c);
        let outer = nc + r;
        if outer >= 1.0 {
            return Err(Error::Window("disk leaves the unit disk".into()));
        }
        let r_hi = 2.0 * outer.atanh() * (1.0 + 1e-12) + 1e-12;
        if r_hi >= discretization::ring_of(self.epsilon, MAX_RADIUS) as f64 * 2.0 * self.epsilon
            + 2.0 * self.epsilon
        {
            return Err(Error::Window(format!(
                "region reaches hyperbolic radius {r_hi:.3}, beyond the cap {MAX_RADIUS}"
            )));
        }
        let inner = nc - r;
        let r_lo = if inner > 0.0 { (2.0 * inner.atanh() * (1.0 - 1e-12) - 1e-12).max(0.0) } else { 0.0 };
        let k_lo = discretization::ring_of(self.epsilon, r_lo);
        let k_hi = discretization::ring_of(self.epsilon, r_hi);
        let centre = discretization::angle_of(c);
        let mut out = Vec::new();
        for k in k_lo..=k_hi {
            if k == 0 {
                out.push(SectorId::ORIGIN);
                continue;
            }
            let n = self.count(k);
            // angular half-width of the disk on the circles |y| = rho of this
            // ring; it peaks where the circle is tangent to the disk's sides
            let rho1 = (k as f64 * self.epsilon).tanh();
            let rho2 = ((k + 1) as f64 * self.epsilon).tanh();
            let a = rho1.max(inner);
            let b = rho2.min(outer).max(a);
            let half = if inner <= 0.0 && a <= -inner || nc == 0.0 {
                PI
            } else {
                let tangent = (nc * nc - r * r).max(0.0).sqrt();
                let m = tangent.clamp(a, b).max(1e-300);
                let cos = ((m * m + nc * nc - r * r) / (2.0 * m * nc)).clamp(-1.0, 1.0);
                cos.acos() * (1.0 + 1e-9) + 1e-12
            };
            if half >= PI {
                out.extend((0..n).map(|l| SectorId::new(k, l)));
                continue;
            }
            let mut start = centre - half;
            if start < 0.0 {
                start += TAU;
            }
            let start = if start >= TAU { 0.0 } else { start };
            let l0 = discretization::wedge_of(n, start);
            let base = discretization::wedge_start(n, l0);
            let end = start + 2.0 * half;
            for j in 0..n {
                out.push(SectorId::new(k, (l0 + j) % n));
                if base + (j + 1) as f64 * TAU / n as f64 >= end {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn box_missing(&mut self, c: P2, r: f64) -> Result<Vec<SectorId>> {
        let mut tiles = self.box_tiles(c, r)?;
        tiles.retain(|t| !self.materialized.contains(t));
        Ok(tiles)
    }

    /// Samples every tile meeting the disk `(c, r)`;
    /// returns whether anything new was sampled.
    pub(crate) fn cover_disk(&mut self, c: P2, r: f64) -> Result<bool> {
        let mut fresh = false;
        for t in self.box_tiles(c, r)? {
            fresh |= self.sample_tile(t)?;
        }
        Ok(fresh)
    }

    /// Samples every tile meeting the closed hyperbolic ball `B(y, rho)`.
    pub fn cover_ball(&mut self, y: P2, rho: f64) -> Result<bool> {
        let (c, r) = geometry::hyperbolic_disk(y, rho);
        self.cover_disk(c, r * (1.0 + 1e-9) + 1e-15)
    }

    fn check_cell(&mut self, v: VertexId) -> Result<Check> {
        if self.cells[v as usize].is_some() {
            return Ok(Check::Done);
        }
        if !self.dt.is_planar() {
            return Ok(Check::Missing { tiles: Vec::new(), open: true });
        }
        let star = self.dt.star(v);
        let mut missing = Vec::new();
        let mut open = false;
        let mut circles: Vec<(TriId, P2, f64)> = Vec::with_capacity(star.len());
        for &t in &star {
            let tri = *self.dt.tri(t);
            if tri.is_ghost() {
                open = true;
                continue;
            }
            let (c, r) = cells::tri_circle(&self.dt, t);
            circles.push((t, c, r));
            if !cells::circle_inside(c, r) {
                open = true;
                continue;
            }
            let key = tri_key(tri.v);
            if self.final_tris.contains(&key) {
                continue;
            }
            match self.box_missing(c, r) {
                Ok(m) if m.is_empty() => {
                    self.final_tris.insert(key);
                }
                Ok(m) => missing.extend(m),
                Err(_) => open = true,
            }
        }
        if open || !missing.is_empty() {
            missing.sort_unstable();
            missing.dedup();
            return Ok(Check::Missing { tiles: missing, open });
        }
        let z = self.dt.point(v);
        let mut neighbors = Vec::with_capacity(star.len());
        let mut vertices = Vec::with_capacity(star.len());
        for (t, c, r) in circles {
            let tri = self.dt.tri(t);
            let i = tri.index_of(v).expect("star triangle holds the vertex");
            let w = tri.v[(i + 1) % 3];
            debug_assert_ne!(w, GHOST);
            neighbors.push(w);
            vertices.push(geometry::hyperbolic_center_of_circle(c, r));
        }
        let reach = vertices.iter().map(|&p| dist2d([0.0, 0.0], p)).fold(0.0, f64::max);
        let extent = vertices.iter().map(|&p| dist2d(z, p)).fold(0.0, f64::max);
        self.cells[v as usize] = Some(Cell { neighbors, vertices, reach, extent });
        Ok(Check::Done)
    }

    /// The cell of `v` if it can be certified from the tiles sampled so far.
    pub fn try_cell(&mut self, v: VertexId) -> Result<Option<&Cell>> {
        match self.check_cell(v)? {
            Check::Done => Ok(self.cells[v as usize].as_ref()),
            Check::Missing { .. } => Ok(None),
        }
    }

    /// Tiles whose sampling is needed before the cell of `v` can be certified
    /// (`None` when the star is still open and a wider search is required).
    pub fn missing_for_cell(&mut self, v: VertexId) -> Result<Option<Vec<SectorId>>> {
        match self.check_cell(v)? {
            Check::Done => Ok(Some(Vec::new())),
            Check::Missing { open: true, .. } => Ok(None),
            Check::Missing { tiles, .. } => Ok(Some(tiles)),
        }
    }

    /// The certified cell of `v`, sampling tiles as needed.
    pub fn cell(&mut self, v: VertexId) -> Result<&Cell> {
        let mut radius = 0.5;
        loop {
            match self.check_cell(v)? {
                Check::Done => break,
                Check::Missing { tiles, .. } => {
                    let mut fresh = false;
                    for t in tiles {
                        fresh |= self.sample_tile(t)?;
                    }
                    // a wider search only once the listed tiles stop helping
                    if !fresh {
                        let z = self.dt.point(v);
                        self.cover_ball(z, radius)?;
                        radius *= 2.0;
                    }
                }
            }
        }
        Ok(self.cells[v as usize].as_ref().expect("just certified"))
    }

    /// The certified cell if it is already known, without any work.
    pub fn known_cell(&self, v: VertexId) -> Option<&Cell> {
        self.cells[v as usize].as_ref()
    }

    fn greedy_nearest(&self, y: P2) -> VertexId {
        let mut v = if self.dt.is_planar() {
            let t = self.dt.locate(y);
            let tri = self.dt.tri(t);
            tri.v
                .iter()
                .copied()
                .filter(|&w| w != GHOST)
                .min_by(|&a, &b| dist2d(y, self.dt.point(a)).total_cmp(&dist2d(y, self.dt.point(b))))
                .expect("triangles have a finite vertex")
        } else {
            0
        };
        let mut best = dist2d(y, self.dt.point(v));
        loop {
            let mut moved = false;
            for w in self.dt.neighbors(v) {
                let d = dist2d(y, self.dt.point(w));
                if d < best || (d == best && w < v) {
                    best = d;
                    v = w;
                    moved = true;
                }
            }
            if !moved {
                return v;
            }
        }
    }

    /// The nucleus owning `y`, if certain from the tiles sampled so far.
    pub fn try_owner(&mut self, y: P2) -> Result<Option<VertexId>> {
        if self.dt.is_empty() {
            return Ok(None);
        }
        let v = self.greedy_nearest(y);
        let d = dist2d(y, self.dt.point(v));
        let (c, r) = geometry::hyperbolic_disk(y, d);
        match self.box_missing(c, r * (1.0 + 1e-9) + 1e-15) {
            Ok(m) if m.is_empty() => Ok(Some(v)),
            Ok(_) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// The nucleus owning `y`, sampling tiles as needed.
    pub fn owner(&mut self, y: P2) -> Result<VertexId> {
        let mut radius = 0.5;
        while self.dt.is_empty() {
            self.cover_ball(y, radius)?;
            radius *= 2.0;
        }
        loop {
            let v = self.greedy_nearest(y);
            let d = dist2d(y, self.dt.point(v));
            if !self.cover_ball(y, d)? {
                return Ok(v);
            }
        }
    }
}
