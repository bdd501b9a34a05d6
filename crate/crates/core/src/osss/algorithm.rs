//! The cluster-revealing decision tree `A_k` for `{0 <-> S(0, n)}`.
//!
//! Coordinates are the contents of the ε-sectors. `A_k` starts from the
//! sectors whose closure meets `S(0, k)` and repeatedly picks the lowest
//! frontier sector `y` of `I = K_ε ∩ B(0, n+1)`, runs DISCOVER on it (reveal
//! sectors with representatives ever farther from `y` until every cell
//! meeting the closure of `y` is certified), and grows `Z`, the black cells
//! connected to `S(0, k)`. The frontier is the set of unpicked sectors of `I`
//! whose closure meets `S(0, k)` or a cell of `Z`.

use std::collections::BTreeSet;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};

use serde::{Deserialize, Serialize};

use crate::cells;
use crate::delaunay::VertexId;
use crate::discretization::{self, SectorId, SectorIndex};
use crate::error::{Error, Result};
use crate::geometry::{self, dist2d};
use crate::plane::{self, Quadric, P2};
use crate::sampling::ColoredConfig;
use crate::world::TileWorld;

/// Representative point of a sector: its inner, low-angle corner.
pub(crate) fn representative(world: &mut TileWorld, id: SectorId) -> P2 {
    if id.k == 0 {
        return [0.0, 0.0];
    }
    let rho = (id.k as f64 * world.epsilon()).tanh();
    let th = discretization::wedge_start(world.count(id.k), id.l);
    [rho * th.cos(), rho * th.sin()]
}

/// Constraints describing the closed sector.
pub(crate) fn closure_constraints(world: &mut TileWorld, id: SectorId) -> Vec<Quadric> {
    let eps = world.epsilon();
    let mut out = vec![Quadric::disk([0.0, 0.0], ((id.k + 1) as f64 * eps).tanh())];
    if id.k > 0 {
        out.push(Quadric::outside_disk([0.0, 0.0], (id.k as f64 * eps).tanh()));
        let n = world.count(id.k);
        let t1 = discretization::wedge_start(n, id.l);
        let t2 = discretization::wedge_start(n, id.l + 1);
        // wedges are at most a quarter turn wide, hence the intersection of
        // the half-planes left of u1 and right of u2
        let (u1, u2) = ([t1.cos(), t1.sin()], [t2.cos(), t2.sin()]);
        out.push(Quadric::half_plane([u1[1], -u1[0]], 0.0));
        out.push(Quadric::half_plane([-u2[1], u2[0]], 0.0));
    }
    out
}

/// A closed sector with a hyperbolic ball containing it.
pub(crate) struct Shape {
    closure: Vec<Quadric>,
    center: P2,
    radius: f64,
    /// Euclidean disk of the ball.
    disk: (P2, f64),
    /// Points of the sector: the center of the ball and the corners.
    samples: Vec<P2>,
}

impl Shape {
    fn new(world: &mut TileWorld, id: SectorId) -> Self {
        let closure = closure_constraints(world, id);
        let eps = world.epsilon();
        if id.k == 0 {
            let radius = 2.0 * eps * (1.0 + 1e-9) + 1e-12;
            let disk = geometry::hyperbolic_disk([0.0, 0.0], radius);
            return Self { closure, center: [0.0, 0.0], radius, disk, samples: vec![[0.0, 0.0]] };
        }
        let n = world.count(id.k);
        let (t1, t2) = (discretization::wedge_start(n, id.l), discretization::wedge_start(n, id.l + 1));
        let at = |r: f64, t: f64| {
            let rho = (0.5 * r).tanh();
            [rho * t.cos(), rho * t.sin()]
        };
        let (r0, r1) = (2.0 * id.k as f64 * eps, 2.0 * (id.k + 1) as f64 * eps);
        let center = at(r0 + eps, 0.5 * (t1 + t2));
        // distance to the center is monotone along both arcs and convex along
        // both radial sides, so the corners are the farthest points
        let corners = [at(r0, t1), at(r0, t2), at(r1, t1), at(r1, t2)];
        let radius = corners.iter().map(|&q| dist2d(center, q)).fold(0.0, f64::max) * (1.0 + 1e-9) + 1e-12;
        let disk = geometry::hyperbolic_disk(center, radius);
        let mut samples = vec![center];
        samples.extend(corners);
        Self { closure, center, radius, disk, samples }
    }

    fn contains(&self, y: P2) -> bool {
        self.closure.iter().all(|q| q.eval(y) <= 0.0)
    }
}

#[derive(Default)]
pub(crate) struct Shapes(HashMap<SectorId, Shape>);

impl Shapes {
    fn get(&mut self, world: &mut TileWorld, id: SectorId) -> &Shape {
        self.0.entry(id).or_insert_with(|| Shape::new(world, id))
    }
}

fn cell_constraints(world: &TileWorld, v: VertexId) -> Vec<Quadric> {
    let cell = world.known_cell(v).expect("certified cell");
    cells::cell_constraints(world.point(v), cell.neighbors.iter().map(|&w| world.point(w)))
}

fn meets(world: &TileWorld, v: VertexId, extra: &[Quadric]) -> bool {
    let mut cons = cell_constraints(world, v);
    cons.extend_from_slice(extra);
    plane::feasible_point(&cons).is_some()
}

/// Whether every point of the ball `B(center, radius)` is strictly closer to
/// some neighbor of `v` than to `v`, so that the ball misses the cell.
fn ball_outside_cell(world: &TileWorld, v: VertexId, center: P2, radius: f64) -> bool {
    let cell = world.known_cell(v).expect("certified");
    let dz = dist2d(center, world.point(v)) - radius;
    cell.neighbors.iter().any(|&w| dist2d(center, world.point(w)) + radius < dz)
}

/// Whether the certified cell of `v` meets the closed sector.
fn meets_shape(world: &TileWorld, v: VertexId, shape: &Shape) -> bool {
    let z = world.point(v);
    if shape.contains(z) {
        return true;
    }
    let cell = world.known_cell(v).expect("certified");
    if dist2d(z, shape.center) > cell.extent + shape.radius {
        return false;
    }
    let cons = cell_constraints(world, v);
    let (c, r) = shape.disk;
    if cons.iter().any(|q| q.excludes_disk(c, r)) {
        return false;
    }
    if cell.vertices.iter().any(|&q| shape.contains(q))
        || shape.samples.iter().any(|&y| cons.iter().all(|q| q.eval(y) <= 0.0))
    {
        return true;
    }
    let mut all = cons;
    all.extend_from_slice(&shape.closure);
    plane::feasible_point(&all).is_some()
}

/// Cells meeting the closure of `x` if they can all be certified from the
/// revealed sectors.
fn certified_closure(world: &mut TileWorld, shapes: &mut Shapes, x: SectorId) -> Result<Option<Vec<VertexId>>> {
    let rep = representative(world, x);
    let Some(o) = world.try_owner(rep)? else {
        return Ok(None);
    };
    let shape = shapes.get(world, x);
    let mut found = vec![o];
    let mut examined: HashSet<VertexId> = HashSet::default();
    examined.insert(o);
    let mut stack = vec![o];
    while let Some(c) = stack.pop() {
        if world.try_cell(c)?.is_none() {
            return Ok(None);
        }
        let nbrs = world.known_cell(c).expect("certified").neighbors.clone();
        let pc = world.point(c);
        let far_c = dist2d(pc, shape.center) + shape.radius;
        for w in nbrs {
            if examined.contains(&w) {
                continue;
            }
            // w's cell can only meet the sector where w is at least as close as c
            let pw = world.point(w);
            if !shape.contains(pw) {
                if dist2d(pw, shape.center) - shape.radius > far_c {
                    continue;
                }
                let toward_w = cells::bisector(pw, pc);
                if toward_w.is_some_and(|q| q.excludes_disk(shape.disk.0, shape.disk.1)) {
                    continue;
                }
                let mut side = shape.closure.clone();
                side.extend(cells::bisector(pw, pc));
                if plane::feasible_point(&side).is_none() {
                    continue;
                }
            }
            if world.try_cell(w)?.is_none() {
                return Ok(None);
            }
            examined.insert(w);
            if meets_shape(world, w, shape) {
                found.push(w);
                stack.push(w);
            }
        }
    }
    found.sort_unstable();
    Ok(Some(found))
}

/// Result of DISCOVER on one sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discovery {
    pub sector: SectorId,
    /// Cells meeting the closed sector (world vertex ids, ascending).
    pub cells: Vec<VertexId>,
    /// Sectors revealed by this call, in order.
    pub revealed: Vec<SectorId>,
    /// Largest search radius used around the representative.
    pub radius: u32,
}

/// DISCOVER on a world: reveals every sector whose representative lies within
/// distance `l` of the representative of `x`, for `l = 0, 1, 2, ...`, until
/// the cells meeting the closure of `x` are certified.
pub fn discover_world(world: &mut TileWorld, x: SectorId) -> Result<Discovery> {
    discover_with(world, &mut Shapes::default(), x)
}

fn discover_with(world: &mut TileWorld, shapes: &mut Shapes, x: SectorId) -> Result<Discovery> {
    let rep = representative(world, x);
    let before = world.sampled_tiles().len();
    let mut l = 0u32;
    loop {
        if let Some(cells) = certified_closure(world, shapes, x)? {
            let revealed = world.sampled_tiles()[before..].to_vec();
            return Ok(Discovery { sector: x, cells, revealed, radius: l.saturating_sub(1) });
        }
        let (c, r) = geometry::hyperbolic_disk(rep, l as f64);
        let candidates = world.box_tiles(c, r * (1.0 + 1e-9) + 1e-15)?;
        for id in candidates {
            if world.is_sampled(id) {
                continue;
            }
            let q = representative(world, id);
            if dist2d(q, rep) <= l as f64 + 1e-12 {
                world.sample_tile(id)?;
            }
        }
        l += 1;
    }
}

/// DISCOVER on a finite configuration tiled by `index`. Cells are reported
/// as indices into `config`.
pub fn discover(config: &ColoredConfig, x: SectorId, index: &SectorIndex) -> Result<(Vec<usize>, Discovery)> {
    let mut world = TileWorld::from_config(config, index.epsilon())?;
    let d = discover_world(&mut world, x)?;
    let mut cells: Vec<usize> = d.cells.iter().map(|&v| world.config_index(v).expect("fixed world")).collect();
    cells.sort_unstable();
    Ok((cells, d))
}

/// Why a sector entered the frontier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// Its closure meets `S(0, k)`.
    Sphere,
    /// Its closure meets this cell of `Z`.
    Cell(VertexId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub picked: SectorId,
    pub reason: Reason,
    /// `|X_t|`: sectors picked so far, this one included.
    pub picked_count: usize,
    /// Sectors revealed so far (DISCOVER may reveal more than it picks).
    pub revealed_count: usize,
    /// Cells in `Z_t`, in `W_t` and sectors in `M_{t+1}` after the step.
    pub z_cells: usize,
    pub w_cells: usize,
    pub frontier: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTrace {
    pub n: f64,
    pub k: f64,
    pub p: f64,
    pub steps: Vec<TraceStep>,
    /// Picked sectors, in order.
    pub picked: Vec<SectorId>,
    /// Every sector revealed, in order.
    pub revealed: Vec<SectorId>,
    /// Cells of `Z` at termination.
    pub z_cells: Vec<VertexId>,
    pub value: bool,
}

struct Run<'w> {
    world: &'w mut TileWorld,
    p: f64,
    k: f64,
    max_ring: u32,
    z: HashSet<VertexId>,
    w: BTreeSet<VertexId>,
    frontier: BTreeSet<SectorId>,
    reasons: HashMap<SectorId, Reason>,
    picked: HashSet<SectorId>,
    shapes: Shapes,
}

impl Run<'_> {
    fn in_i(&self, id: SectorId) -> bool {
        id.k <= self.max_ring
    }

    fn black(&self, v: VertexId) -> bool {
        self.world.mark(v) <= self.p
    }

    fn push_frontier(&mut self, id: SectorId, reason: Reason) {
        if self.in_i(id) && !self.picked.contains(&id) && !self.frontier.contains(&id) {
            self.frontier.insert(id);
            self.reasons.insert(id, reason);
        }
    }

    /// Whether the certified cell of `v` meets `S(0, k)`.
    fn meets_sphere(&self, v: VertexId) -> bool {
        let cell = self.world.known_cell(v).expect("certified");
        let z = self.world.point(v);
        if self.k == 0.0 {
            // contains the origin: no neighbor is strictly closer to it
            let nz = plane::norm2(z);
            return cell.neighbors.iter().all(|&w| nz <= plane::norm2(self.world.point(w)));
        }
        if cell.reach < self.k {
            return false;
        }
        if dist2d([0.0, 0.0], z) <= self.k || cell.vertices.iter().any(|&q| dist2d([0.0, 0.0], q) <= self.k) {
            return true;
        }
        if ball_outside_cell(self.world, v, [0.0, 0.0], self.k) {
            return false;
        }
        meets(self.world, v, &[cells::origin_ball(self.k)])
    }

    fn join(&mut self, v: VertexId) -> Result<()> {
        let mut stack = vec![v];
        while let Some(c) = stack.pop() {
            if !self.z.insert(c) {
                continue;
            }
            self.w.remove(&c);
            let cell = self.world.known_cell(c).expect("certified").clone();
            let (dc, dr) = geometry::hyperbolic_disk(self.world.point(c), cell.extent);
            let candidates = self.world.box_tiles(dc, dr * (1.0 + 1e-9) + 1e-15)?;
            for id in candidates {
                if !self.in_i(id) || self.picked.contains(&id) || self.frontier.contains(&id) {
                    continue;
                }
                let shape = self.shapes.get(self.world, id);
                if meets_shape(self.world, c, shape) {
                    self.push_frontier(id, Reason::Cell(c));
                }
            }
            for &u in &cell.neighbors {
                if self.w.contains(&u) {
                    stack.push(u);
                }
            }
        }
        Ok(())
    }

    fn absorb(&mut self, cells_found: &[VertexId]) -> Result<()> {
        for &c in cells_found {
            if !self.black(c) || self.z.contains(&c) {
                continue;
            }
            let touches_z = self.world.known_cell(c).expect("certified").neighbors.iter().any(|u| self.z.contains(u));
            if touches_z || self.meets_sphere(c) {
                self.join(c)?;
            } else {
                self.w.insert(c);
            }
        }
        Ok(())
    }
}

/// Runs `A_k` on a world with nothing revealed yet. Returns the event value
/// `{0 <-> S(0, n)}` at level `p` and the trace.
pub fn run_algorithm_k_world(world: &mut TileWorld, p: f64, n: f64, k: f64) -> Result<(bool, DecisionTrace)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    if !(k >= 0.0 && k <= n && n.is_finite()) {
        return Err(Error::Usage(format!("need 0 <= k <= n, got k = {k}, n = {n}")));
    }
    if !world.sampled_tiles().is_empty() {
        return Err(Error::Usage("A_k needs a world with nothing revealed".into()));
    }
    let eps = world.epsilon();
    // I: representatives (at radius 2 k' ε) strictly inside B(0, n + 1)
    let mut max_ring = ((n + 1.0) / (2.0 * eps)).ceil() as u32;
    while max_ring > 0 && 2.0 * max_ring as f64 * eps >= n + 1.0 {
        max_ring -= 1;
    }
    let mut run = Run {
        world,
        p,
        k,
        max_ring,
        z: HashSet::default(),
        w: BTreeSet::new(),
        frontier: BTreeSet::new(),
        reasons: Default::default(),
        picked: HashSet::default(),
        shapes: Shapes::default(),
    };
    // sectors whose closed radial range [2k'ε, 2(k'+1)ε] contains k
    let kk = discretization::ring_of(eps, k);
    let mut rings = vec![kk];
    if kk > 0 && 2.0 * kk as f64 * eps == k {
        rings.push(kk - 1);
    }
    for ring in rings {
        let count = run.world.count(ring);
        for l in 0..count {
            run.push_frontier(SectorId::new(ring, l), Reason::Sphere);
        }
    }
    let mut steps = Vec::new();
    let mut picked = Vec::new();
    while let Some(y) = run.frontier.pop_first() {
        let reason = run.reasons[&y];
        run.picked.insert(y);
        picked.push(y);
        let d = discover_with(run.world, &mut run.shapes, y)?;
        run.absorb(&d.cells)?;
        steps.push(TraceStep {
            picked: y,
            reason,
            picked_count: picked.len(),
            revealed_count: run.world.sampled_tiles().len(),
            z_cells: run.z.len(),
            w_cells: run.w.len(),
            frontier: run.frontier.len(),
        });
    }
    // the value: a Z cell containing the origin whose Z-component reaches n
    let nz = |v: VertexId, world: &TileWorld| plane::norm2(world.point(v));
    let origin_cells: Vec<VertexId> = run
        .z
        .iter()
        .copied()
        .filter(|&v| {
            let cell = run.world.known_cell(v).expect("certified");
            cell.neighbors.iter().all(|&w| nz(v, run.world) <= nz(w, run.world))
        })
        .collect();
    let mut seen: HashSet<VertexId> = origin_cells.iter().copied().collect();
    let mut stack = origin_cells;
    let mut value = false;
    while let Some(c) = stack.pop() {
        let cell = run.world.known_cell(c).expect("certified");
        if cell.reach >= n {
            value = true;
            break;
        }
        for &u in &cell.neighbors {
            if run.z.contains(&u) && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    let mut z_cells: Vec<VertexId> = run.z.into_iter().collect();
    z_cells.sort_unstable();
    let revealed = run.world.sampled_tiles().to_vec();
    Ok((value, DecisionTrace { n, k, p, steps, picked, revealed, z_cells, value }))
}

/// `A_k` on a finite configuration tiled by `index`.
pub fn run_algorithm_k(
    config: &ColoredConfig,
    p: f64,
    index: &SectorIndex,
    n: f64,
    k: f64,
) -> Result<(bool, DecisionTrace)> {
    let mut world = TileWorld::from_config(config, index.epsilon())?;
    run_algorithm_k_world(&mut world, p, n, k)
}
