//! One-arm events on finite configurations and on the tiled world.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::delaunay::VertexId;
use crate::error::{Error, Result};
use crate::geometry::HPoint;
use crate::plane::P2;
use crate::sampling::ColoredConfig;
use crate::tessellation::Tessellation;
use crate::world::{Cell, TileWorld};

/// A local event of the coloring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalEvent {
    Always,
    /// The owner of the origin is black.
    OwnerBlack,
    /// A black path from `base` (Poincaré coordinates) to hyperbolic distance
    /// `n` from it.
    OneArm { base: [f64; 2], n: f64 },
}

impl LocalEvent {
    /// `{0 <-> S(0, n)}`.
    pub fn one_arm(n: f64) -> Self {
        LocalEvent::OneArm { base: [0.0, 0.0], n }
    }

    /// A one-arm event based at the point with polar coordinates `(radius, angle)`.
    pub fn one_arm_from(radius: f64, angle: f64, n: f64) -> Result<Self> {
        let b = HPoint::from_polar(radius, angle)?.xy();
        Ok(LocalEvent::OneArm { base: b, n })
    }

    fn validate(&self) -> Result<()> {
        if let LocalEvent::OneArm { n, .. } = self {
            if !(*n >= 0.0 && n.is_finite()) {
                return Err(Error::Domain(format!("arm length must be >= 0, got {n}")));
            }
        }
        Ok(())
    }
}

fn arm_length_ok(n: f64) -> Result<()> {
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!("n must be a finite value >= 0, got {n}")));
    }
    Ok(())
}

fn check_planar(config: &ColoredConfig) -> Result<()> {
    if config.d != 2 {
        return Err(Error::Usage(format!("percolation events need d = 2, got d = {}", config.d)));
    }
    if config.is_empty() {
        return Err(Error::EmptyConfig);
    }
    Ok(())
}

/// Evaluates `event` on a finite tessellation under the coloring `black`.
/// One-arm events are supported from the origin only.
pub fn evaluate_event(tess: &Tessellation<'_>, black: &[bool], event: &LocalEvent) -> Result<bool> {
    event.validate()?;
    match *event {
        LocalEvent::Always => Ok(true),
        LocalEvent::OwnerBlack => Ok(black[tess.owner_of(&HPoint::origin(2))?]),
        LocalEvent::OneArm { base, n } => {
            if base != [0.0, 0.0] {
                return Err(Error::Usage("finite-configuration arms start at the origin".into()));
            }
            let o = tess.owner_of(&HPoint::origin(2))?;
            if !black[o] {
                return Ok(false);
            }
            let mut seen = vec![false; tess.len()];
            let mut stack = vec![o];
            seen[o] = true;
            while let Some(z) = stack.pop() {
                if tess.cell_reaches_distance(z, n) {
                    return Ok(true);
                }
                for &w in tess.neighbors(z) {
                    if black[w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            Ok(false)
        }
    }
}

fn colors(config: &ColoredConfig, p: f64) -> Vec<bool> {
    (0..config.len()).map(|i| config.is_black(i, p)).collect()
}

/// `{0 <-> S(0, n)}` on a finite configuration.
pub fn one_arm_event(config: &ColoredConfig, p: f64, n: f64) -> Result<bool> {
    check_planar(config)?;
    arm_length_ok(n)?;
    let tess = Tessellation::build(config)?;
    evaluate_event(&tess, &colors(config, p), &LocalEvent::one_arm(n))
}

/// Connected components of the black nuclei (marks `<= p`) in the hyperbolic
/// Delaunay graph. Each component is sorted; components are ordered by their
/// smallest member.
pub fn black_clusters(tess: &Tessellation<'_>, p: f64) -> Vec<Vec<usize>> {
    let config = tess.config();
    let mut uf = UnionFind::<usize>::new(tess.len());
    for z in 0..tess.len() {
        if !config.is_black(z, p) {
            continue;
        }
        for &w in tess.neighbors(z) {
            if w > z && config.is_black(w, p) {
                uf.union(z, w);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for z in (0..tess.len()).filter(|&z| config.is_black(z, p)) {
        groups.entry(uf.find(z)).or_default().push(z);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Nuclei whose color flip changes the indicator of `event`, by re-evaluation.
pub fn pivotal_set(config: &ColoredConfig, p: f64, event: &LocalEvent) -> Result<Vec<usize>> {
    check_planar(config)?;
    let tess = Tessellation::build(config)?;
    let mut black = colors(config, p);
    let base = evaluate_event(&tess, &black, event)?;
    let mut out = Vec::new();
    for i in 0..config.len() {
        black[i] = !black[i];
        if evaluate_event(&tess, &black, event)? != base {
            out.push(i);
        }
        black[i] = !black[i];
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, VertexId);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

fn cell_reach(cell: &Cell, base: P2) -> f64 {
    if base == [0.0, 0.0] {
        cell.reach
    } else {
        cell.reach_from(base)
    }
}

/// Coloring of world nuclei: black iff `mark <= p`, except for one optional
/// flipped nucleus.
#[derive(Clone, Copy, Debug)]
pub struct Coloring {
    pub p: f64,
    pub flip: Option<VertexId>,
}

impl Coloring {
    pub fn new(p: f64) -> Self {
        Self { p, flip: None }
    }

    pub fn is_black(&self, world: &TileWorld, v: VertexId) -> bool {
        (world.mark(v) <= self.p) != (self.flip == Some(v))
    }
}

/// Explores the black cluster of the owner of `base`, farthest cells first,
/// and returns the largest distance from `base` reached (stopping as soon as
/// it is `>= cap`), or `None` if the owner is white. Every nucleus whose color
/// was looked at is appended to `reads`.
pub fn explore(
    world: &mut TileWorld,
    base: P2,
    colors: Coloring,
    cap: f64,
    mut reads: Option<&mut Vec<VertexId>>,
) -> Result<Option<f64>> {
    let o = world.owner(base)?;
    if let Some(r) = reads.as_deref_mut() {
        r.push(o);
    }
    if !colors.is_black(world, o) {
        return Ok(None);
    }
    if cap <= 0.0 {
        return Ok(Some(0.0));
    }
    let mut seen: HashSet<VertexId> = HashSet::from([o]);
    let mut best = 0.0f64;
    let mut heap = BinaryHeap::new();
    let r0 = cell_reach(world.cell(o)?, base);
    heap.push(Key(r0, o));
    while let Some(Key(r, z)) = heap.pop() {
        best = best.max(r);
        if best >= cap {
            break;
        }
        let nbrs = world.cell(z)?.neighbors.clone();
        for w in nbrs {
            if !seen.insert(w) {
                continue;
            }
            if let Some(r) = reads.as_deref_mut() {
                r.push(w);
            }
            if colors.is_black(world, w) {
                let rw = cell_reach(world.cell(w)?, base);
                heap.push(Key(rw, w));
            }
        }
    }
    Ok(Some(best))
}

/// Evaluates `event` on the world.
pub fn world_event(world: &mut TileWorld, event: &LocalEvent, colors: Coloring) -> Result<bool> {
    event.validate()?;
    match *event {
        LocalEvent::Always => Ok(true),
        LocalEvent::OwnerBlack => {
            let o = world.owner([0.0, 0.0])?;
            Ok(colors.is_black(world, o))
        }
        LocalEvent::OneArm { base, n } => Ok(explore(world, base, colors, n, None)?.is_some_and(|r| r >= n)),
    }
}

/// Pivotal nuclei of `event` in the world at level `p`. Only nuclei whose
/// color the evaluation read can be pivotal, so only those are re-evaluated.
pub fn world_pivotal(world: &mut TileWorld, event: &LocalEvent, p: f64) -> Result<Vec<VertexId>> {
    event.validate()?;
    let colors = Coloring::new(p);
    let mut reads = Vec::new();
    let value = match *event {
        LocalEvent::Always => return Ok(Vec::new()),
        LocalEvent::OwnerBlack => return Ok(vec![world.owner([0.0, 0.0])?]),
        LocalEvent::OneArm { base, n } => explore(world, base, colors, n, Some(&mut reads))?.is_some_and(|r| r >= n),
    };
    let mut out = Vec::new();
    for v in reads {
        let flipped = Coloring { p, flip: Some(v) };
        if world_event(world, event, flipped)? != value {
            out.push(v);
        }
    }
    Ok(out)
}

/// For each arm length in `ns`, the smallest `p` at which the one-arm event
/// from `base` holds (marks `<= p` black): a minimax-path search where a
/// path's cost is its largest mark.
pub fn arm_thresholds(world: &mut TileWorld, base: P2, ns: &[f64]) -> Result<Vec<f64>> {
    for &n in ns {
        arm_length_ok(n)?;
    }
    let mut out = vec![f64::NAN; ns.len()];
    let o = world.owner(base)?;
    let m0 = world.mark(o);
    let mut open = 0;
    for (t, &n) in out.iter_mut().zip(ns) {
        if n <= 0.0 {
            *t = m0;
        } else {
            open += 1;
        }
    }
    if open == 0 {
        return Ok(out);
    }
    let mut done: HashSet<VertexId> = HashSet::new();
    let mut heap = BinaryHeap::new();
    heap.push(std::cmp::Reverse(Key(m0, o)));
    while let Some(std::cmp::Reverse(Key(cost, z))) = heap.pop() {
        if !done.insert(z) {
            continue;
        }
        let r = cell_reach(world.cell(z)?, base);
        for (t, &n) in out.iter_mut().zip(ns) {
            if t.is_nan() && r >= n {
                *t = cost;
                open -= 1;
            }
        }
        if open == 0 {
            break;
        }
        let nbrs = world.cell(z)?.neighbors.clone();
        for w in nbrs {
            if !done.contains(&w) {
                heap.push(std::cmp::Reverse(Key(cost.max(world.mark(w)), w)));
            }
        }
    }
    Ok(out)
}
