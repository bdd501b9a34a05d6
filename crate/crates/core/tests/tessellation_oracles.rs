//! Tessellation queries against brute-force oracles that only use distances.

use hyperperc::geometry::hyp_distance;
use hyperperc::sampling::sample_ppp;
use hyperperc::tessellation::Tessellation;
use hyperperc::{HPoint, RngStream};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{bisector_margin, small_configs};

#[test]
fn adjacency_matches_bisector_oracle() {
    let mut mismatches = 0;
    for c in small_configs(100, 12) {
        let t = Tessellation::build(&c).unwrap();
        let nuclei: Vec<&HPoint> = c.nuclei.iter().map(|n| &n.point).collect();
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let best = bisector_margin(&nuclei, i, j);
                let oracle = best > 1e-9;
                let got = t.neighbors(i).contains(&j);
                if oracle != got && best.abs() > 1e-6 {
                    mismatches += 1;
                }
                assert_eq!(got, t.neighbors(j).contains(&i), "adjacency symmetric");
            }
        }
    }
    assert_eq!(mismatches, 0);
}

#[test]
fn owner_matches_linear_scan() {
    let c = sample_ppp(1.0, 4.0, 2, &RngStream::new(77)).unwrap();
    let t = Tessellation::build(&c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for _ in 0..100_000 {
        let q = HPoint::from_polar(rng.random_range(0.0..4.5), rng.random_range(0.0..6.3)).unwrap();
        let brute = (0..c.len())
            .map(|i| (hyp_distance(&q, &c.nuclei[i].point).unwrap(), i))
            .fold((f64::INFINITY, usize::MAX), |b, x| if x.0 < b.0 { x } else { b })
            .1;
        if t.owner_of(&q).unwrap() != brute {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
}

#[test]
fn voronoi_vertices_are_equidistant() {
    for s in 0..20 {
        let c = sample_ppp(1.0, 3.0, 2, &RngStream::new(s)).unwrap();
        let t = Tessellation::build(&c).unwrap();
        for v in t.voronoi_vertices() {
            let ds = v.nuclei.map(|i| hyp_distance(&v.point, &c.nuclei[i].point).unwrap());
            assert!((ds[0] - ds[1]).abs() < 1e-9 && (ds[0] - ds[2]).abs() < 1e-9, "{ds:?}");
            // and no nucleus is strictly closer
            for n in &c.nuclei {
                assert!(hyp_distance(&v.point, &n.point).unwrap() > ds[0] - 1e-9);
            }
        }
    }
}

#[test]
fn delaunay_graph_is_connected() {
    for s in 0..20 {
        let c = sample_ppp(1.0, 3.0, 2, &RngStream::new(s)).unwrap();
        let t = Tessellation::build(&c).unwrap();
        let mut seen = vec![false; c.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in t.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        assert!(seen.iter().all(|&x| x));
    }
}

#[test]
fn dn_matches_mesh_oracle_and_is_nested() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for s in 0..100 {
        let c = sample_ppp(1.0, 3.0, 2, &RngStream::new(500 + s)).unwrap();
        if c.is_empty() {
            continue;
        }
        let t = Tessellation::build(&c).unwrap();
        let n = rng.random_range(0.2..1.5);
        let dn = t.compute_dn(n);
        let origin_owner = t.owner_of(&HPoint::origin(2)).unwrap();
        assert!(dn.contains(&origin_owner));
        // every owner of a mesh point of the ball is a member
        for i in 0..60 {
            for j in 0..120 {
                let r = n * i as f64 / 59.0;
                let th = std::f64::consts::TAU * j as f64 / 120.0;
                let y = HPoint::from_polar(r, th).unwrap();
                let o = t.owner_of(&y).unwrap();
                assert!(dn.contains(&o), "mesh owner {o} missing from D_n");
            }
        }
        let bigger = t.compute_dn(n + 0.3);
        assert!(dn.iter().all(|i| bigger.contains(i)));
    }
}

#[test]
fn bounded_cell_reach_matches_sampling() {
    // rejection-sample points of interior cells; none may exceed the reported reach
    let c = sample_ppp(2.0, 3.0, 2, &RngStream::new(41)).unwrap();
    let t = Tessellation::build(&c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for z in 0..c.len() {
        let rep = t.reach(z);
        if rep.unbounded || c.nuclei[z].point.radius() > 1.5 {
            continue;
        }
        checked += 1;
        let mut best: f64 = 0.0;
        for _ in 0..4000 {
            let y = HPoint::from_polar(rng.random_range(0.0..rep.reach + 0.1), rng.random_range(0.0..6.3))
                .unwrap();
            if t.owner_of(&y).unwrap() == z {
                best = best.max(y.radius());
            }
        }
        assert!(best <= rep.reach + 1e-9);
        assert!(best > rep.reach - 0.5, "sampled max {best} far below reach {}", rep.reach);
        assert!(!t.cell_reaches_distance(z, rep.reach + 1e-6));
    }
    assert!(checked > 5);
}
