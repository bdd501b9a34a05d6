//! Percolation events on finite configurations against independent routes:
//! plain BFS for clusters, the lazily tiled world for one-arm events and
//! pivotal sets, and monotonicity in `p`.

use hyperperc::percolation::{
    arm_thresholds, black_clusters, explore, one_arm_event, pivotal_set, trial_world, world_event, world_pivotal,
    Coloring, LocalEvent,
};
use hyperperc::sampling::{sample_ppp, ColoredConfig};
use hyperperc::tessellation::Tessellation;
use hyperperc::world::TileWorld;
use hyperperc::RngStream;
use proptest::prelude::*;

mod common;

use common::bfs_clusters;

fn config(seed: u64, radius: f64) -> ColoredConfig {
    sample_ppp(1.0, radius, 2, &RngStream::new(seed)).unwrap()
}

#[test]
fn clusters_match_bfs_on_100_configs() {
    for s in 0..100 {
        let cfg = config(500 + s, 3.0);
        let tess = Tessellation::build(&cfg).unwrap();
        for p in [0.3, 0.5, 0.7] {
            let mut got = black_clusters(&tess, p);
            got.iter_mut().for_each(|c| c.sort_unstable());
            got.sort();
            assert_eq!(got, bfs_clusters(&tess, p), "config {s}, p = {p}");
        }
    }
}

#[test]
fn one_arm_on_configs_matches_the_tiled_world() {
    let eps = 0.5;
    for s in 0..12 {
        let cfg = config(900 + s, 7.0);
        for p in [0.4, 0.6, 0.8] {
            let direct = one_arm_event(&cfg, p, 2.0).unwrap();
            let mut w = TileWorld::from_config(&cfg, eps).unwrap();
            let lazy = world_event(&mut w, &LocalEvent::one_arm(2.0), Coloring::new(p)).unwrap();
            assert_eq!(direct, lazy, "config {s}, p = {p}");
        }
    }
}

#[test]
fn pivotal_sets_match_the_tiled_world() {
    let eps = 0.5;
    let event = LocalEvent::one_arm(1.5);
    for s in 0..12 {
        let cfg = config(1300 + s, 7.0);
        let p = 0.6;
        let direct = pivotal_set(&cfg, p, &event).unwrap();
        let mut w = TileWorld::from_config(&cfg, eps).unwrap();
        let mut lazy: Vec<usize> = world_pivotal(&mut w, &event, p)
            .unwrap()
            .into_iter()
            .map(|v| w.config_index(v).unwrap())
            .collect();
        lazy.sort_unstable();
        assert_eq!(direct, lazy, "config {s}");
    }
}

#[test]
fn pivotal_nuclei_flip_the_event() {
    let event = LocalEvent::one_arm(1.5);
    for s in 0..6 {
        let mut cfg = config(1700 + s, 7.0);
        let p = 0.55;
        let piv = pivotal_set(&cfg, p, &event).unwrap();
        for i in piv.into_iter().take(3) {
            let keep = cfg.nuclei[i].mark;
            cfg.nuclei[i].mark = 0.0;
            let on = one_arm_event(&cfg, p, 1.5).unwrap();
            cfg.nuclei[i].mark = 1.0;
            let off = one_arm_event(&cfg, p, 1.5).unwrap();
            cfg.nuclei[i].mark = keep;
            assert!(on && !off, "config {s}, nucleus {i}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_arm_is_monotone_in_p(seed in 0u64..10_000, a in 0.0f64..1.0, b in 0.0f64..1.0, n in 0.0f64..4.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut w = trial_world(1.0, 0.5, seed, 0).unwrap();
        let e_lo = world_event(&mut w, &LocalEvent::one_arm(n), Coloring::new(lo)).unwrap();
        let e_hi = world_event(&mut w, &LocalEvent::one_arm(n), Coloring::new(hi)).unwrap();
        prop_assert!(!e_lo || e_hi);
        let r_lo = explore(&mut w, [0.0, 0.0], Coloring::new(lo), n, None).unwrap();
        let r_hi = explore(&mut w, [0.0, 0.0], Coloring::new(hi), n, None).unwrap();
        prop_assert!(r_lo.unwrap_or(-1.0) <= r_hi.unwrap_or(-1.0));
    }

    #[test]
    fn arm_thresholds_locate_the_event(seed in 0u64..10_000, p in 0.0f64..1.0) {
        let ns = [0.0, 1.0, 2.5, 4.0];
        let mut w = trial_world(1.0, 0.5, seed, 1).unwrap();
        let t = arm_thresholds(&mut w, [0.0, 0.0], &ns).unwrap();
        prop_assert!(t.windows(2).all(|x| x[0] <= x[1]));
        for (j, &n) in ns.iter().enumerate() {
            let e = world_event(&mut w, &LocalEvent::one_arm(n), Coloring::new(p)).unwrap();
            prop_assert_eq!(e, t[j] <= p, "n = {}", n);
        }
    }
}
