//! One runner per subcommand. Each writes its artifacts and reports whether
//! a statistical criterion failed.

use std::f64::consts::PI;

use hyperperc::discretization::{SectorId, SectorIndex};
use hyperperc::osss::{
    estimate_influence, estimate_revealment, lemma4_audit, verify_osss_discrete, DiscreteOSSSCase, SectorMap,
};
use hyperperc::percolation::{
    estimate_pc, estimate_theta_grid, fit_decay, fkg_audit, mean_field_check, russo_audit, sharpness_grid,
    sharpness_ode_check, theta_decay, LocalEvent,
};
use hyperperc::{Error, Result};
use serde::Serialize;
use serde_json::json;

use crate::config::{Command, EventKind, ExperimentConfig};
use crate::output::{emit, json, num, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn of(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Theta => theta(cfg),
        Command::Pc => pc(cfg),
        Command::Decay => decay(cfg),
        Command::Meanfield => meanfield(cfg),
        Command::RussoAudit => russo(cfg),
        Command::FkgAudit => fkg(cfg),
        Command::OsssVerify => osss(cfg),
        Command::Reveal => reveal(cfg),
        Command::Influence => influence(cfg),
        Command::Lemma4Audit => lemma4(cfg),
        Command::Sharpness => sharpness(cfg),
        Command::Sectors => sectors(cfg),
    }
}

fn write_json<T: Serialize>(cfg: &ExperimentConfig, result: &T) -> Result<()> {
    emit(cfg.output.as_deref(), &json(cfg, result)?)
}

fn write_table(cfg: &ExperimentConfig, table: &Table) -> Result<()> {
    emit(cfg.output.as_deref(), &table.render(cfg)?)
}

/// `(x, y, y_err)` triples for external plotting.
fn plot_data(cfg: &ExperimentConfig, points: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<()> {
    let mut t = Table::new(&["x", "y", "y_err"]);
    for (x, y, e) in points {
        t.push(vec![num(x), num(y), num(e)]);
    }
    write_table(cfg, &t)
}

fn theta(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = estimate_theta_grid(cfg.lambda, &cfg.p, &cfg.n, cfg.trials, cfg.seed())?;
    if cfg.plot_data {
        let pts: Vec<_> = if cfg.n.len() == 1 {
            cfg.p.iter().zip(&grid[0]).map(|(&p, e)| (p, e.mean, e.std_error)).collect()
        } else {
            cfg.n.iter().zip(&grid).map(|(&n, row)| (n, row[0].mean, row[0].std_error)).collect()
        };
        plot_data(cfg, pts)?;
        return Ok(Outcome::Pass);
    }
    let mut t = Table::new(&["p", "n", "theta_hat", "std_err", "ci95_lo", "ci95_hi"]);
    for (j, &p) in cfg.p.iter().enumerate() {
        for (i, &n) in cfg.n.iter().enumerate() {
            let e = &grid[i][j];
            t.push(vec![num(p), num(n), num(e.mean), num(e.std_error), num(e.ci95.0), num(e.ci95.1)]);
        }
    }
    write_table(cfg, &t)?;
    Ok(Outcome::Pass)
}

fn pc(cfg: &ExperimentConfig) -> Result<Outcome> {
    let est = estimate_pc(cfg.lambda, cfg.n_or(6.0), cfg.trials, cfg.p_tolerance, cfg.seed())?;
    write_json(cfg, &est)?;
    Ok(Outcome::Pass)
}

fn decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ns: Vec<f64> = if cfg.n.is_empty() { (1..=8).map(f64::from).collect() } else { cfg.n.clone() };
    let est = theta_decay(cfg.lambda, cfg.p0(), &ns, cfg.trials, cfg.seed())?;
    if cfg.plot_data {
        plot_data(cfg, est.iter().map(|(n, e)| (*n, e.mean, e.std_error)))?;
        return Ok(Outcome::Pass);
    }
    let fit = fit_decay(&est)?;
    if let Some(path) = &cfg.points {
        let mut t = Table::new(&["n", "theta_hat", "std_err"]);
        for (n, e) in &est {
            t.push(vec![num(*n), num(e.mean), num(e.std_error)]);
        }
        emit(Some(path), &t.render(cfg)?)?;
    }
    let estimates: Vec<_> = est.iter().map(|(n, e)| json!({ "n": n, "theta": e })).collect();
    write_json(cfg, &json!({ "fit": fit, "decays": fit.decays(), "estimates": estimates }))?;
    Ok(Outcome::Pass)
}

fn meanfield(cfg: &ExperimentConfig) -> Result<Outcome> {
    let (pc, source) = match cfg.pc {
        Some(pc) => (pc, json!("given")),
        None => {
            let est = estimate_pc(cfg.lambda, cfg.pc_n, cfg.trials, cfg.p_tolerance, cfg.seed())?;
            (est.mid, serde_json::to_value(&est)?)
        }
    };
    let report = mean_field_check(cfg.lambda, &cfg.p, pc, cfg.n_or(3.0), cfg.trials, cfg.seed())?;
    if cfg.plot_data {
        plot_data(cfg, report.points.iter().map(|q| (q.p, q.theta.mean, q.theta.std_error)))?;
    } else {
        write_json(cfg, &json!({ "pc_estimate": source, "report": report, "passes": report.passes() }))?;
    }
    Ok(Outcome::of(report.passes()))
}

fn russo(cfg: &ExperimentConfig) -> Result<Outcome> {
    let event = match cfg.event {
        EventKind::OwnerBlack => LocalEvent::OwnerBlack,
        EventKind::OneArm => LocalEvent::one_arm(cfg.n_or(2.0)),
    };
    let r = russo_audit(cfg.lambda, &event, cfg.p0(), cfg.dp, cfg.trials, cfg.seed())?;
    write_json(cfg, &json!({ "report": r, "passes": r.passes() }))?;
    Ok(Outcome::of(r.passes()))
}

fn fkg(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.n_or(2.0);
    let a = LocalEvent::one_arm_from(cfg.offset, 0.0, n)?;
    let b = LocalEvent::one_arm_from(cfg.offset, PI, n)?;
    let r = fkg_audit(cfg.lambda, cfg.p0(), &a, &b, cfg.trials, cfg.seed())?;
    write_json(cfg, &json!({ "report": r, "gap_ci95": r.ci95(), "passes": r.passes() }))?;
    Ok(Outcome::of(r.passes()))
}

fn osss(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut reports = Vec::new();
    for path in &cfg.case {
        let text = std::fs::read_to_string(path)?;
        let case = DiscreteOSSSCase::from_json(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        reports.push(verify_osss_discrete(&case)?);
    }
    let all = reports.iter().all(|r| r.holds);
    write_json(cfg, &json!({ "reports": reports, "all_hold": all }))?;
    Ok(Outcome::of(all))
}

fn sector_table(map: &SectorMap, epsilon: f64) -> Result<Table> {
    let top = map.keys().map(|id| id.k).max().unwrap_or(0);
    let index = SectorIndex::new(epsilon, 2.0 * (top as f64 + 1.0) * epsilon)?;
    let mut t = Table::new(&["k", "l", "rep_radius", "rep_angle", "estimate", "std_err"]);
    for (id, e) in map {
        let (r, a) = rep_polar(&index, *id);
        t.push(vec![id.k.to_string(), id.l.to_string(), num(r), num(a), num(e.mean), num(e.std_error)]);
    }
    Ok(t)
}

fn rep_polar(index: &SectorIndex, id: SectorId) -> (f64, f64) {
    if id.k == 0 {
        return (0.0, 0.0);
    }
    let q = index.representative(id);
    (q.radius(), q.angle().rem_euclid(2.0 * PI))
}

fn reveal(cfg: &ExperimentConfig) -> Result<Outcome> {
    let r = estimate_revealment(cfg.lambda, cfg.p0(), cfg.epsilon, cfg.n_or(0.0), cfg.k, cfg.trials, cfg.seed())?;
    let map = if cfg.queried { &r.queried } else { &r.picked };
    write_table(cfg, &sector_table(map, cfg.epsilon)?)?;
    Ok(Outcome::Pass)
}

fn influence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let r = estimate_influence(cfg.lambda, cfg.p0(), cfg.epsilon, cfg.n_or(0.0), cfg.trials, cfg.seed())?;
    write_table(cfg, &sector_table(&r.influences, cfg.epsilon)?)?;
    Ok(Outcome::Pass)
}

fn lemma4(cfg: &ExperimentConfig) -> Result<Outcome> {
    let r = lemma4_audit(cfg.lambda, cfg.p0(), cfg.epsilon, cfg.n_or(0.0), cfg.dp, cfg.trials, cfg.seed())?;
    write_json(cfg, &r)?;
    Ok(Outcome::of(r.holds))
}

fn sharpness(cfg: &ExperimentConfig) -> Result<Outcome> {
    let check = sharpness_grid(cfg.lambda, &cfg.p, cfg.n_max, cfg.trials, cfg.seed())?;
    let report = sharpness_ode_check(&check, cfg.c, cfg.tolerance)?;
    write_json(cfg, &json!({ "check": check, "report": report, "passes": report.passes() }))?;
    Ok(Outcome::of(report.passes()))
}

#[derive(Serialize)]
struct Ring {
    k: u32,
    inner: f64,
    outer: f64,
    count: u64,
    area: f64,
}

fn sectors(cfg: &ExperimentConfig) -> Result<Outcome> {
    let index = SectorIndex::new(cfg.epsilon, cfg.radius)?;
    let rings: Vec<Ring> = (0..index.rings())
        .map(|k| {
            let id = SectorId::new(k, 0);
            let (inner, outer) = index.radial_interval(id);
            Ring { k, inner, outer, count: index.count(k), area: index.area(id) }
        })
        .collect();
    let summary = json!({
        "epsilon": index.epsilon(),
        "covered_radius": index.covered_radius(),
        "rings": rings,
        "total_sectors": index.total_sectors(),
    });
    write_json(cfg, &summary)?;
    Ok(Outcome::Pass)
}

