//! Experiment configuration: a JSON file merged with command-line flags, then
//! validated before anything is sampled.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const WORKERS_ENV: &str = "HYPERPERC_WORKERS";

/// A rejected configuration. `field` names the offending key.
#[derive(Debug)]
pub struct ConfigError {
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self { field: Some(field.into()), message: message.into() }
    }

    pub fn other(message: impl Into<String>) -> Self {
        Self { field: None, message: message.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(name) => write!(f, "invalid `{name}`: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// A scalar or a list of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(f64),
    Many(Vec<f64>),
}

impl Values {
    fn into_vec(self) -> Vec<f64> {
        match self {
            Values::One(x) => vec![x],
            Values::Many(v) => v,
        }
    }
}

/// Every key a config file may set. Flags produce the same shape and are
/// layered on top with [`Settings::overlay`].
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub command: Option<String>,
    pub lambda: Option<f64>,
    pub d: Option<usize>,
    pub p: Option<Values>,
    pub n: Option<Values>,
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub tol_fail: Option<f64>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub dp: Option<f64>,
    pub p_tolerance: Option<f64>,
    pub pc: Option<f64>,
    pub pc_n: Option<f64>,
    pub n_max: Option<u32>,
    pub c: Option<f64>,
    pub tolerance: Option<f64>,
    pub event: Option<EventKind>,
    pub offset: Option<f64>,
    pub radius: Option<f64>,
    pub case: Option<Vec<PathBuf>>,
    pub queried: Option<bool>,
    pub points: Option<PathBuf>,
    pub plot_data: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// The owner of the origin is black.
    OwnerBlack,
    /// A black path from the origin to distance n.
    OneArm,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $(if $src.$f.is_some() { $dst.$f = $src.$f; })*
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::other(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            ConfigError::other(format!(
                "{}:{}:{}: {}",
                path.display(),
                e.line(),
                e.column(),
                strip_position(&e.to_string())
            ))
        })
    }

    /// Keys set in `top` replace those in `self`.
    pub fn overlay(mut self, top: Settings) -> Self {
        let s = &mut self;
        overlay!(
            s, top, command, lambda, d, p, n, epsilon, k, trials, seed, tol_fail, output, workers, dp, p_tolerance,
            pc, pc_n, n_max, c, tolerance, event, offset, radius, case, queried, points, plot_data
        );
        self
    }
}

fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Theta,
    Pc,
    Decay,
    Meanfield,
    RussoAudit,
    FkgAudit,
    OsssVerify,
    Reveal,
    Influence,
    Lemma4Audit,
    Sharpness,
    Sectors,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Theta => "theta",
            Command::Pc => "pc",
            Command::Decay => "decay",
            Command::Meanfield => "meanfield",
            Command::RussoAudit => "russo-audit",
            Command::FkgAudit => "fkg-audit",
            Command::OsssVerify => "osss-verify",
            Command::Reveal => "reveal",
            Command::Influence => "influence",
            Command::Lemma4Audit => "lemma4-audit",
            Command::Sharpness => "sharpness",
            Command::Sectors => "sectors",
        }
    }

    /// Commands that sample and therefore need an explicit seed.
    pub fn is_estimator(self) -> bool {
        !matches!(self, Command::OsssVerify | Command::Sectors)
    }
}

/// A validated experiment. Every field has its final value; the resolved
/// config is echoed into each JSON output.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub lambda: f64,
    pub d: usize,
    pub p: Vec<f64>,
    pub n: Vec<f64>,
    pub epsilon: f64,
    pub k: f64,
    pub trials: u64,
    pub seed: Option<u64>,
    pub tol_fail: f64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub workers: usize,
    pub dp: f64,
    pub p_tolerance: f64,
    pub pc: Option<f64>,
    pub pc_n: f64,
    pub n_max: u32,
    pub c: f64,
    pub tolerance: f64,
    pub event: EventKind,
    pub offset: f64,
    pub radius: f64,
    pub case: Vec<PathBuf>,
    pub queried: bool,
    #[serde(skip)]
    pub points: Option<PathBuf>,
    pub plot_data: bool,
}

fn finite(field: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::field(field, format!("{x} is not finite")))
    }
}

fn in_unit(field: &str, x: f64) -> Result<f64, ConfigError> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(ConfigError::field(field, format!("{x} is outside [0, 1]")))
    }
}

fn positive(field: &str, x: f64) -> Result<f64, ConfigError> {
    if finite(field, x)? > 0.0 {
        Ok(x)
    } else {
        Err(ConfigError::field(field, format!("{x} must be > 0")))
    }
}

fn nonnegative(field: &str, x: f64) -> Result<f64, ConfigError> {
    if finite(field, x)? >= 0.0 {
        Ok(x)
    } else {
        Err(ConfigError::field(field, format!("{x} must be >= 0")))
    }
}

fn default_workers() -> Result<usize, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(ConfigError::field(WORKERS_ENV, format!("{v:?} is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

impl ExperimentConfig {
    /// Fills defaults and checks every range for `command`.
    pub fn resolve(command: Command, s: Settings) -> Result<Self, ConfigError> {
        let lambda = positive("lambda", s.lambda.unwrap_or(1.0))?;
        let d = s.d.unwrap_or(2);
        if d != 2 {
            return Err(ConfigError::field("d", format!("only d = 2 is supported, got {d}")));
        }
        let p = s.p.map(Values::into_vec).unwrap_or_default();
        for &x in &p {
            in_unit("p", x)?;
        }
        let n = s.n.map(Values::into_vec).unwrap_or_default();
        for &x in &n {
            nonnegative("n", x)?;
        }
        let epsilon = positive("epsilon", s.epsilon.unwrap_or(0.25))?;
        if epsilon > 4.0 {
            return Err(ConfigError::field("epsilon", format!("{epsilon} is larger than 4")));
        }
        let k = nonnegative("k", s.k.unwrap_or(0.0))?;
        let trials = s.trials.unwrap_or(1000);
        if trials == 0 {
            return Err(ConfigError::field("trials", "must be at least 1"));
        }
        let tol_fail = s.tol_fail.unwrap_or(1e-6);
        if !(tol_fail > 0.0 && tol_fail < 1.0) {
            return Err(ConfigError::field("tol_fail", format!("{tol_fail} is outside (0, 1)")));
        }
        let workers = match s.workers {
            Some(0) => return Err(ConfigError::field("workers", "must be at least 1")),
            Some(w) => w,
            None => default_workers()?,
        };
        let dp = positive("dp", s.dp.unwrap_or(0.05))?;
        if dp > 0.5 {
            return Err(ConfigError::field("dp", format!("{dp} is larger than 0.5")));
        }
        let p_tolerance = positive("p_tolerance", s.p_tolerance.unwrap_or(1e-3))?;
        let pc = s.pc.map(|x| in_unit("pc", x)).transpose()?;
        let pc_n = nonnegative("pc_n", s.pc_n.unwrap_or(6.0))?;
        let n_max = s.n_max.unwrap_or(4);
        if !(1..=20).contains(&n_max) {
            return Err(ConfigError::field("n_max", format!("{n_max} is outside 1..=20")));
        }
        let c = nonnegative("c", s.c.unwrap_or(0.1))?;
        let tolerance = nonnegative("tolerance", s.tolerance.unwrap_or(0.0))?;
        let offset = nonnegative("offset", s.offset.unwrap_or(3.0))?;
        let radius = positive("radius", s.radius.unwrap_or(10.0))?;
        if radius > 40.0 {
            return Err(ConfigError::field("radius", format!("{radius} is larger than 40")));
        }

        let cfg = ExperimentConfig {
            command,
            lambda,
            d,
            p,
            n,
            epsilon,
            k,
            trials,
            seed: s.seed,
            tol_fail,
            output: s.output,
            workers,
            dp,
            p_tolerance,
            pc,
            pc_n,
            n_max,
            c,
            tolerance,
            event: s.event.unwrap_or(EventKind::OneArm),
            offset,
            radius,
            case: s.case.unwrap_or_default(),
            queried: s.queried.unwrap_or(false),
            points: s.points,
            plot_data: s.plot_data.unwrap_or(false),
        };
        cfg.check_command()?;
        Ok(cfg)
    }

    fn check_command(&self) -> Result<(), ConfigError> {
        use Command::*;
        if self.command.is_estimator() && self.seed.is_none() {
            return Err(ConfigError::field("seed", format!("`{}` needs an explicit --seed", self.command.name())));
        }
        let one = |field: &str, v: &[f64]| -> Result<(), ConfigError> {
            match v.len() {
                1 => Ok(()),
                0 => Err(ConfigError::field(field, "missing")),
                _ => Err(ConfigError::field(field, "expects a single value")),
            }
        };
        match self.command {
            Theta => {
                if self.p.is_empty() {
                    return Err(ConfigError::field("p", "missing"));
                }
                if self.n.is_empty() {
                    return Err(ConfigError::field("n", "missing"));
                }
                if self.plot_data && self.p.len() > 1 && self.n.len() > 1 {
                    return Err(ConfigError::field("plot_data", "needs a single p or a single n"));
                }
            }
            Pc | Meanfield | Sectors | OsssVerify | Decay | Sharpness => {}
            RussoAudit | FkgAudit | Reveal | Influence | Lemma4Audit => one("p", &self.p)?,
        }
        match self.command {
            Pc => {
                if self.n.len() > 1 {
                    return Err(ConfigError::field("n", "expects a single value"));
                }
                if self.n.first().is_some_and(|&n| n < 2.0) {
                    return Err(ConfigError::field("n", "must be at least 2"));
                }
            }
            Decay => {
                one("p", &self.p)?;
                if self.n.len() == 1 {
                    return Err(ConfigError::field("n", "a decay fit needs at least two values"));
                }
            }
            Meanfield => {
                if self.p.is_empty() {
                    return Err(ConfigError::field("p", "missing grid"));
                }
                if self.n.len() > 1 {
                    return Err(ConfigError::field("n", "expects a single value"));
                }
            }
            Sharpness => {
                if self.p.len() < 3 {
                    return Err(ConfigError::field("p", "the grid needs at least 3 points"));
                }
                let h = self.p[1] - self.p[0];
                if !(h > 0.0) || self.p.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9) {
                    return Err(ConfigError::field("p", "grid spacing must be uniform and increasing"));
                }
            }
            Reveal | Influence | Lemma4Audit | FkgAudit => one("n", &self.n)?,
            RussoAudit if self.event == EventKind::OneArm => one("n", &self.n)?,
            OsssVerify if self.case.is_empty() => return Err(ConfigError::field("case", "missing")),
            RussoAudit | OsssVerify | Theta | Sectors => {}
        }
        if matches!(self.command, RussoAudit | Lemma4Audit) {
            let p = self.p[0];
            if p - self.dp < 0.0 || p + self.dp > 1.0 {
                return Err(ConfigError::field("dp", format!("p +- dp leaves [0, 1] (p = {p}, dp = {})", self.dp)));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn p0(&self) -> f64 {
        self.p[0]
    }

    pub fn n_or(&self, default: f64) -> f64 {
        self.n.first().copied().unwrap_or(default)
    }
}
