//! JSON run configuration and command-line overrides.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use noon_passage::fidelity::{linspace, Compounding, Overlay, OverlayParam, SweepVariable};
use noon_passage::protocol::RoundMode;
use noon_passage::SystemParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// `start:stop:steps`, expanded to `steps` evenly spaced values inclusive of
/// both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, steps: usize) -> Self {
        Grid { start, stop, steps }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.steps)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("grid {s:?} is not of the form start:stop:steps"));
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("grid bound {v:?} is not a finite number"))
        };
        let steps: usize = n
            .trim()
            .parse()
            .map_err(|_| format!("grid steps {n:?} is not a positive integer"))?;
        if steps == 0 {
            return Err("grid needs at least one step".into());
        }
        Ok(Grid::new(num(a)?, num(b)?, steps))
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.steps)
    }
}

/// `--overlay name=v1,v2,...`, or `none` to draw a single curve.
pub fn parse_overlay(s: &str) -> Result<Overlay, String> {
    if s == "none" {
        return Ok(Overlay { param: OverlayParam::Omega0, values: Vec::new() });
    }
    let (name, list) = s
        .split_once('=')
        .ok_or_else(|| format!("overlay {s:?} is not of the form name=v1,v2,..."))?;
    let param: OverlayParam = name.trim().parse().map_err(|e| format!("{e}"))?;
    let values = list
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("overlay value {v:?} is not a finite number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Overlay { param, values })
}

/// Everything a command may read. Absent fields fall back to the default
/// parameter set and the per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: SystemParams,
    pub dt: Option<f64>,
    pub sample_every: Option<usize>,
    pub seed: Option<u64>,
    pub n: Option<u32>,
    pub grid: Option<Grid>,
    pub decay: bool,
    pub stark: bool,
    pub mode: Option<RoundMode>,
    pub variable: Option<SweepVariable>,
    pub overlay: Option<Overlay>,
    pub compounding: Option<Compounding>,
    /// Keys given explicitly, in the file or as flags.
    #[serde(skip)]
    pub explicit: BTreeSet<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let Value::Object(map) = &value else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        let known = known_keys();
        if let Some(bad) = map.keys().find(|k| !known.contains(k.as_str())) {
            return Err(CliError::Config(format!("config: unknown field {bad:?}")));
        }
        let mut cfg: RunConfig = serde_json::from_value(value.clone())
            .map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.explicit = map.keys().cloned().collect();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(noon_passage::dynamics::DEFAULT_DT)
    }

    /// Grid from config or flags, else `default`.
    pub fn grid_or(&self, default: Grid) -> Vec<f64> {
        self.grid.unwrap_or(default).values()
    }
}

fn known_keys() -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    for v in [
        serde_json::to_value(SystemParams::default()),
        serde_json::to_value(RunConfig::default()),
    ] {
        if let Ok(Value::Object(m)) = v {
            keys.extend(m.keys().cloned());
        }
    }
    keys
}

/// Flags shared by every command. Each one overrides its config-file value.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file; flags take precedence over its fields.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Integrator step in units of 1/g.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Measurement seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "gamma-f", value_name = "GAMMA_F")]
    pub gamma_f: Option<f64>,
    /// Sets both fiber couplings.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Number of rounds.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, value_name = "START:STOP:STEPS")]
    pub grid: Option<Grid>,
    /// Include fiber and cavity loss.
    #[arg(long)]
    pub decay: bool,
    /// Include the Stark-shift diagonal.
    #[arg(long)]
    pub stark: bool,
    /// analytic | simulated
    #[arg(long)]
    pub mode: Option<RoundMode>,
    /// gamma_f | eta | n
    #[arg(long)]
    pub variable: Option<SweepVariable>,
    /// `name=v1,v2,...` with name in omega0, gamma_f, eta; or `none`.
    #[arg(long, value_parser = parse_overlay)]
    pub overlay: Option<Overlay>,
    /// product | linear
    #[arg(long)]
    pub compounding: Option<Compounding>,
}

impl CommonArgs {
    /// Loads `--config` if given and applies the flags on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut set = |key: &str| {
            cfg.explicit.insert(key.to_string());
        };
        if self.gamma_f.is_some() {
            set("gamma_f");
        }
        if self.eta.is_some() {
            set("eta_a");
            set("eta_b");
        }
        if self.omega0.is_some() {
            set("omega0");
        }
        if self.overlay.is_some() {
            set("overlay");
        }
        if let Some(v) = self.gamma_f {
            cfg.params.gamma_f = v;
        }
        if let Some(v) = self.eta {
            cfg.params = cfg.params.with_eta(v);
        }
        if let Some(v) = self.omega0 {
            cfg.params.omega0 = v;
        }
        cfg.dt = self.dt.or(cfg.dt);
        cfg.seed = self.seed.or(cfg.seed);
        cfg.n = self.n.or(cfg.n);
        cfg.grid = self.grid.or(cfg.grid);
        cfg.decay |= self.decay;
        cfg.stark |= self.stark;
        cfg.mode = self.mode.or(cfg.mode);
        cfg.variable = self.variable.or(cfg.variable);
        cfg.overlay = self.overlay.clone().or(cfg.overlay);
        cfg.compounding = self.compounding.or(cfg.compounding);

        cfg.params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(dt) = cfg.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::Config(format!("dt must be > 0 (got {dt})")));
            }
        }
        if cfg.sample_every == Some(0) {
            return Err(CliError::Config("sample_every must be >= 1".into()));
        }
        Ok(cfg)
    }
}
