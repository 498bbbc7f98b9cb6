//! Experiment configuration files.
//!
//! The format is flat `key = value` text grouped under `[section]` headers;
//! `#` starts a comment line. Keys before the first header belong to
//! `[experiment]`.
//!
//! ```text
//! [experiment]
//! kind = kld_scan
//! seed = 42
//! out = results
//!
//! [model]
//! spec = lognormal(0,1)
//!
//! [data]
//! n_train = 2000
//!
//! [scan]
//! meff_max = 4.0
//! k = 1, 4
//! iterations = 16
//! transform = log
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use ampbound_core::amplifier::{gain_for_m_eff, max_gain};
use ampbound_core::{DistributionModel, Transform};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field { field: String, line: usize, message: String },
    #[error("missing required field `{0}`")]
    Missing(String),
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    CostScan,
    KldScan,
    PreampScan,
    FitTable,
    TableA1,
    Audit,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CostScan => "cost_scan",
            Self::KldScan => "kld_scan",
            Self::PreampScan => "preamp_scan",
            Self::FitTable => "fit_table",
            Self::TableA1 => "table_a1",
            Self::Audit => "audit",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "cost_scan" => Self::CostScan,
            "kld_scan" => Self::KldScan,
            "preamp_scan" => Self::PreampScan,
            "fit_table" => Self::FitTable,
            "table_a1" => Self::TableA1,
            "audit" => Self::Audit,
            _ => {
                return Err(format!(
                    "unknown experiment `{s}`; expected cost_scan, kld_scan, preamp_scan, fit_table, table_a1 or audit"
                ))
            }
        })
    }
}

/// Gains to visit in an amplification scan.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Every integer gain up to the rounded gain at `M_eff = 3`, then `M_eff` 3.1, 3.2, ... up
    /// to `meff_max`.
    Default { meff_max: f64 },
    Gains(Vec<usize>),
    /// Target `M_eff` values, each rounded to the nearest integer gain.
    MEff(Vec<f64>),
}

impl GridSpec {
    /// Distinct ascending gains for a training sample of size `n`.
    pub fn gains(&self, n: usize) -> Result<Vec<usize>, String> {
        let mut gains = match self {
            Self::Default { meff_max } => {
                let top = max_gain(n, 3.0, 2.0).map_err(|e| e.to_string())?;
                let mut g: Vec<usize> = (1..=top).collect();
                let steps = ((meff_max - 3.0) / 0.1 + 1e-9).floor().max(0.0) as usize;
                for i in 1..=steps {
                    let target = 3.0 + i as f64 / 10.0;
                    g.push(gain_for_m_eff(n, target).map_err(|e| e.to_string())?);
                }
                g
            }
            Self::Gains(g) => g.clone(),
            Self::MEff(m) => m
                .iter()
                .map(|&t| gain_for_m_eff(n, t).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?,
        };
        if gains.contains(&0) {
            return Err("gains must be >= 1".into());
        }
        gains.sort_unstable();
        gains.dedup();
        Ok(gains)
    }

    fn canonical(&self) -> String {
        match self {
            Self::Default { meff_max } => format!("default:{meff_max}"),
            Self::Gains(g) => format!("gains:{}", join(g)),
            Self::MEff(m) => format!("meff:{}", join(m)),
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: DistributionModel,
    pub n_train: usize,
    pub grid: GridSpec,
    pub k: Vec<usize>,
    pub n_iterations: usize,
    pub seed: u64,
    pub transform: Option<Transform>,
    /// Gain applied to the raw training sample before a pre-amplified scan.
    pub preamp_gain: usize,
    /// Gain of a fit-table run.
    pub gain: usize,
    /// Target bin resolution of a shape-factor run.
    pub m: f64,
    /// Independent repetitions (ensemble size).
    pub seeds: usize,
    pub out_dir: PathBuf,
    pub audit_train: Option<String>,
    pub audit_generated: Option<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            model: DistributionModel::standard_normal(),
            n_train: 2000,
            grid: GridSpec::Default { meff_max: 4.0 },
            k: vec![1],
            n_iterations: 16,
            seed: 1,
            transform: None,
            preamp_gain: 4,
            gain: 45,
            m: 2.5,
            seeds: 1,
            out_dir: PathBuf::from("."),
            audit_train: None,
            audit_generated: None,
        }
    }

    /// Every effective setting, one `key=value` per line in a fixed order.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment.kind={}", self.experiment.as_str());
        let _ = writeln!(s, "model.spec={}", self.model);
        let _ = writeln!(s, "data.n_train={}", self.n_train);
        let _ = writeln!(s, "data.preamp_gain={}", self.preamp_gain);
        let _ = writeln!(s, "data.gain={}", self.gain);
        let _ = writeln!(s, "data.seeds={}", self.seeds);
        let _ = writeln!(s, "scan.m={}", self.m);
        let _ = writeln!(s, "scan.grid={}", self.grid.canonical());
        let _ = writeln!(s, "scan.k={}", join(&self.k));
        let _ = writeln!(s, "scan.iterations={}", self.n_iterations);
        let transform = self.transform.map(|t| t.to_string()).unwrap_or_else(|| "none".into());
        let _ = writeln!(s, "scan.transform={transform}");
        let _ = writeln!(s, "audit.train={}", self.audit_train.as_deref().unwrap_or(""));
        let _ = writeln!(s, "audit.generated={}", self.audit_generated.as_deref().unwrap_or(""));
        let _ = writeln!(s, "experiment.seed={}", self.seed);
        s
    }

    /// First 16 hex digits of the SHA-256 of [`ExperimentConfig::canonical`]
    /// with the seed line removed (the seed is stamped separately).
    pub fn hash(&self) -> String {
        let canonical: String = self
            .canonical()
            .lines()
            .filter(|l| !l.starts_with("experiment.seed="))
            .map(|l| format!("{l}\n"))
            .collect();
        short_hash(&canonical)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, message: String| ConfigError::Invalid {
            field: field.into(),
            message,
        };
        if self.n_train < 2 {
            return Err(invalid("data.n_train", "must be >= 2".into()));
        }
        if self.k.is_empty() || self.k.contains(&0) {
            return Err(invalid("scan.k", "needs one or more values >= 1".into()));
        }
        if self.n_iterations < 1 {
            return Err(invalid("scan.iterations", "must be >= 1".into()));
        }
        if self.preamp_gain < 1 {
            return Err(invalid("data.preamp_gain", "must be >= 1".into()));
        }
        if self.gain < 1 {
            return Err(invalid("data.gain", "must be >= 1".into()));
        }
        if !(self.m > 1.0 && self.m.is_finite()) {
            return Err(invalid("scan.m", format!("{} must be > 1", self.m)));
        }
        if self.seeds < 1 {
            return Err(invalid("data.seeds", "must be >= 1".into()));
        }
        if let GridSpec::Default { meff_max } = self.grid {
            if !(2.0..=6.0).contains(&meff_max) {
                return Err(invalid("scan.meff_max", format!("{meff_max} is outside [2, 6]")));
            }
        }
        if matches!(self.experiment, ExperimentKind::KldScan | ExperimentKind::PreampScan) {
            self.grid.gains(self.n_train).map_err(|m| invalid("scan", m))?;
        }
        if self.experiment == ExperimentKind::Audit && (self.audit_train.is_none() || self.audit_generated.is_none()) {
            return Err(ConfigError::Missing("audit.train and audit.generated".into()));
        }
        Ok(())
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn short_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Raw `section.key -> (value, line)` map.
fn parse_entries(text: &str) -> Result<BTreeMap<String, (String, usize)>, ConfigError> {
    let mut section = "experiment".to_string();
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(rest) = l.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("unterminated section header `{l}`"),
            })?;
            let name = name.trim();
            if !["experiment", "model", "data", "scan", "audit"].contains(&name) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("unknown section `[{name}]`"),
                });
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = l.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, found `{l}`"),
        })?;
        let key = format!("{section}.{}", key.trim());
        if entries.insert(key.clone(), (value.trim().to_string(), line)).is_some() {
            return Err(ConfigError::Field {
                field: key,
                line,
                message: "set more than once".into(),
            });
        }
    }
    Ok(entries)
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", x.trim())))
        .collect()
}

fn scalar<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let entries = parse_entries(text)?;
        let (kind, kind_line) = entries
            .get("experiment.kind")
            .ok_or_else(|| ConfigError::Missing("experiment.kind".into()))?;
        let kind = kind.parse().map_err(|message| ConfigError::Field {
            field: "experiment.kind".into(),
            line: *kind_line,
            message,
        })?;
        let mut cfg = Self::new(kind);
        if kind == ExperimentKind::FitTable {
            cfg.model = DistributionModel::standard_lognormal();
        }
        let mut meff_max = None;
        for (key, (value, line)) in &entries {
            let field_err = |message: String| ConfigError::Field {
                field: key.clone(),
                line: *line,
                message,
            };
            let v = value.as_str();
            match key.as_str() {
                "experiment.kind" => {}
                "experiment.seed" => cfg.seed = scalar(v).map_err(field_err)?,
                "experiment.out" => cfg.out_dir = PathBuf::from(v),
                "model.spec" => cfg.model = v.parse().map_err(|e: ampbound_core::Error| field_err(e.to_string()))?,
                "data.n_train" => cfg.n_train = scalar(v).map_err(field_err)?,
                "data.preamp_gain" => cfg.preamp_gain = scalar(v).map_err(field_err)?,
                "data.gain" => cfg.gain = scalar(v).map_err(field_err)?,
                "scan.m" => cfg.m = scalar(v).map_err(field_err)?,
                "data.seeds" => cfg.seeds = scalar(v).map_err(field_err)?,
                "scan.meff_max" => meff_max = Some(scalar::<f64>(v).map_err(field_err)?),
                "scan.gains" => cfg.grid = GridSpec::Gains(list(v).map_err(field_err)?),
                "scan.meff" => cfg.grid = GridSpec::MEff(list(v).map_err(field_err)?),
                "scan.k" => cfg.k = list(v).map_err(field_err)?,
                "scan.iterations" => cfg.n_iterations = scalar(v).map_err(field_err)?,
                "scan.transform" => {
                    cfg.transform = match v {
                        "none" => None,
                        t => Some(t.parse().map_err(|e: ampbound_core::Error| field_err(e.to_string()))?),
                    }
                }
                "audit.train" => cfg.audit_train = Some(v.to_string()),
                "audit.generated" => cfg.audit_generated = Some(v.to_string()),
                _ => return Err(field_err("unknown field".into())),
            }
        }
        if let Some(m) = meff_max {
            if !matches!(cfg.grid, GridSpec::Default { .. }) {
                let line = entries["scan.meff_max"].1;
                return Err(ConfigError::Field {
                    field: "scan.meff_max".into(),
                    line,
                    message: "cannot be combined with scan.gains or scan.meff".into(),
                });
            }
            cfg.grid = GridSpec::Default { meff_max: m };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
