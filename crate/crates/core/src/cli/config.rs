//! Line-oriented run configuration.
//!
//! ```text
//! # comments start with '#'
//! run.command = sweep
//! model.omegas = 1
//! matrices.damping = -1, 0, 0, 2
//! matrices.stiffness = 1, 1, 1, 2
//! gains.delta = 0.3
//! gains.Omega = -0.4:0.4:201
//! gains.kappa = -0.3:0.3:201
//! tol.marginal = 1e-8
//! ```
//!
//! A gain is a number, a comma-separated list, or an axis `min:max:count`.
//! Matrices are row-major comma-separated lists.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use super::presets;
use crate::atlas::{Axis, Param};
use crate::linalg::Matrix;
use crate::model::{default_circulatory, Gains, PerturbationSet, RotorModel};
use crate::tolerances::Tolerances;

pub const DEFAULT_STEPS: usize = 4096;

const KEYS: [&str; 12] = [
    "run.command",
    "run.output",
    "run.steps",
    "model.n",
    "model.omegas",
    "model.preset",
    "matrices.damping",
    "matrices.stiffness",
    "matrices.circulatory",
    "gains.delta",
    "gains.kappa",
    "gains.nu",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`{}", suggestion.as_ref().map(|s| format!(", did you mean `{s}`?")).unwrap_or_default())]
    UnknownKey {
        line: usize,
        key: String,
        suggestion: Option<String>,
    },
    #[error("line {line}: `{key}` given twice (first on line {first})")]
    Duplicate { line: usize, first: usize, key: String },
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Spectrum,
    Mesh,
    Report,
    Sweep,
    Boundary,
    Ep,
    Floquet,
    Fig1,
    Fig2,
    Fig3,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Spectrum,
        Command::Mesh,
        Command::Report,
        Command::Sweep,
        Command::Boundary,
        Command::Ep,
        Command::Floquet,
        Command::Fig1,
        Command::Fig2,
        Command::Fig3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Mesh => "mesh",
            Command::Report => "report",
            Command::Sweep => "sweep",
            Command::Boundary => "boundary",
            Command::Ep => "ep",
            Command::Floquet => "floquet",
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
        }
    }

    pub fn is_figure(self) -> bool {
        matches!(self, Command::Fig1 | Command::Fig2 | Command::Fig3)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Command::ALL.iter().map(|c| c.as_str()).collect();
            format!("unknown command `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Value of one scalar gain.
#[derive(Clone, Debug, PartialEq)]
pub enum GainSpec {
    Fixed(f64),
    List(Vec<f64>),
    Range { min: f64, max: f64, count: usize },
}

impl GainSpec {
    pub fn fixed(&self) -> Option<f64> {
        match self {
            GainSpec::Fixed(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_range(&self) -> bool {
        matches!(self, GainSpec::Range { .. })
    }

    /// Every value the spec stands for, in order.
    pub fn values(&self) -> Vec<f64> {
        match self {
            GainSpec::Fixed(v) => vec![*v],
            GainSpec::List(v) => v.clone(),
            GainSpec::Range { min, max, count } => Axis {
                param: Param::Spin,
                min: *min,
                max: *max,
                count: *count,
            }
            .values(),
        }
    }

    fn parse(key: &str, text: &str) -> Result<Self, ConfigError> {
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(invalid(key, format!("axis must be min:max:count, got `{text}`")));
            }
            let min = parse_number(key, parts[0])?;
            let max = parse_number(key, parts[1])?;
            let count = parts[2]
                .parse::<usize>()
                .map_err(|_| invalid(key, format!("sample count `{}` is not a positive integer", parts[2])))?;
            if !(min < max) {
                return Err(invalid(key, format!("axis needs min < max, got {min}:{max}")));
            }
            if count < 2 {
                return Err(invalid(key, format!("axis needs at least 2 samples, got {count}")));
            }
            return Ok(GainSpec::Range { min, max, count });
        }
        let values = parse_list(key, text)?;
        Ok(match values.as_slice() {
            [v] => GainSpec::Fixed(*v),
            _ => GainSpec::List(values),
        })
    }
}

impl fmt::Display for GainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GainSpec::Fixed(v) => write!(f, "{v:?}"),
            GainSpec::List(v) => f.write_str(&join(v)),
            GainSpec::Range { min, max, count } => write!(f, "{min:?}:{max:?}:{count}"),
        }
    }
}

/// A validated run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Output directory; the command line may override it.
    pub output: Option<String>,
    /// Runge–Kutta steps per period for `floquet`.
    pub steps: usize,
    pub omegas: Vec<f64>,
    pub damping: Matrix,
    pub stiffness: Matrix,
    pub circulatory: Matrix,
    pub spin: GainSpec,
    pub kappa: GainSpec,
    pub delta: GainSpec,
    pub nu: GainSpec,
    pub tol: Tolerances,
}

impl RunConfig {
    /// Defaults for a rotor with the given frequencies: `D = I`, `K = 0`,
    /// `N = blockdiag(J, …)`, all gains zero.
    pub fn new(command: Command, omegas: Vec<f64>) -> Self {
        let dim = 2 * omegas.len();
        Self {
            command,
            output: None,
            steps: DEFAULT_STEPS,
            omegas,
            damping: Matrix::identity(dim),
            stiffness: Matrix::zeros(dim),
            circulatory: default_circulatory(dim),
            spin: GainSpec::Fixed(0.0),
            kappa: GainSpec::Fixed(0.0),
            delta: GainSpec::Fixed(0.0),
            nu: GainSpec::Fixed(0.0),
            tol: Tolerances::default(),
        }
    }

    pub fn gain(&self, param: Param) -> &GainSpec {
        match param {
            Param::Spin => &self.spin,
            Param::Kappa => &self.kappa,
            Param::Delta => &self.delta,
            Param::Nu => &self.nu,
        }
    }

    pub fn gain_mut(&mut self, param: Param) -> &mut GainSpec {
        match param {
            Param::Spin => &mut self.spin,
            Param::Kappa => &mut self.kappa,
            Param::Delta => &mut self.delta,
            Param::Nu => &mut self.nu,
        }
    }

    pub fn model(&self) -> RotorModel {
        RotorModel::new(self.omegas.clone()).expect("validated")
    }

    /// Perturbation with every gain at its first value.
    pub fn perturbation(&self) -> PerturbationSet {
        let first = |p: Param| self.gain(p).values()[0];
        let gains = Gains::new(
            first(Param::Delta),
            first(Param::Kappa),
            first(Param::Nu),
            first(Param::Spin),
        );
        PerturbationSet::new(
            self.damping.clone(),
            self.stiffness.clone(),
            self.circulatory.clone(),
            gains,
        )
        .expect("validated")
    }

    /// Axes in the order Ω, κ, δ, ν.
    pub fn axes(&self) -> Vec<Axis> {
        Param::ALL
            .into_iter()
            .filter_map(|p| match *self.gain(p) {
                GainSpec::Range { min, max, count } => Some(Axis {
                    param: p,
                    min,
                    max,
                    count,
                }),
                _ => None,
            })
            .collect()
    }

    /// Checks the invariants that do not depend on how the config was
    /// written down.
    pub fn validate(&self) -> Result<(), ConfigError> {
        RotorModel::new(self.omegas.clone()).map_err(|e| invalid("model.omegas", e.to_string()))?;
        let dim = 2 * self.omegas.len();
        for (key, m) in [
            ("matrices.damping", &self.damping),
            ("matrices.stiffness", &self.stiffness),
            ("matrices.circulatory", &self.circulatory),
        ] {
            if m.dim() != dim {
                return Err(invalid(
                    key,
                    format!(
                        "expected {dim}x{dim} entries for {} doublet(s), got {}x{}",
                        dim / 2,
                        m.dim(),
                        m.dim()
                    ),
                ));
            }
            if !m.is_finite() {
                return Err(invalid(key, "entries must be finite"));
            }
        }
        PerturbationSet::new(
            self.damping.clone(),
            self.stiffness.clone(),
            self.circulatory.clone(),
            Gains::default(),
        )
        .map_err(|e| invalid("matrices", e.to_string()))?;
        for p in Param::ALL {
            let key = gain_key(p);
            match self.gain(p) {
                GainSpec::Fixed(v) if !v.is_finite() => return Err(invalid(&key, "must be finite")),
                GainSpec::List(v) if v.iter().any(|x| !x.is_finite()) => {
                    return Err(invalid(&key, "list entries must be finite"))
                }
                // a single value is written, and read back, as a scalar
                GainSpec::List(v) if v.len() < 2 => return Err(invalid(&key, "a list needs at least two values")),
                GainSpec::Range { min, max, count } => {
                    Axis::new(p, *min, *max, *count).map_err(|e| invalid(&key, e))?;
                }
                _ => {}
            }
        }
        for key in Tolerances::KEYS {
            let v = self.tol.get(key).unwrap();
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(&format!("tol.{key}"), format!("must be positive, got {v}")));
            }
        }
        self.validate_shape()
    }

    fn validate_shape(&self) -> Result<(), ConfigError> {
        use GainSpec::*;
        let cmd = self.command.as_str();
        let kind = |p: Param| match self.gain(p) {
            Fixed(_) => 'f',
            List(_) => 'l',
            Range { .. } => 'r',
        };
        let need = |p: Param, allowed: &str| -> Result<(), ConfigError> {
            if allowed.contains(kind(p)) {
                return Ok(());
            }
            let what = match allowed {
                "f" => "a single value",
                "r" => "an axis min:max:count",
                "fl" => "a value or a list",
                "fr" => "a value or an axis",
                _ => "a value, list or axis",
            };
            Err(invalid(&gain_key(p), format!("`{cmd}` needs {what}")))
        };
        let single_doublet = || {
            if self.omegas.len() != 1 {
                return Err(invalid(
                    "model.omegas",
                    format!("`{cmd}` is defined for one doublet only"),
                ));
            }
            Ok(())
        };
        match self.command {
            Command::Spectrum | Command::Report | Command::Floquet => {
                for p in Param::ALL {
                    need(p, "f")?;
                }
            }
            Command::Mesh => need(Param::Spin, "flr")?,
            Command::Sweep | Command::Boundary => {
                let axes = self.axes();
                if axes.len() != 2 {
                    return Err(invalid(
                        "gains",
                        format!("`{cmd}` needs exactly two axes, got {}", axes.len()),
                    ));
                }
                for p in Param::ALL {
                    need(p, "fr")?;
                }
            }
            Command::Ep => {
                need(Param::Spin, "r")?;
                need(Param::Kappa, "r")?;
                need(Param::Delta, "f")?;
                need(Param::Nu, "f")?;
            }
            Command::Fig1 => {
                single_doublet()?;
                need(Param::Spin, "r")?;
                need(Param::Delta, "fl")?;
                need(Param::Kappa, "f")?;
                need(Param::Nu, "f")?;
            }
            Command::Fig2 => {
                single_doublet()?;
                need(Param::Spin, "r")?;
                need(Param::Kappa, "r")?;
                need(Param::Delta, "f")?;
                need(Param::Nu, "f")?;
            }
            Command::Fig3 => {
                single_doublet()?;
                need(Param::Spin, "r")?;
                need(Param::Kappa, "r")?;
                need(Param::Delta, "fl")?;
                need(Param::Nu, "f")?;
            }
        }
        if self.command == Command::Floquet && self.steps < crate::floquet::MIN_STEPS {
            return Err(invalid(
                "run.steps",
                format!("need at least {} steps", crate::floquet::MIN_STEPS),
            ));
        }
        Ok(())
    }

    /// Applies a `tol.KEY=VAL` style override (the `tol.` prefix is optional).
    pub fn override_tolerance(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| invalid(assignment, "expected KEY=VALUE"))?;
        let key = key.trim();
        let name = key.strip_prefix("tol.").unwrap_or(key);
        let v = parse_number(key, value.trim())?;
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(key, format!("must be positive, got {v}")));
        }
        if !self.tol.set(name, v) {
            let known: Vec<String> = Tolerances::KEYS.iter().map(|k| k.to_string()).collect();
            let hint = suggest(name, known.iter().map(String::as_str))
                .map(|s| format!(", did you mean `{s}`?"))
                .unwrap_or_default();
            return Err(invalid(key, format!("unknown tolerance{hint}")));
        }
        Ok(())
    }

    /// Serializes every field; `parse_config(&c.emit()) == Ok(c)`.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("run.command", self.command.to_string());
        if let Some(out) = &self.output {
            line("run.output", out.clone());
        }
        line("run.steps", self.steps.to_string());
        line("model.omegas", join(&self.omegas));
        line("matrices.damping", join(self.damping.as_slice()));
        line("matrices.stiffness", join(self.stiffness.as_slice()));
        line("matrices.circulatory", join(self.circulatory.as_slice()));
        for p in Param::ALL {
            line(&gain_key(p), self.gain(p).to_string());
        }
        for key in Tolerances::KEYS {
            line(&format!("tol.{key}"), format!("{:?}", self.tol.get(key).unwrap()));
        }
        s
    }
}

fn gain_key(p: Param) -> String {
    format!("gains.{}", p.name())
}

fn known_keys() -> Vec<String> {
    let mut keys: Vec<String> = KEYS.iter().map(|k| k.to_string()).collect();
    keys.push(gain_key(Param::Spin));
    keys.extend(Tolerances::KEYS.iter().map(|k| format!("tol.{k}")));
    keys
}

fn suggest<'a>(key: &str, candidates: impl Iterator<Item = &'a str>) -> Option<String> {
    candidates
        .map(|c| {
            let tail = c.rsplit('.').next().unwrap_or(c);
            let score = strsim::jaro_winkler(key, c).max(strsim::jaro_winkler(key, tail));
            (score, c)
        })
        .filter(|(score, _)| *score > 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.to_string())
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

fn parse_number(key: &str, text: &str) -> Result<f64, ConfigError> {
    let v = text
        .parse::<f64>()
        .map_err(|_| invalid(key, format!("`{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(invalid(key, format!("`{text}` is not finite")));
    }
    Ok(v)
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(',').map(|t| parse_number(key, t.trim())).collect()
}

struct Entry {
    line: usize,
    value: String,
}

/// Parses and validates a configuration. Unset fields take their defaults;
/// figure commands start from the figure's parameters instead, and explicit
/// keys override them.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let known = known_keys();
    let mut entries: Vec<(String, Entry)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `section.key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        if !known.iter().any(|k| k == key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
                suggestion: suggest(key, known.iter().map(String::as_str)),
            });
        }
        if let Some((_, first)) = entries.iter().find(|(k, _)| k == key) {
            return Err(ConfigError::Duplicate {
                line,
                first: first.line,
                key: key.to_string(),
            });
        }
        entries.push((
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        ));
    }
    let get = |key: &str| entries.iter().find(|(k, _)| k == key).map(|(_, e)| e.value.as_str());

    let command: Command = get("run.command")
        .ok_or_else(|| invalid("run.command", "missing; every config names exactly one command"))?
        .parse()
        .map_err(|e: String| invalid("run.command", e))?;

    let n = get("model.n")
        .map(|t| {
            t.parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| invalid("model.n", format!("`{t}` is not a positive integer")))
        })
        .transpose()?;
    let omegas = match (get("model.omegas"), get("model.preset")) {
        (Some(_), Some(_)) => {
            return Err(invalid(
                "model.preset",
                "give either model.omegas or model.preset, not both",
            ))
        }
        (Some(t), None) => Some(parse_list("model.omegas", t)?),
        (None, Some("string")) => {
            let n = n.ok_or_else(|| invalid("model.n", "the string preset needs the number of doublets"))?;
            Some(
                RotorModel::string(n)
                    .map_err(|e| invalid("model.n", e.to_string()))?
                    .omegas()
                    .to_vec(),
            )
        }
        (None, Some(other)) => {
            return Err(invalid(
                "model.preset",
                format!("unknown preset `{other}` (expected `string`)"),
            ))
        }
        (None, None) => None,
    };
    if let (Some(n), Some(w)) = (n, &omegas) {
        if w.len() != n {
            return Err(invalid("model.n", format!("{n} doublets but {} frequencies", w.len())));
        }
    }

    let mut config = if command.is_figure() {
        let mut c = presets::figure_config(command);
        if let Some(w) = omegas {
            if w != c.omegas {
                let dim = 2 * w.len();
                c.damping = Matrix::identity(dim);
                c.stiffness = Matrix::zeros(dim);
                c.circulatory = default_circulatory(dim);
            }
            c.omegas = w;
        }
        c
    } else {
        let w = omegas.ok_or_else(|| invalid("model.omegas", "missing; give model.omegas or model.preset"))?;
        RunConfig::new(command, w)
    };

    if let Some(out) = get("run.output") {
        config.output = Some(out.to_string());
    }
    if let Some(t) = get("run.steps") {
        config.steps = t
            .parse()
            .map_err(|_| invalid("run.steps", format!("`{t}` is not a positive integer")))?;
    }
    for (key, slot) in [
        ("matrices.damping", &mut config.damping),
        ("matrices.stiffness", &mut config.stiffness),
        ("matrices.circulatory", &mut config.circulatory),
    ] {
        if let Some(t) = get(key) {
            let values = parse_list(key, t)?;
            *slot = Matrix::from_row_major(&values)
                .ok_or_else(|| invalid(key, format!("{} entries do not form a square matrix", values.len())))?;
        }
    }
    for p in Param::ALL {
        let key = gain_key(p);
        if let Some(t) = get(&key) {
            *config.gain_mut(p) = GainSpec::parse(&key, t)?;
        }
    }
    for name in Tolerances::KEYS {
        let key = format!("tol.{name}");
        if let Some(t) = get(&key) {
            config.override_tolerance(&format!("{key}={t}"))?;
        }
    }
    config.validate()?;
    Ok(config)
}
