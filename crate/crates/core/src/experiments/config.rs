//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # reference working point
//! omega_h = 5
//! omega_c = 1
//! omega_w = 4
//! T_h = 2
//! hamiltonian = xxx, resonant
//! grid.g.min = 0.001
//! grid.g.count = 60
//! grid.g.scale = log
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key not listed in
//! [`KEYS`] or of the form `grid.<axis>.<field>` is rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::baths::{default_delta_t, BathParams};
use crate::dynamics::ModelKind;
use crate::model::{CouplingKind, SystemParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("invalid value {value:?} for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },

    #[error("cannot read configuration: {0}")]
    Io(String),
}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Scalar keys accepted besides `grid.<axis>.{min,max,count,scale}`.
pub const KEYS: [&str; 14] = [
    "omega_h",
    "omega_c",
    "omega_w",
    "g",
    "chi",
    "T_h",
    "T_c",
    "T_w",
    "delta_t",
    "hamiltonian",
    "model",
    "seed",
    "samples",
    "panels",
];

/// Axes that may carry a `grid.<axis>` block.
pub const AXES: [&str; 5] = ["g", "chi", "kappa", "T_h", "T_w"];

const GRID_FIELDS: [&str; 4] = ["min", "max", "count", "scale"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl GridSpec {
    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, scale: Scale::Linear }
    }

    pub fn log(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, scale: Scale::Log }
    }

    /// Grid points, endpoints included exactly.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.count - 1 {
                    return self.max;
                }
                let f = i as f64 / n;
                match self.scale {
                    Scale::Linear => self.min + f * (self.max - self.min),
                    Scale::Log => (self.min.ln() + f * (self.max / self.min).ln()).exp(),
                }
            })
            .collect()
    }

    pub fn validate(&self, axis: &str) -> ConfigResult<()> {
        let bad = |field: &str, value: String, reason: &str| ConfigError::InvalidValue {
            key: format!("grid.{axis}.{field}"),
            value,
            reason: reason.into(),
        };
        if self.count < 2 {
            return Err(bad("count", self.count.to_string(), "swept axes need at least 2 points"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(bad("max", self.max.to_string(), "bounds must be finite with min <= max"));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(bad("min", self.min.to_string(), "log scale requires positive bounds"));
        }
        Ok(())
    }
}

/// Fields of a `grid.<axis>` block that were set explicitly.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridOverride {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
    pub scale: Option<Scale>,
}

impl GridOverride {
    pub fn over(&self, base: GridSpec) -> GridSpec {
        GridSpec {
            min: self.min.unwrap_or(base.min),
            max: self.max.unwrap_or(base.max),
            count: self.count.unwrap_or(base.count),
            scale: self.scale.unwrap_or(base.scale),
        }
    }
}

/// Parameters of one study run.
///
/// `delta_t = None` selects the default coarse-graining time `1/min ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub omega_h: f64,
    pub omega_c: f64,
    pub omega_w: f64,
    pub g: f64,
    pub chi: f64,
    pub t_hot: f64,
    pub t_cold: f64,
    pub t_work: f64,
    pub delta_t: Option<f64>,
    pub hamiltonians: Vec<CouplingKind>,
    pub models: Vec<ModelKind>,
    pub seed: u64,
    /// Random-optimisation samples per panel.
    pub samples: usize,
    /// Random-optimisation panel ratios `ω_w/ω_c`.
    pub panels: Vec<f64>,
    pub grids: BTreeMap<String, GridOverride>,
}

impl Default for ExperimentConfig {
    /// Reference point: `ω = (5, 1, 4)`, `T = (2, 1, 8)`, `χ = 10⁻²`, `g = 0.25`.
    fn default() -> Self {
        Self {
            omega_h: 5.0,
            omega_c: 1.0,
            omega_w: 4.0,
            g: 0.25,
            chi: 1e-2,
            t_hot: 2.0,
            t_cold: 1.0,
            t_work: 8.0,
            delta_t: None,
            hamiltonians: vec![CouplingKind::Xxx, CouplingKind::Resonant],
            models: ModelKind::ALL.to_vec(),
            seed: 0,
            samples: 500,
            panels: vec![1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
            grids: BTreeMap::new(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> ConfigResult<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> ConfigResult<T>) -> ConfigResult<Vec<T>> {
    let items =
        value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect::<ConfigResult<Vec<_>>>()?;
    if items.is_empty() {
        return Err(ConfigError::InvalidValue { key: key.into(), value: value.into(), reason: "empty list".into() });
    }
    Ok(items)
}

impl ExperimentConfig {
    /// Parses a configuration on top of [`ExperimentConfig::default`].
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut cfg = Self::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies the assignments in `text` over the current values.
    pub fn apply(&mut self, text: &str) -> ConfigResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
            self.set(key.trim(), value.trim())?;
        }
        self.validate()
    }

    /// Sets a single key.
    pub fn set(&mut self, key: &str, value: &str) -> ConfigResult<()> {
        match key {
            "omega_h" => self.omega_h = parse_num(key, value)?,
            "omega_c" => self.omega_c = parse_num(key, value)?,
            "omega_w" => self.omega_w = parse_num(key, value)?,
            "g" => self.g = parse_num(key, value)?,
            "chi" => self.chi = parse_num(key, value)?,
            "T_h" => self.t_hot = parse_num(key, value)?,
            "T_c" => self.t_cold = parse_num(key, value)?,
            "T_w" => self.t_work = parse_num(key, value)?,
            "delta_t" => {
                self.delta_t = if value == "auto" { None } else { Some(parse_num(key, value)?) };
            }
            "hamiltonian" => {
                self.hamiltonians = parse_list(key, value, |s| {
                    CouplingKind::parse(s).ok_or_else(|| ConfigError::InvalidValue {
                        key: key.into(),
                        value: s.into(),
                        reason: "expected xxx or resonant".into(),
                    })
                })?;
            }
            "model" => {
                self.models = parse_list(key, value, |s| {
                    ModelKind::parse(s).ok_or_else(|| ConfigError::InvalidValue {
                        key: key.into(),
                        value: s.into(),
                        reason: "expected coarse, local or global".into(),
                    })
                })?;
            }
            "seed" => self.seed = parse_num(key, value)?,
            "samples" => self.samples = parse_num(key, value)?,
            "panels" => self.panels = parse_list(key, value, |s| parse_num(key, s))?,
            _ => return self.set_grid(key, value),
        }
        Ok(())
    }

    fn set_grid(&mut self, key: &str, value: &str) -> ConfigResult<()> {
        let unknown = || ConfigError::UnknownKey(key.to_string());
        let rest = key.strip_prefix("grid.").ok_or_else(unknown)?;
        let (axis, field) = rest.rsplit_once('.').ok_or_else(unknown)?;
        if !AXES.contains(&axis) || !GRID_FIELDS.contains(&field) {
            return Err(unknown());
        }
        let grid = self.grids.entry(axis.to_string()).or_default();
        match field {
            "min" => grid.min = Some(parse_num(key, value)?),
            "max" => grid.max = Some(parse_num(key, value)?),
            "count" => grid.count = Some(parse_num(key, value)?),
            _ => {
                grid.scale = Some(match value {
                    "linear" => Scale::Linear,
                    "log" => Scale::Log,
                    _ => {
                        return Err(ConfigError::InvalidValue {
                            key: key.into(),
                            value: value.into(),
                            reason: "expected linear or log".into(),
                        })
                    }
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> ConfigResult<()> {
        let positive = [
            ("omega_h", self.omega_h),
            ("omega_c", self.omega_c),
            ("omega_w", self.omega_w),
            ("chi", self.chi),
            ("T_h", self.t_hot),
            ("T_c", self.t_cold),
            ("T_w", self.t_work),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::InvalidValue {
                    key: key.into(),
                    value: v.to_string(),
                    reason: "must be positive".into(),
                });
            }
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(ConfigError::InvalidValue {
                key: "g".into(),
                value: self.g.to_string(),
                reason: "must be non-negative".into(),
            });
        }
        if let Some(dt) = self.delta_t {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(ConfigError::InvalidValue {
                    key: "delta_t".into(),
                    value: dt.to_string(),
                    reason: "must be positive".into(),
                });
            }
        }
        if let Some(&r) = self.panels.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(ConfigError::InvalidValue {
                key: "panels".into(),
                value: r.to_string(),
                reason: "ratios must be positive".into(),
            });
        }
        Ok(())
    }

    /// Canonical text form; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("omega_h", self.omega_h.to_string());
        kv("omega_c", self.omega_c.to_string());
        kv("omega_w", self.omega_w.to_string());
        kv("g", self.g.to_string());
        kv("chi", self.chi.to_string());
        kv("T_h", self.t_hot.to_string());
        kv("T_c", self.t_cold.to_string());
        kv("T_w", self.t_work.to_string());
        kv("delta_t", self.delta_t.map_or("auto".into(), |d| d.to_string()));
        kv("hamiltonian", self.hamiltonians.iter().map(|h| h.name()).collect::<Vec<_>>().join(", "));
        kv("model", self.models.iter().map(|m| m.name()).collect::<Vec<_>>().join(", "));
        kv("seed", self.seed.to_string());
        kv("samples", self.samples.to_string());
        kv("panels", self.panels.iter().map(f64::to_string).collect::<Vec<_>>().join(", "));
        for (axis, g) in &self.grids {
            if let Some(v) = g.min {
                kv(&format!("grid.{axis}.min"), v.to_string());
            }
            if let Some(v) = g.max {
                kv(&format!("grid.{axis}.max"), v.to_string());
            }
            if let Some(v) = g.count {
                kv(&format!("grid.{axis}.count"), v.to_string());
            }
            if let Some(v) = g.scale {
                kv(&format!("grid.{axis}.scale"), v.name().into());
            }
        }
        s
    }

    /// Grid for `axis`: the configured fields over `fallback`.
    pub fn grid(&self, axis: &str, fallback: GridSpec) -> ConfigResult<GridSpec> {
        let spec = self.grids.get(axis).map_or(fallback, |o| o.over(fallback));
        spec.validate(axis)?;
        Ok(spec)
    }

    /// System parameters at coupling `g` and Hamiltonian `coupling`.
    pub fn system(&self, g: f64, coupling: CouplingKind) -> crate::Result<SystemParams> {
        SystemParams::new(self.omega_h, self.omega_c, self.omega_w, g, coupling)
    }

    /// Bath parameters for `p` with the configured `Δt`.
    pub fn baths(&self, p: &SystemParams, t_hot: f64, t_cold: f64, t_work: f64, chi: f64) -> crate::Result<BathParams> {
        let mut b = BathParams::new(p, t_hot, t_cold, t_work, chi)?;
        b.delta_t = self.delta_t.unwrap_or_else(|| default_delta_t(p));
        b.validate()?;
        Ok(b)
    }
}
