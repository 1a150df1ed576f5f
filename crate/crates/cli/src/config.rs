//! Sectioned `key = value` run configuration.
//!
//! The file is the reproducibility artifact: everything an experiment needs
//! lives here, flags only select the subcommand and output directory.

use std::fmt;
use std::sync::Arc;
use thermo1d::{BoundaryKind, DataRole, Field, Grid, InitialData, ProfileKind};

#[derive(Debug)]
pub enum ConfigError {
    Parse { line: usize, reason: String },
    UnknownKey { line: usize, name: String },
    Constraint { field: String, value: String, constraint: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, reason } => write!(f, "line {line}: {reason}"),
            ConfigError::UnknownKey { line, name } => {
                write!(f, "line {line}: unknown key `{name}`")
            }
            ConfigError::Constraint { field, value, constraint } => {
                write!(f, "{field} = {value} violates: {constraint}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Initial-profile selector as written in the config file.
#[derive(Debug, Clone, PartialEq)]
pub enum KindSpec {
    SinePacket,
    Bump,
    Zero,
    Constant(f64),
}

impl KindSpec {
    fn parse(s: &str, line: usize) -> Result<KindSpec, ConfigError> {
        match s {
            "sine_packet" => Ok(KindSpec::SinePacket),
            "bump" => Ok(KindSpec::Bump),
            "zero" => Ok(KindSpec::Zero),
            other => {
                if let Some(v) = other.strip_prefix("constant:") {
                    let v = v.parse::<f64>().map_err(|_| ConfigError::Parse {
                        line,
                        reason: format!("bad constant value `{v}`"),
                    })?;
                    Ok(KindSpec::Constant(v))
                } else {
                    Err(ConfigError::Parse {
                        line,
                        reason: format!(
                            "unknown profile kind `{other}` (expected sine_packet, bump, zero, or constant:<v>)"
                        ),
                    })
                }
            }
        }
    }

    fn to_profile(&self) -> ProfileKind {
        match self {
            KindSpec::SinePacket => ProfileKind::SinePacket,
            KindSpec::Bump => ProfileKind::Bump,
            KindSpec::Zero => ProfileKind::Constant(0.0),
            KindSpec::Constant(v) => ProfileKind::Constant(*v),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    // [grid]
    pub a: f64,
    pub b: f64,
    pub n_cells: usize,
    // [physics]
    pub mu: f64,
    pub nu: f64,
    // [time]
    pub dt: f64,
    pub t_end: f64,
    pub picard_tol: f64,
    pub picard_max: u32,
    // [data]
    pub u0_kind: KindSpec,
    pub u1_kind: KindSpec,
    pub theta0_kind: KindSpec,
    pub mollify_n: Option<u64>,
    // [output]
    pub out_dir: String,
    pub every: f64,
    pub emit_fields: bool,
}

fn constraint(field: &str, value: impl fmt::Display, what: &str) -> ConfigError {
    ConfigError::Constraint {
        field: field.to_string(),
        value: value.to_string(),
        constraint: what.to_string(),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    // Required fields start unset; everything else has its documented default.
    let mut a: Option<f64> = None;
    let mut b: Option<f64> = None;
    let mut n_cells: Option<usize> = None;
    let mut dt: Option<f64> = None;
    let mut t_end: Option<f64> = None;
    let mut mu = 1.0;
    let mut nu = 0.01;
    let mut picard_tol = 1e-10;
    let mut picard_max: u32 = 50;
    let mut u0_kind = KindSpec::SinePacket;
    let mut u1_kind = KindSpec::Zero;
    let mut theta0_kind = KindSpec::SinePacket;
    let mut mollify_n: Option<u64> = None;
    let mut out_dir = "out".to_string();
    let mut every = 0.01;
    let mut emit_fields = false;

    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line: lineno,
                reason: "unterminated section header".to_string(),
            })?;
            section = name.trim().to_string();
            if !matches!(section.as_str(), "grid" | "physics" | "time" | "data" | "output") {
                return Err(ConfigError::Parse {
                    line: lineno,
                    reason: format!("unknown section `[{section}]`"),
                });
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: lineno,
            reason: "expected `key = value`".to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line: lineno,
                reason: format!("empty value for `{key}`"),
            });
        }
        let num = |v: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>().map_err(|_| ConfigError::Parse {
                line: lineno,
                reason: format!("`{v}` is not a number"),
            })
        };
        let boolean = |v: &str| -> Result<bool, ConfigError> {
            match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(ConfigError::Parse {
                    line: lineno,
                    reason: format!("`{v}` is not a boolean (true/false)"),
                }),
            }
        };
        match (section.as_str(), key) {
            ("grid", "a") => a = Some(num(value)?),
            ("grid", "b") => b = Some(num(value)?),
            ("grid", "n_cells") => {
                n_cells = Some(value.parse::<usize>().map_err(|_| ConfigError::Parse {
                    line: lineno,
                    reason: format!("`{value}` is not a positive integer"),
                })?)
            }
            ("physics", "mu") => mu = num(value)?,
            ("physics", "nu") => nu = num(value)?,
            ("time", "dt") => dt = Some(num(value)?),
            ("time", "t_end") => t_end = Some(num(value)?),
            ("time", "picard_tol") => picard_tol = num(value)?,
            ("time", "picard_max") => {
                picard_max = value.parse::<u32>().map_err(|_| ConfigError::Parse {
                    line: lineno,
                    reason: format!("`{value}` is not a positive integer"),
                })?
            }
            ("data", "u0_kind") => u0_kind = KindSpec::parse(value, lineno)?,
            ("data", "u1_kind") => u1_kind = KindSpec::parse(value, lineno)?,
            ("data", "theta0_kind") => theta0_kind = KindSpec::parse(value, lineno)?,
            ("data", "mollify_n") => {
                mollify_n = Some(value.parse::<u64>().map_err(|_| ConfigError::Parse {
                    line: lineno,
                    reason: format!("`{value}` is not a positive integer"),
                })?)
            }
            ("output", "dir") => out_dir = value.to_string(),
            ("output", "every") => every = num(value)?,
            ("output", "emit_fields") => emit_fields = boolean(value)?,
            ("", k) => {
                return Err(ConfigError::Parse {
                    line: lineno,
                    reason: format!("key `{k}` appears before any [section]"),
                })
            }
            (_, k) => {
                return Err(ConfigError::UnknownKey {
                    line: lineno,
                    name: format!("{section}.{k}"),
                })
            }
        }
    }

    let missing = |name: &str| ConfigError::Constraint {
        field: name.to_string(),
        value: "<unset>".to_string(),
        constraint: "required field".to_string(),
    };
    let a = a.ok_or_else(|| missing("grid.a"))?;
    let b = b.ok_or_else(|| missing("grid.b"))?;
    let n_cells = n_cells.ok_or_else(|| missing("grid.n_cells"))?;
    let dt = dt.ok_or_else(|| missing("time.dt"))?;
    let t_end = t_end.ok_or_else(|| missing("time.t_end"))?;

    // Re-validate the underlying type constraints so the error surfaces at
    // parse time with the config field name, not mid-run.
    if !(b > a) {
        return Err(constraint("grid.b", b, "must exceed grid.a"));
    }
    if n_cells < 2 {
        return Err(constraint("grid.n_cells", n_cells, "needs >= 2 cells for the stencils"));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(constraint("time.dt", dt, "must be positive and finite"));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(constraint("time.t_end", t_end, "must be positive and finite"));
    }
    if mu < 0.0 || !mu.is_finite() {
        return Err(constraint("physics.mu", mu, "must be nonnegative and finite"));
    }
    if nu < 0.0 || !nu.is_finite() {
        return Err(constraint("physics.nu", nu, "must be nonnegative and finite"));
    }
    if !(picard_tol > 0.0) {
        return Err(constraint("time.picard_tol", picard_tol, "must be positive"));
    }
    if picard_max == 0 {
        return Err(constraint("time.picard_max", picard_max, "must be at least 1"));
    }
    if !(every > 0.0) {
        return Err(constraint("output.every", every, "must be positive"));
    }
    if let KindSpec::Constant(v) = theta0_kind {
        if v < 0.0 {
            return Err(constraint("data.theta0_kind", v, "temperature must be nonnegative"));
        }
    }
    if let Some(n) = mollify_n {
        if n == 0 {
            return Err(constraint("data.mollify_n", n, "must be at least 1"));
        }
    }

    Ok(RunConfig {
        a,
        b,
        n_cells,
        mu,
        nu,
        dt,
        t_end,
        picard_tol,
        picard_max,
        u0_kind,
        u1_kind,
        theta0_kind,
        mollify_n,
        out_dir,
        every,
        emit_fields,
    })
}

impl RunConfig {
    pub fn grid(&self) -> thermo1d::Result<Arc<Grid>> {
        Grid::new(self.a, self.b, self.n_cells)
    }

    pub fn initial_data(&self) -> thermo1d::Result<InitialData> {
        let grid = self.grid()?;
        let u0 = thermo1d::initial::make_profile(&self.u0_kind.to_profile(), DataRole::Displacement, &grid)?;
        let u1 = match &self.u1_kind {
            KindSpec::Zero => Field::zeros(&grid, BoundaryKind::DirichletZero),
            k => thermo1d::initial::make_profile(&k.to_profile(), DataRole::Velocity, &grid)?,
        };
        let theta0 =
            thermo1d::initial::make_profile(&self.theta0_kind.to_profile(), DataRole::Temperature, &grid)?;
        let init = InitialData::new(u0, u1, theta0)?;
        match self.mollify_n {
            Some(n) => {
                let fam = thermo1d::initial::mollify_family(&init, n)?;
                InitialData::new(init.u0, fam.u1_n, fam.theta0_n)
            }
            None => Ok(init),
        }
    }

    pub fn params(&self) -> thermo1d::PhysParams {
        let mut p = thermo1d::PhysParams::new(self.mu, self.nu, self.dt, self.t_end);
        p.picard_tol = self.picard_tol;
        p.picard_max = self.picard_max;
        p
    }
}
