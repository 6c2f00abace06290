//! Run configuration: per-family defaults, a flat `key = value` file format,
//! and command-line overrides, all funnelled through [`RunConfig::set`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use magicint::models::{CgmyFamilySpec, FamilyId};
use magicint::Interval;

use crate::error::CliError;

/// Candidate magic point grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    Chebyshev,
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridKind::Uniform => "uniform",
            GridKind::Chebyshev => "chebyshev",
        })
    }
}

impl FromStr for GridKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(GridKind::Uniform),
            "chebyshev" => Ok(GridKind::Chebyshev),
            _ => Err(format!("unknown grid kind '{s}' (expected uniform or chebyshev)")),
        }
    }
}

/// Built-in signals for the STFT family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// `f(t) = 1`
    Unit,
    /// `f(t) = 1 / (1 + t²)`
    Lorentz,
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalKind::Unit => "unit",
            SignalKind::Lorentz => "lorentz",
        })
    }
}

impl FromStr for SignalKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit" => Ok(SignalKind::Unit),
            "lorentz" => Ok(SignalKind::Lorentz),
            _ => Err(format!("unknown signal '{s}' (expected unit or lorentz)")),
        }
    }
}

/// Absolute tolerance of the direct quadrature used as reference.
pub const DEFAULT_ORACLE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub family: FamilyId,
    /// One interval per parameter coordinate; degenerate intervals fix a
    /// coordinate.
    pub bounds: Vec<Interval>,
    pub cloud_size: usize,
    pub grid_size: usize,
    pub grid: GridKind,
    /// Integration domain. Derived from the box for `stft-gauss`.
    pub omega: Option<Interval>,
    /// `None` trains until `max_m` or exhaustion.
    pub tol: Option<f64>,
    pub max_m: usize,
    pub seed: u64,
    pub test_seed: u64,
    pub n_test: usize,
    /// Weight quadrature tolerance; defaults to `min(1e-13, tol / 10)`.
    pub quad_tol: Option<f64>,
    pub oracle_tol: f64,
    pub signal: SignalKind,
    pub out: PathBuf,
    pub model: Option<PathBuf>,
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    pub bound_c: Option<f64>,
}

/// Keys that define the trained family. A loaded model fixes them.
pub const FAMILY_KEYS: [&str; 4] = ["family", "box", "omega", "signal"];

impl RunConfig {
    pub fn defaults(family: FamilyId) -> Self {
        let base = Self {
            family,
            bounds: Vec::new(),
            cloud_size: 0,
            grid_size: 0,
            grid: GridKind::Uniform,
            omega: None,
            tol: None,
            max_m: 100,
            seed: 1,
            test_seed: 2,
            n_test: 1000,
            quad_tol: None,
            oracle_tol: DEFAULT_ORACLE_TOL,
            signal: SignalKind::Lorentz,
            out: PathBuf::from("out"),
            model: None,
            rho: None,
            eta: None,
            bound_c: None,
        };
        match family {
            FamilyId::Cgmy => Self {
                bounds: CgmyFamilySpec::reference().bounds.to_vec(),
                cloud_size: 4000,
                grid_size: 1500,
                omega: Some(Interval { lo: 0.0, hi: 75.0 }),
                tol: Some(1e-12),
                ..base
            },
            FamilyId::ExpTest => Self {
                bounds: vec![Interval { lo: 0.0, hi: 1.0 }],
                cloud_size: 50,
                grid_size: 200,
                grid: GridKind::Chebyshev,
                omega: Some(Interval { lo: -1.0, hi: 1.0 }),
                tol: Some(1e-13),
                max_m: 30,
                rho: Some(8.0),
                ..base
            },
            FamilyId::StftGauss => Self {
                bounds: vec![
                    Interval { lo: -1.0, hi: 1.0 },
                    Interval { lo: 0.5, hi: 1.0 },
                    Interval { lo: 0.0, hi: 4.0 },
                ],
                cloud_size: 400,
                grid_size: 800,
                tol: Some(1e-10),
                max_m: 150,
                ..base
            },
        }
    }

    /// Applies one `key = value` setting. Dashes and underscores in keys are
    /// interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let bad = |e: String| CliError::Usage(format!("{key}: {e}"));
        match key.as_str() {
            "family" => {
                let id: FamilyId = value.parse().map_err(bad)?;
                if id != self.family {
                    return Err(bad(format!(
                        "family is {} but '{id}' was requested; set the family first",
                        self.family
                    )));
                }
            }
            "box" => self.bounds = parse_box(value).map_err(bad)?,
            "cloud_size" => self.cloud_size = parse_num(value).map_err(bad)?,
            "grid_size" => self.grid_size = parse_num(value).map_err(bad)?,
            "grid" => self.grid = value.parse().map_err(bad)?,
            "omega" => self.omega = Some(parse_interval(value).map_err(bad)?),
            "tol" => {
                self.tol = if value == "none" {
                    None
                } else {
                    Some(parse_num(value).map_err(bad)?)
                }
            }
            "max_m" => self.max_m = parse_num(value).map_err(bad)?,
            "seed" => self.seed = parse_num(value).map_err(bad)?,
            "test_seed" => self.test_seed = parse_num(value).map_err(bad)?,
            "n_test" => self.n_test = parse_num(value).map_err(bad)?,
            "quad_tol" => self.quad_tol = Some(parse_num(value).map_err(bad)?),
            "oracle_tol" => self.oracle_tol = parse_num(value).map_err(bad)?,
            "signal" => self.signal = value.parse().map_err(bad)?,
            "out" => self.out = PathBuf::from(value),
            "model" => self.model = Some(PathBuf::from(value)),
            "rho" => self.rho = Some(parse_num(value).map_err(bad)?),
            "eta" => self.eta = Some(parse_num(value).map_err(bad)?),
            "bound_c" => self.bound_c = Some(parse_num(value).map_err(bad)?),
            _ => return Err(CliError::Usage(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<(), CliError> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Settings that describe a training run, in a form [`RunConfig::set`]
    /// reads back exactly.
    pub fn training_pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("family".to_string(), self.family.to_string()),
            ("box".to_string(), format_box(&self.bounds)),
            ("cloud_size".to_string(), self.cloud_size.to_string()),
            ("grid_size".to_string(), self.grid_size.to_string()),
            ("grid".to_string(), self.grid.to_string()),
        ];
        if let Some(o) = self.omega {
            out.push(("omega".to_string(), format!("{},{}", o.lo, o.hi)));
        }
        out.push((
            "tol".to_string(),
            self.tol.map_or_else(|| "none".to_string(), |t| format!("{t:e}")),
        ));
        out.push(("max_m".to_string(), self.max_m.to_string()));
        out.push(("seed".to_string(), self.seed.to_string()));
        out.push(("quad_tol".to_string(), format!("{:e}", self.weight_tol())));
        if self.family == FamilyId::StftGauss {
            out.push(("signal".to_string(), self.signal.to_string()));
        }
        out
    }

    /// Tolerance for the weight integrals.
    pub fn weight_tol(&self) -> f64 {
        self.quad_tol
            .unwrap_or_else(|| self.tol.map_or(1e-13, |t| (t / 10.0).min(1e-13)))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |s: String| Err(CliError::Usage(s));
        if self.cloud_size == 0 || self.grid_size < 2 || self.max_m == 0 {
            return usage("cloud_size and max_m must be positive and grid_size at least 2".into());
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return usage(format!("tol must be positive, got {t}"));
            }
        }
        if let Some(q) = self.quad_tol {
            if !(q > 0.0 && q.is_finite()) {
                return usage(format!("quad_tol must be positive, got {q}"));
            }
        }
        if !(self.oracle_tol > 0.0) {
            return usage(format!("oracle_tol must be positive, got {}", self.oracle_tol));
        }
        let dim = match self.family {
            FamilyId::Cgmy => 5,
            FamilyId::ExpTest => 1,
            FamilyId::StftGauss => 3,
        };
        if self.bounds.len() != dim {
            return usage(format!(
                "{} needs a box with {dim} intervals, got {}",
                self.family,
                self.bounds.len()
            ));
        }
        match self.family {
            FamilyId::StftGauss if self.omega.is_some() => {
                return usage("omega is derived from the box for stft-gauss".into());
            }
            FamilyId::StftGauss => {}
            _ if self.omega.is_none() => return usage(format!("{} needs omega", self.family)),
            _ => {}
        }
        Ok(())
    }
}

/// Parses a flat `key = value` file. `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse '{s}'"))
}

/// `a,b` with `a < b`.
pub fn parse_interval(s: &str) -> Result<Interval, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected 'lo,hi', got '{s}'"))?;
    Interval::new(parse_num(a.trim())?, parse_num(b.trim())?).map_err(|e| e.to_string())
}

/// Comma-separated coordinates, each `lo:hi` or a single fixed value.
pub fn parse_box(s: &str) -> Result<Vec<Interval>, String> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            // A leading '-' belongs to the number, so split on the first ':' only.
            match part.split_once(':') {
                Some((a, b)) => {
                    Interval::new(parse_num(a.trim())?, parse_num(b.trim())?).map_err(|e| e.to_string())
                }
                None => Ok(Interval::point(parse_num(part)?)),
            }
        })
        .collect()
}

pub fn format_box(bounds: &[Interval]) -> String {
    bounds
        .iter()
        .map(|b| {
            if b.lo == b.hi {
                format!("{}", b.lo)
            } else {
                format!("{}:{}", b.lo, b.hi)
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Comma-separated parameter vector.
pub fn parse_param(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| parse_num(x.trim()).map_err(CliError::Usage))
        .collect()
}
