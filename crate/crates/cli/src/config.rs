//! Run configuration: JSON file, then flag overrides.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use pendctl::sim::{DEFAULT_DIVERGENCE_BOUND, DEFAULT_STEP, DEFAULT_T_FINAL};
use pendctl::{LinearSystem, PendulumParams, StateVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedInitial {
    #[serde(rename = "x_u")]
    Unstable,
    #[serde(rename = "x_c")]
    Critical,
    #[serde(rename = "x_s")]
    Stable,
}

impl NamedInitial {
    pub fn state(self) -> StateVector {
        match self {
            NamedInitial::Unstable => StateVector::new(7.0, 0.0, PI / 2.0, 0.0),
            NamedInitial::Critical => StateVector::new(5.0, -1.0, PI / 5.0, 0.2),
            NamedInitial::Stable => StateVector::new(0.5, 0.0, 0.3, 0.0),
        }
    }
}

/// `"x_u"`, `"x_c"`, `"x_s"` or an explicit `[x1, x2, x3, x4]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialCondition {
    Named(NamedInitial),
    Explicit([f64; 4]),
}

impl InitialCondition {
    pub fn state(&self) -> StateVector {
        match self {
            InitialCondition::Named(n) => n.state(),
            InitialCondition::Explicit(x) => StateVector(*x),
        }
    }
}

impl FromStr for InitialCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "x_u" => return Ok(Self::Named(NamedInitial::Unstable)),
            "x_c" => return Ok(Self::Named(NamedInitial::Critical)),
            "x_s" => return Ok(Self::Named(NamedInitial::Stable)),
            _ => {}
        }
        let values = parse_list(s)?;
        let x: [f64; 4] = values
            .try_into()
            .map_err(|v: Vec<f64>| format!("initial state needs 4 entries, got {}", v.len()))?;
        Ok(Self::Explicit(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    Linear,
    Nonlinear,
}

/// A complex pole written as `"a"`, `"bi"` or `"a+bi"` / `"a-bi"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole(pub Complex64);

impl FromStr for Pole {
    type Err = String;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || format!("cannot parse pole {raw:?}; expected a, bi or a+bi");
        let num = |t: &str| -> Result<f64, String> {
            match t {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                _ => t.parse::<f64>().map_err(|_| bad()),
            }
        };
        let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
            let re: f64 = s.parse().map_err(|_| bad())?;
            return finite(Complex64::new(re, 0.0)).ok_or_else(bad);
        };
        let bytes = body.as_bytes();
        // last sign that is not leading and not part of an exponent
        let split = (1..bytes.len())
            .rev()
            .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let z = match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                Complex64::new(re, num(&body[k..])?)
            }
            None => Complex64::new(0.0, num(body)?),
        };
        finite(z).ok_or_else(bad)
    }
}

fn finite(z: Complex64) -> Option<Pole> {
    z.is_finite().then_some(Pole(z))
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Complex64 { re, im } = self.0;
        if im == 0.0 {
            write!(f, "{re}")
        } else if im < 0.0 {
            write!(f, "{re}-{}i", -im)
        } else {
            write!(f, "{re}+{im}i")
        }
    }
}

impl Serialize for Pole {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pole {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Comma-separated pole list, e.g. `"-2,-3+0.5i,-3-0.5i,-4"`.
pub fn parse_poles(s: &str) -> Result<Vec<Pole>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {t:?}"))
        })
        .collect()
}

/// `"start:stop:step"` (stop inclusive) or a comma list.
pub fn parse_periods(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [_] => parse_list(s)?,
        [a, b, c] => {
            let num = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("not a number: {t:?}"))
            };
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if !(step > 0.0 && start.is_finite() && stop.is_finite() && start <= stop) {
                return Err(format!("bad range {s:?}: need start <= stop and step > 0"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect()
        }
        _ => {
            return Err(format!(
                "bad period list {s:?}; use start:stop:step or a,b,c"
            ))
        }
    };
    if values.is_empty() || values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(format!("sampling periods must be positive, got {s:?}"));
    }
    Ok(values)
}

fn paper_poles() -> Vec<Pole> {
    [(-2.0, 0.0), (-3.0, 0.5), (-3.0, -0.5), (-4.0, 0.0)]
        .into_iter()
        .map(|(re, im)| Pole(Complex64::new(re, im)))
        .collect()
}

/// Fully resolved inputs of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: PendulumParams,
    /// Replaces the linearized design model when present.
    pub system: Option<LinearSystem>,
    pub poles: Vec<Pole>,
    pub initial: InitialCondition,
    /// Sampling period `T`.
    pub period: Option<f64>,
    /// Sweep grid `Ts`.
    pub periods: Option<Vec<f64>>,
    pub plant: PlantKind,
    pub redesign: bool,
    /// Rank tolerance for the property checks.
    pub tol: f64,
    pub t_final: f64,
    pub step: f64,
    pub divergence_bound: f64,
    /// Constant reference `delta` on `y1`.
    pub reference: f64,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PendulumParams::default(),
            system: None,
            poles: paper_poles(),
            initial: InitialCondition::Named(NamedInitial::Stable),
            period: None,
            periods: None,
            plant: PlantKind::Nonlinear,
            redesign: false,
            tol: pendctl::kernel::DEFAULT_RANK_TOL,
            t_final: DEFAULT_T_FINAL,
            step: DEFAULT_STEP,
            divergence_bound: DEFAULT_DIVERGENCE_BOUND,
            reference: 0.0,
            output: None,
            csv: None,
        }
    }
}

impl RunConfig {
    /// Reads a bare configuration or the `config` member of an earlier summary.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let stage = "load config";
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(stage, format!("{}: {e}", path.display())))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config(stage, format!("{}: {e}", path.display())))?;
        if let Some(inner) = value.get_mut("config").filter(|v| v.is_object()) {
            value = inner.take();
        }
        serde_json::from_value(value)
            .map_err(|e| CliError::config(stage, format!("{}: {e}", path.display())))
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.poles.iter().map(|p| p.0).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let stage = "validate config";
        self.params
            .validate()
            .map_err(|e| CliError::config(stage, e.to_string()))?;
        let bad = |msg: String| Err(CliError::config(stage, msg));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if let Some(t) = self.period {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("T must be positive, got {t}"));
            }
        }
        if let Some(ts) = &self.periods {
            if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return bad("Ts must be a non-empty list of positive periods".into());
            }
        }
        if !self.reference.is_finite() {
            return bad("reference must be finite".into());
        }
        if !self.initial.state().is_finite() {
            return bad("initial state must be finite".into());
        }
        Ok(())
    }
}
