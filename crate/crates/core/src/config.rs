//! Sweep configuration: TOML files merged with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest number of points a λ grid may expand to.
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    Tangle,
    Entropy,
    Noise,
    Collapse,
    Mx,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Observable::Tangle => "tangle",
            Observable::Entropy => "entropy",
            Observable::Noise => "noise",
            Observable::Collapse => "collapse",
            Observable::Mx => "mx",
        };
        f.write_str(s)
    }
}

/// λ values: an inclusive `start:stop:step` range or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

impl LambdaGrid {
    /// Expanded grid. Range points are computed as `start + i·step` and
    /// rounded to 12 significant digits so that `0:2:0.02` yields exactly
    /// the decimal values one expects.
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            LambdaGrid::Range { start, stop, step } => {
                if !(step.is_finite() && *step > 0.0) {
                    return Err(Error::Config(format!("λ step must be positive, got {step}")));
                }
                if !(start.is_finite() && stop.is_finite()) || stop < start {
                    return Err(Error::Config(format!("empty λ range {start}:{stop}")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > MAX_GRID_POINTS {
                    return Err(Error::Config(format!("λ grid has {count} points")));
                }
                (0..count).map(|i| round_sig(start + i as f64 * step, 12)).collect()
            }
            LambdaGrid::List(v) => v.clone(),
        };
        if pts.is_empty() {
            return Err(Error::Config("λ grid is empty".into()));
        }
        if pts.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::Config("λ values must be finite and non-negative".into()));
        }
        let mut sorted = pts.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("λ grid contains duplicates".into()));
        }
        Ok(pts)
    }
}

impl FromStr for LambdaGrid {
    type Err = Error;

    /// `start:stop:step`, a comma-separated list, or a single value.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse {t:?} as a number")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.len() {
            3 => Ok(LambdaGrid::Range {
                start: num(parts[0])?,
                stop: num(parts[1])?,
                step: num(parts[2])?,
            }),
            1 => Ok(LambdaGrid::List(s.split(',').map(num).collect::<Result<Vec<_>>>()?)),
            _ => Err(Error::Config(format!(
                "λ grid {s:?} is neither start:stop:step nor a list"
            ))),
        }
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Parses comma-separated integers.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse {t:?} in list {s:?}")))
        })
        .collect()
}

/// Contents of a `--config` file. Every field is optional; command-line
/// flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gamma: Option<f64>,
    pub sizes: Option<Vec<usize>>,
    pub lambda: Option<LambdaSpec>,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub max_extent: Option<usize>,
    pub spacings: Option<Vec<usize>>,
    pub nu: Option<Vec<f64>>,
    pub fit_window: Option<[f64; 2]>,
}

/// λ grids in TOML: either a string (`"0:2:0.02"`), a table with
/// `start`/`stop`/`step`, or an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Text(String),
    Grid(LambdaGrid),
}

impl LambdaSpec {
    pub fn grid(&self) -> Result<LambdaGrid> {
        match self {
            LambdaSpec::Text(s) => s.parse(),
            LambdaSpec::Grid(g) => Ok(g.clone()),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// A fully resolved sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub observable: Observable,
    pub gamma: f64,
    pub sizes: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub spacings: Vec<usize>,
    pub nu: Vec<f64>,
    pub fit_window: [f64; 2],
    pub max_extent: Option<usize>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
    #[serde(skip)]
    pub workers: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && (0.0..=1.0).contains(&self.gamma)) {
            return Err(Error::Config(format!("γ = {} outside [0, 1]", self.gamma)));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("no system sizes given".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 3) {
            return Err(Error::Config(format!("system size {n} < 3")));
        }
        if self.lambdas.is_empty() {
            return Err(Error::Config("λ grid is empty".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        if self.observable == Observable::Entropy {
            if self.spacings.is_empty() {
                return Err(Error::Config("no spacings given".into()));
            }
            for &n in &self.sizes {
                if let Some(&l) = self.spacings.iter().find(|&&l| l == 0 || 4 * l > n) {
                    return Err(Error::Config(format!("spacing {l} needs 1 ≤ 4L ≤ N = {n}")));
                }
            }
        }
        if self.observable == Observable::Collapse {
            if self.sizes.len() < 2 {
                return Err(Error::Config("collapse needs at least two sizes".into()));
            }
            if self.nu.is_empty() || self.nu.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Config("ν values must be positive".into()));
            }
        }
        if !(self.fit_window[0] < self.fit_window[1]) {
            return Err(Error::Config("fit window must satisfy lo < hi".into()));
        }
        Ok(())
    }

    /// SHA-256 over everything that influences the numbers (not the output
    /// path, cache location or worker count).
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
