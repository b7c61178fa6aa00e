//! Flat key-value config files with sections.
//!
//! Grammar (one setting per line):
//!
//! ```text
//! # comment                 blank lines and '#' comments are skipped
//! [section]                 section header
//! key = value               values: numbers, names, or comma lists
//! ```
//!
//! Unknown sections or keys are configuration errors, as are malformed
//! values. The raw text is hashed into the run manifest, so a rerun with
//! the same config and seed is byte-reproducible.

use geojump::geometry::{Catalog, EmbeddedManifold};
use geojump::martingales::{AngleLaw, JumpMartingaleSpec};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<geojump::Error> for ConfigError {
    fn from(e: geojump::Error) -> Self {
        ConfigError(e.to_string())
    }
}

type Section = BTreeMap<String, String>;

/// Parsed but untyped config plus the exact text it came from.
#[derive(Debug, Clone)]
pub struct RawConfig {
    sections: BTreeMap<String, Section>,
    pub text: String,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current = String::from("global");
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError(format!("line {}: unclosed section header", lineno + 1)))?;
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let prev = sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
            if prev.is_some() {
                return Err(ConfigError(format!(
                    "line {}: duplicate key '{}' in [{}]",
                    lineno + 1,
                    key.trim(),
                    current
                )));
            }
        }
        Ok(Self { sections, text: text.to_string() })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(|v| v.as_str())
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("[{section}] {key}: '{v}' is not a number"))),
        }
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("[{section}] {key}: '{v}' is not an integer"))),
        }
    }

    pub fn u64_or(&self, section: &str, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("[{section}] {key}: '{v}' is not an integer"))),
        }
    }

    pub fn str_or<'a>(&'a self, section: &str, key: &str, default: &'a str) -> &'a str {
        self.get(section, key).unwrap_or(default)
    }

    pub fn f64_list_or(
        &self,
        section: &str,
        key: &str,
        default: &[f64],
    ) -> Result<Vec<f64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| {
                        ConfigError(format!("[{section}] {key}: '{t}' is not a number"))
                    })
                })
                .collect(),
        }
    }

    pub fn usize_list_or(
        &self,
        section: &str,
        key: &str,
        default: &[usize],
    ) -> Result<Vec<usize>, ConfigError> {
        match self.get(section, key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim().parse::<usize>().map_err(|_| {
                        ConfigError(format!("[{section}] {key}: '{t}' is not an integer"))
                    })
                })
                .collect(),
        }
    }
}

/// Typed experiment configuration shared by the verify subcommands.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub manifold: EmbeddedManifold,
    pub martingale: JumpMartingaleSpec,
    pub grid_steps: usize,
    /// Family sweeps.
    pub lambdas: Vec<f64>,
    pub grids: Vec<usize>,
    pub epsilons: Vec<f64>,
    /// Metric parameters.
    pub p: f64,
    pub checkpoints: Vec<f64>,
    pub tolerance: f64,
    /// Small-range radius R (exit-ball radius on the embedded path).
    pub radius: f64,
    /// Ball radius for localization covers (inner = R/4, outer = R/2).
    pub localization_radius: f64,
    pub paths: usize,
    pub base_seed: u64,
    pub hessian_samples: usize,
    pub strict_threshold: bool,
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let catalog = match raw.str_or("manifold", "catalog", "sphere") {
            "sphere" => Catalog::Sphere,
            "torus" => Catalog::Torus,
            other => return Err(ConfigError(format!("unknown catalog '{other}'"))),
        };
        let ambient_dim = raw.usize_or("manifold", "ambient_dim", 3)?;
        let blend = raw.f64_or("manifold", "blend_radius", 0.5)?;
        let trap = match raw.get("manifold", "trap") {
            None => None,
            Some(v) => Some(
                v.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| ConfigError(format!("bad trap coordinate '{t}'")))
                    })
                    .collect::<Result<Vec<f64>, _>>()?,
            ),
        };
        let manifold = EmbeddedManifold::with_options(catalog, ambient_dim, trap, blend)?;

        let default_start = {
            let mut s = vec![0.0; ambient_dim];
            match catalog {
                Catalog::Sphere => s[0] = 1.0,
                Catalog::Torus => {
                    for b in 0..ambient_dim / 2 {
                        s[2 * b] = 1.0;
                    }
                }
            }
            s
        };
        let start = match raw.get("martingale", "x0") {
            None => default_start,
            Some(v) => v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| ConfigError(format!("bad x0 coordinate '{t}'")))
                })
                .collect::<Result<Vec<f64>, _>>()?,
        };

        let theta = raw.f64_or("martingale", "theta", 0.9)?;
        let angle_law = match raw.str_or("martingale", "angle_law", "fixed") {
            "fixed" => AngleLaw::Fixed(theta),
            "uniform" => AngleLaw::Uniform(theta),
            other => return Err(ConfigError(format!("unknown angle law '{other}'"))),
        };
        let jump_cap = raw.f64_or("martingale", "jump_cap", 2.0)?;
        let horizon = raw.f64_or("martingale", "horizon", 4.0)?;
        let start_bound =
            raw.f64_or("martingale", "beta", geojump::linalg::norm(&start))?;
        let martingale = JumpMartingaleSpec {
            manifold: manifold.clone(),
            start,
            jump_rate: raw.f64_or("martingale", "lambda", 2.0)?,
            angle_law,
            walk_scale: raw.f64_or("martingale", "delta", 0.2)?,
            kill_rate: raw.f64_or("martingale", "kappa", 0.0)?,
            horizon,
            jump_cap,
            start_bound,
        };
        martingale.validate()?;

        let config = Self {
            manifold,
            martingale,
            grid_steps: raw.usize_or("martingale", "grid_steps", 2000)?,
            lambdas: raw.f64_list_or("sweep", "lambdas", &[1.0, 2.0, 8.0])?,
            grids: raw.usize_list_or("sweep", "grids", &[1600, 4000, 12800])?,
            epsilons: raw.f64_list_or("sweep", "epsilons", &[0.2, 0.1, 0.05, 0.025])?,
            p: raw.f64_or("metrics", "p", 2.0)?,
            checkpoints: raw.f64_list_or("metrics", "checkpoints", &[2.0, 4.0])?,
            tolerance: raw.f64_or("metrics", "tolerance", 0.01)?,
            radius: raw.f64_or("run", "radius", 2.5)?,
            localization_radius: raw.f64_or("run", "localization_radius", 1.2)?,
            paths: raw.usize_or("run", "paths", 1000)?,
            base_seed: raw.u64_or("run", "base_seed", 20240)?,
            hessian_samples: raw.usize_or("run", "hessian_samples", 1_000_000)?,
            strict_threshold: raw.str_or("run", "strict_threshold", "off") == "on",
        };
        if config.epsilons.is_empty() || config.lambdas.is_empty() || config.grids.is_empty() {
            return Err(ConfigError("sweep lists must be nonempty".into()));
        }
        if !(config.p >= 1.0) {
            return Err(ConfigError("p must be ≥ 1".into()));
        }
        if config.paths == 0 {
            return Err(ConfigError("run.paths must be positive".into()));
        }
        Ok(config)
    }

    /// Spec with the jump rate replaced (validated).
    pub fn martingale_with(&self, lambda: f64, horizon: f64) -> JumpMartingaleSpec {
        let mut spec = self.martingale.clone();
        spec.jump_rate = lambda;
        spec.horizon = horizon;
        spec
    }
}
