//! Flat `key = value` configuration files.
//!
//! Blank lines and text after `#` are ignored. Every key has a default, so an
//! empty file is a valid configuration; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::profile::{parse_list, Profile};

const DEFAULTS: &[(&str, &str)] = &[
    ("n_r_inner", "4"),
    ("n_r_outer", "4"),
    ("n_theta", "64"),
    ("sigma1", "2"),
    ("sigma2", "1"),
    ("gamma", "const:1"),
    ("flux", "cos:1"),
    ("fluxes", "cos:1;sin:1;cos:2"),
    ("gamma_true", "exp_cos:-0.5"),
    ("gamma_init", "const:1"),
    ("eps", "0"),
    ("seed", "0"),
    ("lambda", "0"),
    ("gtol_rel", "1e-8"),
    ("max_iter", "200"),
    ("c0", "1e-3"),
    ("c1", "10"),
    ("partition_m", "4"),
    ("a", "1"),
    ("b", "2"),
    ("n_modes", "16"),
    ("cgne_max_iter", "500"),
    ("alpha", "2"),
    ("beta", "0.5"),
    ("locpot_arcs", "1"),
    ("verify_samples", "50"),
    ("output_dir", "out"),
    ("plot_scripts", "true"),
];

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Read(PathBuf, String),
    Syntax { line: usize, text: String },
    UnknownKey { key: String, line: usize },
    Duplicate { key: String, line: usize },
    Value { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read(path, e) => write!(f, "cannot read config {}: {e}", path.display()),
            ConfigError::Syntax { line, text } => write!(f, "line {line}: expected `key = value`, found `{text}`"),
            ConfigError::UnknownKey { key, line } => write!(f, "line {line}: unknown config key `{key}`"),
            ConfigError::Duplicate { key, line } => write!(f, "line {line}: key `{key}` given twice"),
            ConfigError::Value { key, message } => write!(f, "config key `{key}`: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub struct Config {
    pub n_r_inner: usize,
    pub n_r_outer: usize,
    pub n_theta: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub gamma: Profile,
    pub flux: Profile,
    pub fluxes: Vec<Profile>,
    pub gamma_true: Profile,
    pub gamma_init: Profile,
    pub eps: f64,
    pub seed: u64,
    pub lambda: f64,
    pub gtol_rel: f64,
    pub max_iter: usize,
    pub c0: f64,
    pub c1: f64,
    pub partition_m: usize,
    pub a: f64,
    pub b: f64,
    pub n_modes: usize,
    pub cgne_max_iter: usize,
    pub alpha: f64,
    pub beta: f64,
    /// 1-based arc indices.
    pub locpot_arcs: Vec<usize>,
    pub verify_samples: usize,
    pub output_dir: PathBuf,
    pub plot_scripts: bool,
    raw: BTreeMap<String, String>,
}

fn value_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn str(&self, key: &str) -> &str {
        &self.0[key]
    }

    fn float(&self, key: &str) -> Result<f64, ConfigError> {
        let v: f64 = self
            .str(key)
            .parse()
            .map_err(|_| value_err(key, format!("`{}` is not a number", self.str(key))))?;
        if !v.is_finite() {
            return Err(value_err(key, "must be finite"));
        }
        Ok(v)
    }

    fn positive(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.float(key)?;
        if v <= 0.0 {
            return Err(value_err(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn non_negative(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.float(key)?;
        if v < 0.0 {
            return Err(value_err(key, format!("must be non-negative, got {v}")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, min: usize) -> Result<usize, ConfigError> {
        let v: usize = self
            .str(key)
            .parse()
            .map_err(|_| value_err(key, format!("`{}` is not a non-negative integer", self.str(key))))?;
        if v < min {
            return Err(value_err(key, format!("must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    fn profile(&self, key: &str) -> Result<Profile, ConfigError> {
        Profile::parse(self.str(key)).map_err(|e| value_err(key, e))
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let mut seen = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    text: content.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    text: content.to_string(),
                });
            }
            if !raw.contains_key(key) {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                    line: line_no,
                });
            }
            if seen.insert(key.to_string(), line_no).is_some() {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    line: line_no,
                });
            }
            raw.insert(key.to_string(), value.to_string());
        }
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(path.to_path_buf(), e.to_string()))?;
        Self::parse(&text)
    }

    fn from_raw(raw: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let r = Reader(&raw);
        let seed = r
            .str("seed")
            .parse()
            .map_err(|_| value_err("seed", format!("`{}` is not an unsigned integer", r.str("seed"))))?;
        let locpot_arcs = r
            .str("locpot_arcs")
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| value_err("locpot_arcs", "expected a comma-separated list of arc numbers"))?;
        let plot_scripts = match r.str("plot_scripts") {
            "true" | "yes" | "1" => true,
            "false" | "no" | "0" => false,
            other => {
                return Err(value_err(
                    "plot_scripts",
                    format!("expected true or false, got `{other}`"),
                ))
            }
        };
        let cfg = Config {
            n_r_inner: r.count("n_r_inner", 1)?,
            n_r_outer: r.count("n_r_outer", 1)?,
            n_theta: r.count("n_theta", 8)?,
            sigma1: r.positive("sigma1")?,
            sigma2: r.positive("sigma2")?,
            gamma: r.profile("gamma")?,
            flux: r.profile("flux")?,
            fluxes: parse_list(r.str("fluxes")).map_err(|e| value_err("fluxes", e))?,
            gamma_true: r.profile("gamma_true")?,
            gamma_init: r.profile("gamma_init")?,
            eps: r.non_negative("eps")?,
            seed,
            lambda: r.non_negative("lambda")?,
            gtol_rel: r.non_negative("gtol_rel")?,
            max_iter: r.count("max_iter", 0)?,
            c0: r.positive("c0")?,
            c1: r.positive("c1")?,
            partition_m: r.count("partition_m", 1)?,
            a: r.positive("a")?,
            b: r.positive("b")?,
            n_modes: r.count("n_modes", 0)?,
            cgne_max_iter: r.count("cgne_max_iter", 1)?,
            alpha: r.positive("alpha")?,
            beta: r.positive("beta")?,
            locpot_arcs,
            verify_samples: r.count("verify_samples", 0)?,
            output_dir: PathBuf::from(r.str("output_dir")),
            plot_scripts,
            raw: raw.clone(),
        };
        if cfg.c1 <= cfg.c0 {
            return Err(value_err("c1", format!("must exceed c0 = {}", cfg.c0)));
        }
        if cfg.b <= cfg.a {
            return Err(value_err("b", format!("must exceed a = {}", cfg.a)));
        }
        if cfg.n_theta < cfg.partition_m {
            return Err(value_err("partition_m", "more arcs than interface edges"));
        }
        if let Some(&bad) = cfg.locpot_arcs.iter().find(|&&m| m == 0 || m > cfg.partition_m) {
            return Err(value_err(
                "locpot_arcs",
                format!("arc {bad} outside 1..={}", cfg.partition_m),
            ));
        }
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.raw.insert("seed".into(), seed.to_string());
        self
    }

    pub fn with_output_dir(mut self, dir: PathBuf) -> Self {
        self.raw.insert("output_dir".into(), dir.display().to_string());
        self.output_dir = dir;
        self
    }

    /// Sorted `key=value` lines of the effective configuration. The output
    /// directory is left out so that runs into different folders compare
    /// equal.
    pub fn canonical(&self) -> String {
        self.raw
            .iter()
            .filter(|(k, _)| k.as_str() != "output_dir")
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// First 16 hex digits of the SHA-256 of [`Config::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}
