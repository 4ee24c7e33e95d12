//! Flat `key = value` experiment configuration.
//!
//! One key per line; `#` starts a comment; lists are comma-separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use varmult_core::spaces::{Exponent, SpaceDescriptor};
use varmult_core::weights::WeightFamily;

/// A configuration problem tied to one field.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Keys understood by every experiment.
pub const COMMON_KEYS: &[&str] = &[
    "experiment",
    "seed",
    "output",
    "theta",
    "space",
    "p",
    "q",
    "s",
    "t",
    "r",
    "grid_sizes",
    "weight",
    "weight_params",
    "trials",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub output: PathBuf,
    /// Interpolation parameter carried through to the output only.
    pub theta: Option<f64>,
    /// Raw key/value pairs in file order of first appearance, for echoing
    /// and for experiment-specific keys.
    entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Parses config text. `seed_override` replaces the file's seed and makes
    /// it optional.
    pub fn parse(text: &str, seed_override: Option<u64>) -> ConfigResult<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::new(
                    format!("line {}", lineno + 1),
                    "empty key",
                ));
            }
            if entries
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(ConfigError::new(key, "given more than once"));
            }
        }

        let experiment = entries
            .get("experiment")
            .cloned()
            .ok_or_else(|| ConfigError::new("experiment", "missing"))?;
        let seed = match seed_override {
            Some(s) => s,
            None => {
                let raw = entries
                    .get("seed")
                    .ok_or_else(|| ConfigError::new("seed", "missing (a seed is mandatory)"))?;
                parse_seed(raw).map_err(|m| ConfigError::new("seed", m))?
            }
        };
        if seed_override.is_some() {
            entries.insert("seed".into(), seed.to_string());
        }
        let output = PathBuf::from(
            entries
                .get("output")
                .map(String::as_str)
                .unwrap_or("results"),
        );
        let theta = match entries.get("theta") {
            None => None,
            Some(raw) => {
                let th: f64 = raw
                    .parse()
                    .map_err(|_| ConfigError::new("theta", format!("not a number: `{raw}`")))?;
                if !(th > 0.0 && th <= 1.0) {
                    return Err(ConfigError::new(
                        "theta",
                        format!("must lie in (0, 1], got {th}"),
                    ));
                }
                Some(th)
            }
        };
        Ok(ExperimentConfig {
            experiment,
            seed,
            output,
            theta,
            entries,
        })
    }

    pub fn load(path: &Path, seed_override: Option<u64>) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new("path", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text, seed_override)
    }

    /// Key/value pairs sorted by key.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Rejects keys that are neither common nor listed in `extra`.
    pub fn check_keys(&self, extra: &[&str]) -> ConfigResult<()> {
        for key in self.entries.keys() {
            if !COMMON_KEYS.contains(&key.as_str()) && !extra.contains(&key.as_str()) {
                return Err(ConfigError::new(
                    key.clone(),
                    format!("unknown key for experiment `{}`", self.experiment),
                ));
            }
        }
        Ok(())
    }

    fn parse_with<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> ConfigResult<Option<T>> {
        self.raw(key)
            .map(|raw| parse(raw).map_err(|m| ConfigError::new(key, m)))
            .transpose()
    }

    pub fn list_with_parser<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> ConfigResult<Option<Vec<T>>> {
        self.parse_with(key, |raw| {
            let items: Vec<T> = raw
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(&parse)
                .collect::<Result<_, _>>()?;
            if items.is_empty() {
                return Err("empty list".into());
            }
            Ok(items)
        })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> ConfigResult<Option<T>> {
        self.parse_with(key, |raw| {
            raw.parse().map_err(|_| format!("cannot parse `{raw}`"))
        })
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> ConfigResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> ConfigResult<Option<Vec<T>>> {
        self.list_with_parser(key, |raw| {
            raw.parse()
                .map_err(|_| format!("cannot parse list item `{raw}`"))
        })
    }

    pub fn list_or<T: FromStr>(&self, key: &str, default: Vec<T>) -> ConfigResult<Vec<T>> {
        Ok(self.list(key)?.unwrap_or(default))
    }

    pub fn exponents(&self, key: &str) -> ConfigResult<Option<Vec<Exponent>>> {
        self.list_with_parser(key, |raw| {
            raw.parse::<Exponent>().map_err(|e| e.to_string())
        })
    }

    /// A single exponent, falling back to `default`.
    pub fn exponent_or(&self, key: &str, default: Exponent) -> ConfigResult<Exponent> {
        match self.exponents(key)? {
            None => Ok(default),
            Some(v) if v.len() == 1 => Ok(v[0]),
            Some(_) => Err(ConfigError::new(key, "expected a single exponent")),
        }
    }

    /// A single finite exponent.
    pub fn finite_or(&self, key: &str, default: f64) -> ConfigResult<f64> {
        match self.exponent_or(key, Exponent::Finite(default))? {
            Exponent::Finite(v) => Ok(v),
            Exponent::Infinity => Err(ConfigError::new(key, "must be finite here")),
        }
    }

    pub fn space_or(&self, default: SpaceDescriptor) -> ConfigResult<SpaceDescriptor> {
        Ok(self
            .parse_with("space", |raw| {
                raw.parse::<SpaceDescriptor>().map_err(|e| e.to_string())
            })?
            .unwrap_or(default))
    }

    /// Grid sizes, each a power of two ≥ 2.
    pub fn grid_sizes_or(&self, default: Vec<usize>) -> ConfigResult<Vec<usize>> {
        let sizes = self.list_or("grid_sizes", default)?;
        if let Some(bad) = sizes.iter().find(|n| **n < 2 || !n.is_power_of_two()) {
            return Err(ConfigError::new(
                "grid_sizes",
                format!("{bad} is not a power of two ≥ 2"),
            ));
        }
        Ok(sizes)
    }

    /// `weight = power:0.5, unit` or `weight = power` with
    /// `weight_params = 0, 0.5`.
    pub fn weights_or(&self, default: Vec<WeightFamily>) -> ConfigResult<Vec<WeightFamily>> {
        let Some(raw) = self.raw("weight") else {
            if self.raw("weight_params").is_some() {
                return Err(ConfigError::new("weight_params", "given without `weight`"));
            }
            return Ok(default);
        };
        let bad = |m: String| ConfigError::new("weight", m);
        if let Some(params) = self.list::<f64>("weight_params")? {
            let name = raw.trim();
            return params
                .iter()
                .map(|a| {
                    format!("{name}:{a}")
                        .parse::<WeightFamily>()
                        .map_err(|e| bad(e.to_string()))
                })
                .collect();
        }
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<WeightFamily>()
                    .map_err(|e| bad(e.to_string()))
            })
            .collect()
    }

    pub fn trials_or(&self, default: usize) -> ConfigResult<usize> {
        let t = self.get_or("trials", default)?;
        if t == 0 {
            return Err(ConfigError::new("trials", "must be positive"));
        }
        Ok(t)
    }
}

fn parse_seed(raw: &str) -> Result<u64, String> {
    let raw = raw.trim();
    let parsed = match raw.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => raw.replace('_', "").parse(),
    };
    parsed.map_err(|_| format!("not a 64-bit unsigned integer: `{raw}`"))
}

/// Reads `VARMULT_SEED`, if set.
pub fn seed_from_env() -> ConfigResult<Option<u64>> {
    match std::env::var("VARMULT_SEED") {
        Ok(v) => parse_seed(&v)
            .map(Some)
            .map_err(|m| ConfigError::new("VARMULT_SEED", m)),
        Err(_) => Ok(None),
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
