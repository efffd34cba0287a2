//! Run configuration: built-in defaults, `key=value` config files, validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Affinity-propagation self-similarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preference {
    /// Median of the off-diagonal affinities.
    Median,
    Value(f64),
}

impl FromStr for Preference {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("median") {
            return Ok(Preference::Median);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Preference::Value(v)),
            _ => Err(format!("expected a number or `median`, got {s:?}")),
        }
    }
}

impl fmt::Display for Preference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preference::Median => f.write_str("median"),
            Preference::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Preference {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Preference::Median => s.serialize_str("median"),
            Preference::Value(v) => s.serialize_f64(*v),
        }
    }
}

/// Kernel bandwidth for gap density curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Scott,
    Fixed(f64),
}

impl FromStr for Bandwidth {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("scott") {
            return Ok(Bandwidth::Scott);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Bandwidth::Fixed(v)),
            _ => Err(format!("expected a positive number or `scott`, got {s:?}")),
        }
    }
}

impl Serialize for Bandwidth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bandwidth::Scott => s.serialize_str("scott"),
            Bandwidth::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Decay time constant in seconds.
    pub t_p: f64,
    /// Replace the decay matrix by all ones (the infinite time constant limit).
    pub no_decay: bool,
    /// Minimum average internal affinity for a cluster to survive.
    pub delta: f64,
    pub preference: Preference,
    pub damping: f64,
    pub max_iterations: usize,
    pub stable_iterations: usize,
    pub window_seconds: Option<u64>,
    pub min_cluster_size: usize,
    pub spam_duplicate_threshold: usize,
    pub bucket_width: f64,
    pub max_gap: f64,
    pub min_pairs_per_bucket: usize,
    pub kde_bandwidth: Bandwidth,
    pub purity_floor: f64,
    pub rng_seed: u64,
    pub stopwords: Option<PathBuf>,
    pub dump_affinity: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_p: 120.0,
            no_decay: false,
            delta: 0.25,
            preference: Preference::Median,
            damping: 0.7,
            max_iterations: 400,
            stable_iterations: 25,
            window_seconds: None,
            min_cluster_size: 2,
            spam_duplicate_threshold: 3,
            bucket_width: 10.0,
            max_gap: 600.0,
            min_pairs_per_bucket: 20,
            kde_bandwidth: Bandwidth::Scott,
            purity_floor: 0.6,
            rng_seed: 0,
            stopwords: None,
            dump_affinity: None,
        }
    }
}

/// Keys accepted by [`RunConfig::set`] and in config files.
pub const CONFIG_KEYS: &[&str] = &[
    "t_p",
    "no_decay",
    "delta",
    "preference",
    "damping",
    "max_iterations",
    "stable_iterations",
    "window_seconds",
    "min_cluster_size",
    "spam_duplicate_threshold",
    "bucket_width",
    "max_gap",
    "min_pairs_per_bucket",
    "kde_bandwidth",
    "purity_floor",
    "rng_seed",
    "stopwords",
    "dump_affinity",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| Error::config(key, format!("{value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::config(
            key,
            format!("expected a boolean, got {other:?}"),
        )),
    }
}

impl RunConfig {
    /// Sets one field from its textual form. Does not validate bounds; call
    /// [`RunConfig::validate`] once all overrides are applied.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "t_p" => self.t_p = parse(key, value)?,
            "no_decay" => self.no_decay = parse_bool(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "preference" => self.preference = parse(key, value)?,
            "damping" => self.damping = parse(key, value)?,
            "max_iterations" => self.max_iterations = parse(key, value)?,
            "stable_iterations" => self.stable_iterations = parse(key, value)?,
            "window_seconds" => {
                self.window_seconds = match value.trim() {
                    "" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "min_cluster_size" => self.min_cluster_size = parse(key, value)?,
            "spam_duplicate_threshold" => self.spam_duplicate_threshold = parse(key, value)?,
            "bucket_width" => self.bucket_width = parse(key, value)?,
            "max_gap" => self.max_gap = parse(key, value)?,
            "min_pairs_per_bucket" => self.min_pairs_per_bucket = parse(key, value)?,
            "kde_bandwidth" => self.kde_bandwidth = parse(key, value)?,
            "purity_floor" => self.purity_floor = parse(key, value)?,
            "rng_seed" => self.rng_seed = parse(key, value)?,
            "stopwords" => self.stopwords = Some(PathBuf::from(value.trim())),
            "dump_affinity" => self.dump_affinity = Some(PathBuf::from(value.trim())),
            _ => return Err(Error::config(key, "unknown configuration key")),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", i + 1),
                    format!("expected key=value, got {line:?}"),
                )
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &str, msg: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::config(field, msg))
            }
        }
        check(self.t_p > 0.0 && !self.t_p.is_nan(), "t_p", "must be > 0")?;
        check(
            (0.0..=1.0).contains(&self.delta),
            "delta",
            "must lie in [0, 1]",
        )?;
        check(
            (0.5..1.0).contains(&self.damping),
            "damping",
            "must lie in [0.5, 1)",
        )?;
        check(
            self.max_iterations > 0,
            "max_iterations",
            "must be positive",
        )?;
        check(
            self.stable_iterations > 0,
            "stable_iterations",
            "must be positive",
        )?;
        check(
            self.window_seconds != Some(0),
            "window_seconds",
            "must be positive",
        )?;
        check(
            self.min_cluster_size > 0,
            "min_cluster_size",
            "must be positive",
        )?;
        check(
            self.spam_duplicate_threshold >= 2,
            "spam_duplicate_threshold",
            "must be at least 2",
        )?;
        check(
            self.bucket_width > 0.0 && self.bucket_width.is_finite(),
            "bucket_width",
            "must be > 0",
        )?;
        check(
            self.max_gap > 0.0 && self.max_gap.is_finite(),
            "max_gap",
            "must be > 0",
        )?;
        check(
            self.min_pairs_per_bucket > 0,
            "min_pairs_per_bucket",
            "must be positive",
        )?;
        check(
            self.purity_floor > 0.5 && self.purity_floor <= 1.0,
            "purity_floor",
            "must lie in (0.5, 1]",
        )?;
        Ok(())
    }

    /// The time constant actually applied to the decay matrix.
    pub fn effective_t_p(&self) -> f64 {
        if self.no_decay {
            f64::INFINITY
        } else {
            self.t_p
        }
    }
}
