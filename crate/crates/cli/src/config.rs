//! Settings resolution: command-line flag, then `key = value` file, then default.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Plain-text config: one `key = value` per line, `#` starts a comment.
/// Keys use the long flag names (`z-angle`, `samples`, ...).
pub fn parse_config(text: &str) -> Result<HashMap<String, String>, CliError> {
    let mut map = HashMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {key}", no + 1)));
        }
    }
    Ok(map)
}

pub struct Resolver {
    file: HashMap<String, String>,
    used: BTreeSet<String>,
    resolved: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> Result<Self, CliError> {
        let file = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_config(&text)?
            }
            None => HashMap::new(),
        };
        Ok(Self {
            file,
            used: BTreeSet::new(),
            resolved: BTreeMap::new(),
        })
    }

    fn lookup<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        match self.file.get(key) {
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
            None => Ok(None),
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, v: &T) {
        let value = serde_json::to_value(v).unwrap_or(Value::Null);
        self.resolved.insert(key.to_string(), value);
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let file = self.lookup(key)?;
        let v = flag.or(file).unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    /// Like [`Resolver::get`] with no default.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let file = self.lookup(key)?;
        let v = flag.or(file);
        self.record(key, &v);
        Ok(v)
    }

    pub fn path(&mut self, key: &str, flag: Option<PathBuf>, default: &str) -> Result<PathBuf, CliError> {
        let file: Option<String> = self.lookup(key)?;
        let v = flag
            .or(file.map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(default));
        self.record(key, &v.display().to_string());
        Ok(v)
    }

    pub fn optional_path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
        let file: Option<String> = self.lookup(key)?;
        let v = flag.or(file.map(PathBuf::from));
        self.record(key, &v.as_ref().map(|p| p.display().to_string()));
        Ok(v)
    }

    /// Fails on config keys the command never asked for.
    pub fn finish(self) -> Result<BTreeMap<String, Value>, CliError> {
        let unknown: Vec<&String> = self.file.keys().filter(|k| !self.used.contains(*k)).collect();
        if let Some(k) = unknown.into_iter().min() {
            return Err(CliError::Usage(format!("unknown config key {k}")));
        }
        Ok(self.resolved)
    }
}

/// `ω`: a decimal in `[0, 1)` or `golden`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Omega(pub f64);

impl FromStr for Omega {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = match s.trim() {
            "golden" => skewspec_core::torus::GOLDEN,
            t => t.parse::<f64>().map_err(|e| format!("ω = {t}: {e}"))?,
        };
        if !(0.0..1.0).contains(&v) {
            return Err(format!("ω = {v} must lie in [0, 1)"));
        }
        Ok(Omega(v))
    }
}

impl Serialize for Omega {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

/// Comma-separated list, e.g. `32,64,128`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|p| p.trim().parse::<T>().map_err(|e| format!("{p}: {e}")))
            .collect::<Result<Vec<T>, _>>()
            .map(List)
    }
}
