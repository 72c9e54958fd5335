//! Resolved key/value settings for one subcommand invocation.
//!
//! Values come from a config file (INI-style, or the `config` object of a
//! previous run's manifest) and are overridden by command-line flags. Every
//! value is kept as text until a command asks for it, so numeric flags and
//! config entries share one parser.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::Ini;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SDNLW_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "sdnlw-out";

#[derive(Debug, Clone)]
pub struct Settings {
    subcommand: String,
    values: BTreeMap<String, String>,
}

fn canonical_key(key: &str) -> String {
    match key {
        "out" => "out_dir".to_string(),
        k => k.replace('-', "_"),
    }
}

/// Decimal with optional exponent, e.g. `0.05`, `1e-4`, `2.5E3`.
pub fn parse_f64(key: &str, text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => return Ok(f64::INFINITY),
        _ => {}
    }
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Validation(format!("--{key}: expected a number, got `{text}`")))
}

/// Non-negative integer; exponent notation such as `1e5` is accepted when
/// the value is integral.
pub fn parse_u64(key: &str, text: &str) -> Result<u64, CliError> {
    let t = text.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v = parse_f64(key, t)?;
    if v < 0.0 || v.fract() != 0.0 || v > 9.007_199_254_740_992e15 {
        return Err(CliError::Validation(format!(
            "--{key}: expected a non-negative integer, got `{text}`"
        )));
    }
    Ok(v as u64)
}

pub fn parse_bool(key: &str, text: &str) -> Result<bool, CliError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(CliError::Validation(format!("--{key}: expected true or false, got `{text}`"))),
    }
}

impl Settings {
    pub fn new(subcommand: &str) -> Self {
        Settings {
            subcommand: subcommand.to_string(),
            values: BTreeMap::new(),
        }
    }

    pub fn subcommand(&self) -> &str {
        &self.subcommand
    }

    /// Global keys of the file, then the `[subcommand]` section on top.
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            return self.load_manifest(&text, path);
        }
        let ini = Ini::load_from_str(&text)
            .map_err(|e| CliError::Validation(format!("malformed config {}: {e}", path.display())))?;
        for section in [None, Some("common"), Some(self.subcommand.as_str())] {
            if let Some(props) = ini.section(section) {
                for (k, v) in props.iter() {
                    self.values.insert(canonical_key(k), v.to_string());
                }
            }
        }
        Ok(())
    }

    fn load_manifest(&mut self, text: &str, path: &Path) -> Result<(), CliError> {
        let bad = |why: &str| CliError::Validation(format!("{}: {why}", path.display()));
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
        let config = v.get("config").and_then(|c| c.as_object()).ok_or_else(|| bad("no `config` object"))?;
        for (k, val) in config {
            let s = val.as_str().ok_or_else(|| bad("config values must be strings"))?;
            self.values.insert(canonical_key(k), s.to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(canonical_key(key), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key)
            .ok_or_else(|| CliError::Validation(format!("missing required flag --{}", flag_name(key))))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_f64(&flag_name(key), self.required(key)?)
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        parse_u64(&flag_name(key), self.required(key)?)
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        Ok(self.u64(key)? as usize)
    }

    /// Optional values: the default is recorded so the manifest holds every
    /// setting the run actually used.
    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        self.values.entry(key.to_string()).or_insert_with(|| format!("{default:?}"));
        self.f64(key)
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        self.values.entry(key.to_string()).or_insert_with(|| default.to_string());
        self.u64(key)
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    pub fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        self.values.entry(key.to_string()).or_insert_with(|| default.to_string());
        parse_bool(&flag_name(key), self.required(key)?)
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> String {
        self.values.entry(key.to_string()).or_insert_with(|| default.to_string()).clone()
    }

    pub fn path(&self, key: &str) -> Result<PathBuf, CliError> {
        Ok(PathBuf::from(self.required(key)?))
    }

    /// `--out`, then `out_dir` from the config, then the environment.
    pub fn out_dir(&mut self) -> PathBuf {
        if self.raw("out_dir").is_none() {
            let dir = std::env::var(OUT_DIR_ENV).unwrap_or_else(|_| DEFAULT_OUT_DIR.to_string());
            self.set("out_dir", dir);
        }
        PathBuf::from(self.raw("out_dir").unwrap_or(DEFAULT_OUT_DIR))
    }

    /// Whether an output directory was asked for explicitly.
    pub fn has_out_dir(&self) -> bool {
        self.raw("out_dir").is_some() || std::env::var_os(OUT_DIR_ENV).is_some()
    }

    /// The settings that determine the outputs; thread count and output
    /// location are excluded so reruns elsewhere compare equal.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| !matches!(k.as_str(), "threads" | "out_dir" | "config"))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// Flag spelling of a config key (`ess_floor` → `ess-floor`).
pub fn flag_name(key: &str) -> String {
    match key {
        "out_dir" => "out".to_string(),
        k => k.replace('_', "-"),
    }
}
