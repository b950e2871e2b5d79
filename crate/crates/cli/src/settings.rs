//! Flag, config-file and manifest handling.
//!
//! A config file is flat `key = value` text with `#` comments. A manifest is
//! the same format, so a manifest written by one run can be fed back with
//! `--config` to reproduce it. Flags always win over file values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use emc_core::{tau_for, EmcConfig, EmcError};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = concat!("emc ", env!("CARGO_PKG_VERSION"));

/// Keys every manifest carries that no command reads back.
const BOOKKEEPING: [&str; 2] = ["command", "version"];

#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Markov order
    #[arg(long)]
    pub k: Option<usize>,
    /// Alphabet size
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub lambda_fast: Option<f64>,
    #[arg(long)]
    pub lambda_slow: Option<f64>,
    /// Entropy regulation weight
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta_fast: Option<f64>,
    #[arg(long)]
    pub delta_slow: Option<f64>,
    #[arg(long)]
    pub eta_fast: Option<f64>,
    #[arg(long)]
    pub eta_slow: Option<f64>,
    /// Check interval; defaults to round(1 / (1 - lambda_slow))
    #[arg(long)]
    pub tau: Option<u64>,
}

impl ModelArgs {
    pub fn any_set(&self) -> bool {
        self.k.is_some()
            || self.m.is_some()
            || self.lambda_fast.is_some()
            || self.lambda_slow.is_some()
            || self.beta.is_some()
            || self.delta_fast.is_some()
            || self.delta_slow.is_some()
            || self.eta_fast.is_some()
            || self.eta_slow.is_some()
            || self.tau.is_some()
    }
}

pub const MODEL_KEYS: [&str; 10] = [
    "k",
    "m",
    "lambda_fast",
    "lambda_slow",
    "beta",
    "delta_fast",
    "delta_slow",
    "eta_fast",
    "eta_slow",
    "tau",
];

/// Parsed config file plus the problems found while reading values from it.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    source: Option<PathBuf>,
    errors: Vec<String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut settings = Self::parse(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        settings.source = Some(path.to_path_buf());
        Ok(settings)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected `key = value`", i + 1));
            };
            let key = key.trim().replace('-', "_");
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(format!("line {}: duplicate key `{key}`", i + 1));
            }
        }
        Ok(Self {
            values,
            source: None,
            errors: Vec::new(),
        })
    }

    /// Flag value if given, else the file value, else `None`.
    pub fn get<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Option<T> {
        if flag.is_some() {
            return flag;
        }
        let raw = self.values.get(key)?;
        match raw.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors
                    .push(format!("{key} = {raw:?} is not a valid value"));
                None
            }
        }
    }

    pub fn path(&self, key: &str, flag: Option<PathBuf>) -> Option<PathBuf> {
        flag.or_else(|| self.values.get(key).map(PathBuf::from))
    }

    /// Fails listing every bad value and every key not in `known`.
    pub fn finish(&mut self, known: &[&str]) -> CliResult<()> {
        for key in self.values.keys() {
            if !known.contains(&key.as_str()) && !BOOKKEEPING.contains(&key.as_str()) {
                self.errors.push(format!("unknown config key `{key}`"));
            }
        }
        if self.errors.is_empty() {
            return Ok(());
        }
        let prefix = match &self.source {
            Some(p) => format!("{}: ", p.display()),
            None => String::new(),
        };
        Err(CliError::Validation(format!(
            "{prefix}{}",
            self.errors.join("; ")
        )))
    }

    pub fn has_any(&self, keys: &[&str]) -> bool {
        keys.iter().any(|k| self.values.contains_key(*k))
    }

    /// Resolves the model parameters. `k` and `m` fall back to `shape`, and
    /// `k` alone to 1.
    pub fn model(&mut self, args: &ModelArgs, shape: Option<(usize, usize)>) -> Option<EmcConfig> {
        let k = self.get("k", args.k).or(shape.map(|s| s.0)).unwrap_or(1);
        let m = self.get("m", args.m).or(shape.map(|s| s.1));
        // m = 0 is a placeholder so the remaining keys are still checked
        let base = EmcConfig::defaults(k, m.unwrap_or(0));
        let lambda_slow = self
            .get("lambda_slow", args.lambda_slow)
            .unwrap_or(base.lambda_slow);
        let config = EmcConfig {
            lambda_fast: self
                .get("lambda_fast", args.lambda_fast)
                .unwrap_or(base.lambda_fast),
            lambda_slow,
            beta: self.get("beta", args.beta).unwrap_or(base.beta),
            delta_fast: self
                .get("delta_fast", args.delta_fast)
                .unwrap_or(base.delta_fast),
            delta_slow: self
                .get("delta_slow", args.delta_slow)
                .unwrap_or(base.delta_slow),
            eta_fast: self.get("eta_fast", args.eta_fast).unwrap_or(base.eta_fast),
            eta_slow: self.get("eta_slow", args.eta_slow).unwrap_or(base.eta_slow),
            tau: self
                .get("tau", args.tau)
                .unwrap_or_else(|| tau_for(lambda_slow)),
            ..base
        };
        if m.is_none() {
            self.errors
                .push("alphabet size m is required (--m)".to_string());
            return None;
        }
        Some(config)
    }
}

/// Validates a resolved config, reporting every violation at once.
pub fn validated(config: EmcConfig) -> CliResult<EmcConfig> {
    match config.validate() {
        Ok(()) => Ok(config),
        Err(EmcError::Config(errs)) => Err(CliError::Validation(format!("invalid config: {errs}"))),
        Err(e) => Err(e.into()),
    }
}

/// Everything needed to regenerate a command's output.
#[derive(Debug, Clone)]
pub struct RunManifest {
    command: &'static str,
    entries: Vec<(&'static str, String)>,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            entries: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &'static str, value: impl ToString) -> &mut Self {
        self.entries.push((key, value.to_string()));
        self
    }

    pub fn path(&mut self, key: &'static str, path: Option<&Path>) -> &mut Self {
        match path {
            Some(p) => self.set(key, p.display()),
            None => self.set(key, "-"),
        }
    }

    pub fn config(&mut self, c: &EmcConfig) -> &mut Self {
        self.set("k", c.order)
            .set("m", c.alphabet_size)
            .set("lambda_fast", c.lambda_fast)
            .set("lambda_slow", c.lambda_slow)
            .set("beta", c.beta)
            .set("delta_fast", c.delta_fast)
            .set("delta_slow", c.delta_slow)
            .set("eta_fast", c.eta_fast)
            .set("eta_slow", c.eta_slow)
            .set("tau", c.tau)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", self.command);
        let _ = writeln!(out, "version = {VERSION}");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Writes next to `output` as `<output>.manifest`, or to stderr when the
    /// output is stdout.
    pub fn emit(&self, output: Option<&Path>) -> CliResult<()> {
        match output {
            Some(path) => {
                let target = manifest_path(path);
                fs::write(&target, self.render()).map_err(|e| CliError::io(&target, e))
            }
            None => {
                eprint!("{}", self.render());
                Ok(())
            }
        }
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// `None` for `-`, so `--output -` means stdout.
pub fn real_path(path: Option<PathBuf>) -> Option<PathBuf> {
    path.filter(|p| p.as_os_str() != "-")
}
