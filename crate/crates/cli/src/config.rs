//! Strict flat key=value experiment configs.
//!
//! One `key=value` per line; blank lines and `#` comments are allowed.
//! Sequences are comma-separated, fractions are exact (`3/5`). Unknown keys
//! are rejected so a config cannot silently misspell a parameter.

use limsup_core::exact::Rat;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Parse { line: usize, msg: String },
    UnknownKey(String),
    MissingRequired(String),
    BadValue { key: String, msg: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, msg } => write!(f, "line {line}: {msg}"),
            ConfigError::UnknownKey(k) => write!(f, "unknown key `{k}`"),
            ConfigError::MissingRequired(k) => write!(f, "missing required key `{k}`"),
            ConfigError::BadValue { key, msg } => write!(f, "bad value for `{key}`: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    DimEval,
    DimSearch,
    Solve,
    Certify,
    MeasureScan,
    BoxDim,
    Series,
    Ubiquity,
}

impl Command {
    pub fn from_token(tok: &str) -> Option<Command> {
        Some(match tok {
            "dim_eval" => Command::DimEval,
            "dim_search" => Command::DimSearch,
            "solve" => Command::Solve,
            "certify" => Command::Certify,
            "measure_scan" => Command::MeasureScan,
            "box_dim" => Command::BoxDim,
            "series" => Command::Series,
            "ubiquity" => Command::Ubiquity,
            _ => return None,
        })
    }

    pub fn token(&self) -> &'static str {
        match self {
            Command::DimEval => "dim_eval",
            Command::DimSearch => "dim_search",
            Command::Solve => "solve",
            Command::Certify => "certify",
            Command::MeasureScan => "measure_scan",
            Command::BoxDim => "box_dim",
            Command::Series => "series",
            Command::Ubiquity => "ubiquity",
        }
    }

    /// (required, optional) keys besides `command`.
    fn schema(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Command::DimEval => (&["setting", "tau"], &["m", "n", "seed"]),
            Command::DimSearch => (&["setting", "tau", "resolution"], &["m", "n", "seed"]),
            Command::Solve => (
                &["ring", "matrix", "error", "heights"],
                &["companions", "strategy", "budget", "precision", "seed"],
            ),
            Command::Certify => (
                &["ring", "m", "n", "error", "heights", "trials", "seed"],
                &["companions", "precision"],
            ),
            Command::MeasureScan => (&["specs", "samples", "ladder", "seed"], &[]),
            Command::BoxDim => (&["tau", "q"], &["scales", "seed"]),
            Command::Series => (
                &["m", "n", "tau", "base", "kmax", "rmax"],
                &["seed", "setting", "s", "q_lo", "q_hi"],
            ),
            Command::Ubiquity => {
                (&["tau", "base", "k", "samples", "seed"], &["mode", "multiplier"])
            }
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Command::Certify | Command::MeasureScan | Command::Ubiquity)
    }
}

/// A validated experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: Command,
    keys: BTreeMap<String, String>,
    /// The exact text the config was parsed from (hashed into the manifest).
    pub source: String,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut keys = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: lineno + 1,
                msg: format!("expected key=value, got `{line}`"),
            });
        };
        let k = k.trim().to_string();
        if keys.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Parse {
                line: lineno + 1,
                msg: format!("duplicate key `{k}`"),
            });
        }
    }
    let cmd_tok = keys
        .remove("command")
        .ok_or_else(|| ConfigError::MissingRequired("command".into()))?;
    let command = Command::from_token(&cmd_tok)
        .ok_or_else(|| ConfigError::BadValue { key: "command".into(), msg: cmd_tok.clone() })?;
    let (required, optional) = command.schema();
    for k in keys.keys() {
        if !required.contains(&k.as_str()) && !optional.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
    }
    for k in required {
        if !keys.contains_key(*k) {
            return Err(ConfigError::MissingRequired((*k).into()));
        }
    }
    Ok(ExperimentConfig { command, keys, source: text.to_string() })
}

impl ExperimentConfig {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.keys.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::MissingRequired(key.into()))
    }

    pub fn u64_key(&self, key: &str) -> Result<u64, ConfigError> {
        self.require(key)?
            .parse()
            .map_err(|_| ConfigError::BadValue { key: key.into(), msg: "expected an integer".into() })
    }

    pub fn usize_key(&self, key: &str) -> Result<usize, ConfigError> {
        Ok(self.u64_key(key)? as usize)
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(_) => Ok(Some(self.u64_key(key)?)),
        }
    }

    pub fn rat_key(&self, key: &str) -> Result<Rat, ConfigError> {
        parse_rat(self.require(key)?)
            .ok_or_else(|| ConfigError::BadValue { key: key.into(), msg: "expected a fraction".into() })
    }

    pub fn rat_list(&self, key: &str) -> Result<Vec<Rat>, ConfigError> {
        self.require(key)?
            .split(',')
            .map(|tok| {
                parse_rat(tok).ok_or_else(|| ConfigError::BadValue {
                    key: key.into(),
                    msg: format!("bad fraction `{tok}`"),
                })
            })
            .collect()
    }

    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>, ConfigError> {
        self.require(key)?
            .split(',')
            .map(|tok| {
                tok.trim().parse().map_err(|_| ConfigError::BadValue {
                    key: key.into(),
                    msg: format!("bad integer `{tok}`"),
                })
            })
            .collect()
    }
}

/// Exact fraction literal: `a` or `a/b`.
pub fn parse_rat(tok: &str) -> Option<Rat> {
    let tok = tok.trim();
    if let Some((num, den)) = tok.split_once('/') {
        let n: i64 = num.trim().parse().ok()?;
        let d: i64 = den.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        let n: i64 = tok.parse().ok()?;
        Some(Rat::from_integer(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use limsup_core::exact::rat;

    #[test]
    fn dim_eval_example() {
        let c = parse_config("command=dim_eval\nsetting=padic\nm=2\nn=1\ntau=4").unwrap();
        assert_eq!(c.command, Command::DimEval);
        assert_eq!(c.rat_list("tau").unwrap(), vec![rat(4, 1)]);
    }

    #[test]
    fn exact_fraction_lists() {
        let c = parse_config("command=dim_eval\nsetting=two_dim\ntau=3/2,5").unwrap();
        assert_eq!(c.rat_list("tau").unwrap(), vec![rat(3, 2), rat(5, 1)]);
    }

    #[test]
    fn strictness() {
        assert!(matches!(
            parse_config("command=measure_scan\nspecs=a:1/2,1/2\nsamples=200\nladder=2,4"),
            Err(ConfigError::MissingRequired(k)) if k == "seed"
        ));
        assert!(matches!(
            parse_config("command=dim_eval\nsetting=two_dim\ntau=3,2\nbogus=1"),
            Err(ConfigError::UnknownKey(k)) if k == "bogus"
        ));
        assert!(matches!(
            parse_config("command=dim_eval\nsetting=two_dim\ntau=3,2\ntau=1"),
            Err(ConfigError::Parse { .. })
        ));
    }
}
