//! The settings file and the environment.
//!
//! The file is a list of `key = value` lines, optionally grouped under
//! `[section]` headers; a key inside a section is addressed as
//! `section.key`. Lines whose first non-blank character is `#` are
//! comments. A `#` later in a line is part of the value, so fragment URIs
//! need no quoting. A value wrapped in double quotes may contain `\"` and
//! `\\`. Repeating a key is an error except for `serve.rebase`.

use std::fmt;
use std::num::NonZeroU64;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use ore_core::WireFormat;
use ore_http::PublishScenario;
use thiserror::Error;

pub const TIMEOUT_ENV: &str = "ORE_TIMEOUT_MS";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: {key} is already set on line {first}")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: bad value for {key}: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("{TIMEOUT_ENV}: {0:?} is not a positive whole number of milliseconds")]
    Timeout(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parses the key=value dialect into entries in file order.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut section = String::new();
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "section header is missing ']'".into(),
            })?;
            let name = name.trim();
            if !is_key(name) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("bad section name {name:?}"),
                });
            }
            section = name.to_owned();
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: "expected key = value".into(),
        })?;
        let key = key.trim();
        if !is_key(key) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("bad key {key:?}"),
            });
        }
        let value = unquote(value.trim()).map_err(|message| ConfigError::Syntax { line, message })?;
        let key = if section.is_empty() {
            key.to_owned()
        } else {
            format!("{section}.{key}")
        };
        entries.push(Entry { key, value, line });
    }
    Ok(entries)
}

fn is_key(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn unquote(value: &str) -> Result<String, String> {
    let Some(inner) = value.strip_prefix('"') else {
        return Ok(value.to_owned());
    };
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '"' => {
                return match chars.as_str().trim() {
                    "" => Ok(out),
                    rest => Err(format!("unexpected {rest:?} after closing quote")),
                }
            }
            '\\' => match chars.next() {
                Some(e @ ('"' | '\\')) => out.push(e),
                Some(e) => return Err(format!("unknown escape \\{e}")),
                None => break,
            },
            c => out.push(c),
        }
    }
    Err("unterminated quoted value".into())
}

/// Everything the settings file can say. Unset keys are `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    pub timeout_ms: Option<u64>,
    pub max_redirects: Option<usize>,
    pub serve: ServeConfig,
    pub fetch: FetchConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ServeConfig {
    pub bind: Option<String>,
    pub authority: Option<String>,
    pub scenario: Option<PublishScenario>,
    pub default_format: Option<WireFormat>,
    pub workers: Option<usize>,
    pub lenient: Option<bool>,
    pub allow_lossy_atom: Option<bool>,
    pub rebase: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FetchConfig {
    pub workers: Option<usize>,
    pub delay_ms: Option<u64>,
    pub max_depth: Option<usize>,
    pub format: Option<WireFormat>,
}

fn typed<T: FromStr>(e: &Entry) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    e.value.parse().map_err(|err: T::Err| ConfigError::Value {
        line: e.line,
        key: e.key.clone(),
        message: err.to_string(),
    })
}

fn set<T>(slot: &mut Option<(T, usize)>, value: T, e: &Entry) -> Result<(), ConfigError> {
    if let Some((_, first)) = slot {
        return Err(ConfigError::Duplicate {
            line: e.line,
            key: e.key.clone(),
            first: *first,
        });
    }
    *slot = Some((value, e.line));
    Ok(())
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        #[derive(Default)]
        struct Seen {
            timeout_ms: Option<(u64, usize)>,
            max_redirects: Option<(usize, usize)>,
            bind: Option<(String, usize)>,
            authority: Option<(String, usize)>,
            scenario: Option<(PublishScenario, usize)>,
            default_format: Option<(WireFormat, usize)>,
            workers: Option<(usize, usize)>,
            lenient: Option<(bool, usize)>,
            allow_lossy_atom: Option<(bool, usize)>,
            fetch_workers: Option<(usize, usize)>,
            delay_ms: Option<(u64, usize)>,
            max_depth: Option<(usize, usize)>,
            format: Option<(WireFormat, usize)>,
        }
        let mut s = Seen::default();
        let mut rebase = Vec::new();
        for e in parse_entries(text)? {
            match e.key.as_str() {
                "client.timeout_ms" => set(&mut s.timeout_ms, typed::<NonZeroU64>(&e)?.get(), &e)?,
                "client.max_redirects" => set(&mut s.max_redirects, typed(&e)?, &e)?,
                "serve.bind" => set(&mut s.bind, e.value.clone(), &e)?,
                "serve.authority" => set(&mut s.authority, e.value.clone(), &e)?,
                "serve.scenario" => set(&mut s.scenario, typed(&e)?, &e)?,
                "serve.default_format" => set(&mut s.default_format, typed(&e)?, &e)?,
                "serve.workers" => set(&mut s.workers, typed(&e)?, &e)?,
                "serve.lenient" => set(&mut s.lenient, typed(&e)?, &e)?,
                "serve.allow_lossy_atom" => set(&mut s.allow_lossy_atom, typed(&e)?, &e)?,
                "serve.rebase" => rebase.push(e.value.clone()),
                "fetch.workers" => set(&mut s.fetch_workers, typed(&e)?, &e)?,
                "fetch.delay_ms" => set(&mut s.delay_ms, typed(&e)?, &e)?,
                "fetch.max_depth" => set(&mut s.max_depth, typed(&e)?, &e)?,
                "fetch.format" => set(&mut s.format, typed(&e)?, &e)?,
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: e.line,
                        key: e.key,
                    })
                }
            }
        }
        fn v<T>(o: Option<(T, usize)>) -> Option<T> {
            o.map(|(v, _)| v)
        }
        Ok(Config {
            timeout_ms: v(s.timeout_ms),
            max_redirects: v(s.max_redirects),
            serve: ServeConfig {
                bind: v(s.bind),
                authority: v(s.authority),
                scenario: v(s.scenario),
                default_format: v(s.default_format),
                workers: v(s.workers),
                lenient: v(s.lenient),
                allow_lossy_atom: v(s.allow_lossy_atom),
                rebase,
            },
            fetch: FetchConfig {
                workers: v(s.fetch_workers),
                delay_ms: v(s.delay_ms),
                max_depth: v(s.max_depth),
                format: v(s.format),
            },
        })
    }

    pub fn load(path: &Path) -> anyhow::Result<Config> {
        use anyhow::Context;
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// The environment variable wins over the file; both fall back to 10 s.
    pub fn timeout(&self, env_value: Option<&str>) -> Result<Duration, ConfigError> {
        if let Some(raw) = env_value {
            return raw
                .trim()
                .parse::<NonZeroU64>()
                .map(|ms| Duration::from_millis(ms.get()))
                .map_err(|_| ConfigError::Timeout(raw.to_owned()));
        }
        Ok(self.timeout_ms.map_or(DEFAULT_TIMEOUT, Duration::from_millis))
    }
}
