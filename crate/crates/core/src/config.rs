//! Flat `key = value` configuration files with `[section]` headers.
//!
//! Lines starting with `#` or `;` are comments, as is anything after ` #` on a
//! value line. Keys are unique within a section. Every diagnostic names the
//! line and the `[section] key` it concerns.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub section: Option<String>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        match (&self.section, &self.key) {
            (Some(s), Some(k)) => write!(f, "[{s}] {k}: ")?,
            (Some(s), None) => write!(f, "[{s}]: ")?,
            _ => {}
        }
        f.write_str(&self.message)
    }
}

impl ConfigError {
    fn at_line(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            section: None,
            key: None,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    sections: BTreeMap<String, Section>,
}

fn strip_comment(line: &str) -> &str {
    let t = line.trim();
    if t.starts_with('#') || t.starts_with(';') {
        return "";
    }
    match t.find(" #") {
        Some(i) => t[..i].trim_end(),
        None => t,
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

impl FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = strip_comment(raw);
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at_line(line, "unterminated section header"))?
                    .trim()
                    .to_ascii_lowercase();
                if !valid_name(&name) {
                    return Err(ConfigError::at_line(
                        line,
                        format!("invalid section name `{name}`"),
                    ));
                }
                if let Some(prev) = sections.get(&name) {
                    return Err(ConfigError::at_line(
                        line,
                        format!("section [{name}] already opened on line {}", prev.line),
                    ));
                }
                sections.insert(
                    name.clone(),
                    Section {
                        line,
                        entries: BTreeMap::new(),
                    },
                );
                current = Some(name);
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| {
                ConfigError::at_line(line, format!("expected `key = value`, found `{body}`"))
            })?;
            let key = key.trim().to_ascii_lowercase();
            let Some(section_name) = current.clone() else {
                return Err(ConfigError::at_line(
                    line,
                    format!("key `{key}` appears before any [section]"),
                ));
            };
            let err = |message: String| ConfigError {
                line: Some(line),
                section: Some(section_name.clone()),
                key: Some(key.clone()),
                message,
            };
            if !valid_name(&key) {
                return Err(err("invalid key name".into()));
            }
            let value = value.trim();
            if value.is_empty() {
                return Err(err("empty value".into()));
            }
            let section = sections
                .get_mut(&section_name)
                .expect("current section exists");
            if let Some(prev) = section.entries.get(&key) {
                return Err(err(format!(
                    "duplicate key (first set on line {})",
                    prev.line
                )));
            }
            section.entries.insert(
                key,
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self { sections })
    }
}

/// Values that can be read out of a config entry.
pub trait ConfigValue: Sized {
    const EXPECTED: &'static str;
    fn parse_value(raw: &str) -> Option<Self>;
}

impl ConfigValue for f64 {
    const EXPECTED: &'static str = "a finite number";
    fn parse_value(raw: &str) -> Option<Self> {
        raw.parse::<f64>().ok().filter(|v| v.is_finite())
    }
}

impl ConfigValue for usize {
    const EXPECTED: &'static str = "a non-negative integer";
    fn parse_value(raw: &str) -> Option<Self> {
        raw.parse().ok()
    }
}

impl ConfigValue for i32 {
    const EXPECTED: &'static str = "an integer";
    fn parse_value(raw: &str) -> Option<Self> {
        raw.parse().ok()
    }
}

impl ConfigValue for bool {
    const EXPECTED: &'static str = "true or false";
    fn parse_value(raw: &str) -> Option<Self> {
        match raw.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Some(true),
            "false" | "no" | "off" | "0" => Some(false),
            _ => None,
        }
    }
}

impl ConfigValue for String {
    const EXPECTED: &'static str = "text";
    fn parse_value(raw: &str) -> Option<Self> {
        Some(raw.to_string())
    }
}

impl ConfigValue for Vec<f64> {
    const EXPECTED: &'static str = "a comma-separated list of finite numbers";
    fn parse_value(raw: &str) -> Option<Self> {
        raw.split(',').map(|s| f64::parse_value(s.trim())).collect()
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            section: None,
            key: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        text.parse()
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.sections
            .get(section)
            .is_some_and(|s| s.entries.contains_key(key))
    }

    pub fn keys(&self, section: &str) -> Vec<&str> {
        self.sections
            .get(section)
            .map(|s| s.entries.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// Error tied to an existing entry, or to the section when the key is absent.
    pub fn error(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        let line = self
            .sections
            .get(section)
            .map(|s| s.entries.get(key).map(|e| e.line).unwrap_or(s.line));
        ConfigError {
            line,
            section: Some(section.to_string()),
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    pub fn optional<T: ConfigValue>(
        &self,
        section: &str,
        key: &str,
    ) -> Result<Option<T>, ConfigError> {
        let Some(entry) = self.sections.get(section).and_then(|s| s.entries.get(key)) else {
            return Ok(None);
        };
        T::parse_value(&entry.value).map(Some).ok_or_else(|| {
            self.error(
                section,
                key,
                format!("expected {}, got `{}`", T::EXPECTED, entry.value),
            )
        })
    }

    pub fn require<T: ConfigValue>(&self, section: &str, key: &str) -> Result<T, ConfigError> {
        if !self.has_section(section) {
            return Err(ConfigError {
                line: None,
                section: Some(section.to_string()),
                key: Some(key.to_string()),
                message: "missing section".into(),
            });
        }
        self.optional(section, key)?
            .ok_or_else(|| self.error(section, key, "missing required key"))
    }

    pub fn or<T: ConfigValue>(
        &self,
        section: &str,
        key: &str,
        default: T,
    ) -> Result<T, ConfigError> {
        Ok(self.optional(section, key)?.unwrap_or(default))
    }

    /// A required value that must be strictly positive.
    pub fn positive(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        let v: f64 = self.require(section, key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.error(section, key, format!("must be positive, got {v}")))
        }
    }

    /// `(lo, hi)` from `<prefix>_min` / `<prefix>_max` with `lo < hi`.
    pub fn range(&self, section: &str, prefix: &str) -> Result<(f64, f64), ConfigError> {
        let lo_key = format!("{prefix}_min");
        let hi_key = format!("{prefix}_max");
        let lo: f64 = self.require(section, &lo_key)?;
        let hi: f64 = self.require(section, &hi_key)?;
        if lo < hi {
            Ok((lo, hi))
        } else {
            Err(self.error(
                section,
                &hi_key,
                format!("empty range: {lo_key} = {lo} is not below {hi}"),
            ))
        }
    }

    /// A sample count of at least `min`.
    pub fn count(&self, section: &str, key: &str, min: usize) -> Result<usize, ConfigError> {
        let n: usize = self.require(section, key)?;
        if n >= min {
            Ok(n)
        } else {
            Err(self.error(section, key, format!("must be at least {min}, got {n}")))
        }
    }

    /// Case-insensitive choice among `options`.
    pub fn choice(
        &self,
        section: &str,
        key: &str,
        options: &[&str],
    ) -> Result<String, ConfigError> {
        let raw: String = self.require(section, key)?;
        let v = raw.to_ascii_lowercase();
        if options.contains(&v.as_str()) {
            Ok(v)
        } else {
            Err(self.error(
                section,
                key,
                format!(
                    "unknown value `{raw}`; expected one of {}",
                    options.join(", ")
                ),
            ))
        }
    }
}
