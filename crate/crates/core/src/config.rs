//! Flat `key = value` configuration files.
//!
//! The grid runner and the synthetic-profile loader share this format: one
//! assignment per line, dotted keys as a flat namespace (`svm.lambda = 0.0001`),
//! `#` comments, blank lines ignored. There is deliberately no nesting and no
//! type syntax; every value is a string until a typed getter asks for it, and
//! getter errors always name the offending key.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("`{key}`: expected {expected}, got {value:?}")]
    BadValue {
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("`{key}`: {message}")]
    OutOfRange { key: String, message: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
}

/// Parsed flat configuration: ordered key/value pairs.
#[derive(Debug, Clone, Default)]
pub struct FlatConfig {
    entries: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    text: line.to_string(),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    text: line.to_string(),
                });
            }
            if entries.contains_key(&key) {
                return Err(ConfigError::DuplicateKey { line: line_no, key });
            }
            entries.insert(key, value);
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// All keys sharing a dotted prefix, e.g. `author.0.`.
    pub fn keys_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a str> {
        self.entries
            .keys()
            .map(String::as_str)
            .filter(move |k| k.starts_with(prefix))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                expected: "a non-negative integer",
                value: v.to_string(),
            }),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                expected: "a non-negative integer",
                value: v.to_string(),
            }),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                expected: "a number",
                value: v.to_string(),
            }),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(ConfigError::BadValue {
                key: key.to_string(),
                expected: "true or false",
                value: v.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_blanks() {
        let cfg = FlatConfig::parse("# grid\nsplit.seed = 42\n\nnb.alpha = 1.5\n").unwrap();
        assert_eq!(cfg.get("split.seed"), Some("42"));
        assert_eq!(cfg.f64_or("nb.alpha", 1.0).unwrap(), 1.5);
        assert_eq!(cfg.u64_or("missing", 7).unwrap(), 7);
    }

    #[test]
    fn rejects_bad_syntax_and_duplicates() {
        assert!(matches!(
            FlatConfig::parse("just words"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            FlatConfig::parse("a = 1\na = 2"),
            Err(ConfigError::DuplicateKey { line: 2, .. })
        ));
    }

    #[test]
    fn typed_getter_errors_name_the_key() {
        let cfg = FlatConfig::parse("svm.lambda = banana").unwrap();
        let err = cfg.f64_or("svm.lambda", 1.0).unwrap_err();
        assert!(err.to_string().contains("svm.lambda"));
    }
}
