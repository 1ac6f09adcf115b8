//! Flat `key = value` config files. Keys mirror the long CLI flags, with
//! dashes and underscores interchangeable; `#` starts a comment.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got `{line}`", i + 1)))?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", i + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(Self {
            entries,
            used: RefCell::default(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let value = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(value)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.optional(key)?
            .ok_or_else(|| Error::Config(format!("missing config key `{key}`")))
    }

    pub fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.optional(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key).map(|v| parse_list(v).map_err(|e| Error::Config(format!("config key `{key}`: {e}")))).transpose()
    }

    /// Fails on keys no caller asked about.
    pub fn reject_unused(&self) -> Result<()> {
        self.reject_unknown(&[])
    }

    /// Fails on keys that were neither read nor listed in `also_known`.
    pub fn reject_unknown(&self, also_known: &[&str]) -> Result<()> {
        let used = self.used.borrow();
        match self
            .entries
            .keys()
            .find(|k| !used.contains(*k) && !also_known.contains(&k.as_str()))
        {
            Some(k) => Err(Error::Config(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| format!("cannot parse list item `{p}`")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let kv = KeyValues::parse("# header\nn = 10\nlr-grid = 1e-3, 3e-3 # trailing\n\n").unwrap();
        assert_eq!(kv.require::<usize>("n").unwrap(), 10);
        assert_eq!(kv.list::<f64>("lr_grid").unwrap().unwrap(), vec![1e-3, 3e-3]);
        kv.reject_unused().unwrap();
    }

    #[test]
    fn errors_name_the_key() {
        let kv = KeyValues::parse("n = ten\nextra = 1").unwrap();
        let e = kv.require::<usize>("m").unwrap_err().to_string();
        assert!(e.contains("`m`"), "{e}");
        let e = kv.require::<usize>("n").unwrap_err().to_string();
        assert!(e.contains("`n`"), "{e}");
        let e = kv.reject_unused().unwrap_err().to_string();
        assert!(e.contains("`extra`"), "{e}");
        assert!(KeyValues::parse("a = 1\na = 2").is_err());
        assert!(KeyValues::parse("novalue").is_err());
    }
}
