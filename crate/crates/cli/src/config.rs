//! Flat `key = value` config files and flag/file/default resolution.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};
use termalign::{Error, Result};

/// Parsed config file. Keys use the long flag spelling (`min-count`);
/// underscores are accepted and normalised to dashes.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!("{name}:{}: expected key = value", i + 1)));
            };
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(Error::Config(format!("{name}:{}: empty key", i + 1)));
            }
            values.insert(key, v.trim().trim_matches('"').to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Resolves settings in the order flag, config file, default, and records
/// every resolved value for provenance.
pub struct Resolver<'a> {
    file: &'a ConfigFile,
    pub resolved: Map<String, Value>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Resolver {
            file,
            resolved: Map::new(),
        }
    }

    pub fn pick<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + ToString,
        T::Err: std::fmt::Display,
    {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(s) => s
                    .parse()
                    .map_err(|e| Error::Config(format!("config key {key:?}: {e}")))?,
                None => default,
            },
        };
        self.record(key, &value.to_string());
        Ok(value)
    }

    /// Optional setting without a default.
    pub fn pick_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + ToString,
        T::Err: std::fmt::Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => self
                .file
                .get(key)
                .map(|s| s.parse().map_err(|e| Error::Config(format!("config key {key:?}: {e}"))))
                .transpose()?,
        };
        match &value {
            Some(v) => self.record(key, &v.to_string()),
            None => {
                self.resolved.insert(key.to_string(), Value::Null);
            }
        }
        Ok(value)
    }

    /// Seed from flag or file; otherwise drawn from entropy.
    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        let entropy = rand::random::<u64>();
        let seed = self.pick("seed", flag, entropy)?;
        if flag.is_none() && self.file.get("seed").is_none() {
            self.resolved.insert("seed-source".into(), "entropy".into());
        }
        Ok(seed)
    }

    fn record(&mut self, key: &str, shown: &str) {
        let v = serde_json::from_str::<Value>(shown)
            .ok()
            .filter(|v| v.is_number() || v.is_boolean())
            .unwrap_or_else(|| Value::String(shown.to_string()));
        self.resolved.insert(key.to_string(), v);
    }

    pub fn into_value(self, command: &str) -> Value {
        let mut m = self.resolved;
        m.insert("command".into(), command.into());
        m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        Value::Object(m)
    }
}

/// Comma-separated list of values.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse().map_err(|e: T::Err| format!("{p:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(List)
    }
}

impl<T: ToString> std::fmt::Display for List<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file_beats_default() {
        let file = ConfigFile::parse("# c\ndim = 50\nmin_count=2\n", "t").unwrap();
        let mut r = Resolver::new(&file);
        assert_eq!(r.pick("dim", Some(10usize), 200).unwrap(), 10);
        assert_eq!(r.pick("min-count", None, 3u64).unwrap(), 2);
        assert_eq!(r.pick("window", None, 5usize).unwrap(), 5);
        assert_eq!(r.resolved["dim"], 10);
        assert!(ConfigFile::parse("novalue\n", "t").is_err());
        let bad = ConfigFile::parse("dim = x\n", "t").unwrap();
        assert!(Resolver::new(&bad).pick("dim", None, 1usize).is_err());
    }

    #[test]
    fn lists() {
        let l: List<usize> = "1, 5,10".parse().unwrap();
        assert_eq!(l.0, [1, 5, 10]);
        assert_eq!(l.to_string(), "1,5,10");
        assert!("1,x".parse::<List<usize>>().is_err());
    }
}
