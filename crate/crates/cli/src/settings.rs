//! Flat `key = value` config files and per-run value resolution.
//!
//! Each value comes from the command-line flag if given, else from the
//! config file, else from the built-in default. Keys are flag names with
//! dashes written as underscores. Every key in the file must be consumed
//! by the subcommand, so typos are rejected rather than ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Flag,
    File,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Flag => "flag",
            Origin::File => "file",
            Origin::Default => "default",
        })
    }
}

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, (usize, String)>,
    used: BTreeSet<String>,
    resolved: Vec<(String, String, Origin)>,
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Invalid(format!("config line {}: expected key = value", i + 1))
            })?;
            let key = normalize_key(k);
            if key.is_empty() {
                return Err(CliError::Invalid(format!("config line {}: empty key", i + 1)));
            }
            if file.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(CliError::Invalid(format!("config line {}: duplicate key {}", i + 1, key)));
            }
        }
        Ok(Settings { file, ..Default::default() })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Settings::default()),
            Some(p) => Settings::parse(&std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?),
        }
    }

    fn lookup<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<(T, Origin)>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.used.insert(key.to_string());
        if let Some(v) = flag {
            return Ok(Some((v, Origin::Flag)));
        }
        match self.file.get(key) {
            None => Ok(None),
            Some((line, text)) => text.parse().map(|v| Some((v, Origin::File))).map_err(|e| {
                CliError::Invalid(format!("config line {}: bad value for {}: {}", line, key, e))
            }),
        }
    }

    fn record(&mut self, key: &str, shown: String, origin: Origin) {
        self.resolved.push((key.to_string(), shown, origin));
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let (v, origin) = self.lookup(key, flag)?.unwrap_or((default, Origin::Default));
        self.record(key, v.to_string(), origin);
        Ok(v)
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        match self.lookup(key, flag)? {
            Some((v, origin)) => {
                self.record(key, v.to_string(), origin);
                Ok(Some(v))
            }
            None => {
                self.record(key, "(none)".into(), Origin::Default);
                Ok(None)
            }
        }
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let (v, origin) = self.lookup(key, flag)?.ok_or_else(|| {
            CliError::Invalid(format!("missing required value --{}", key.replace('_', "-")))
        })?;
        self.record(key, v.to_string(), origin);
        Ok(v)
    }

    /// Fails on config keys the subcommand never asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<String> = self
            .file
            .iter()
            .filter(|(k, _)| !self.used.contains(*k))
            .map(|(k, (line, _))| format!("{} (line {})", k, line))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }

    pub fn render(&self, command: &str) -> String {
        let mut out = format!("# beamcast {} resolved config\n", command);
        for (k, v, origin) in &self.resolved {
            out.push_str(&format!("{} = {}  # {}\n", k, v, origin));
        }
        out
    }
}

/// Comma-separated list usable as a flag or config value.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|p| p.trim().parse::<T>().map_err(|e| format!("{:?}: {}", p.trim(), e)))
            .collect::<Result<Vec<T>, String>>()
            .and_then(|v| if v.is_empty() { Err("empty list".into()) } else { Ok(List(v)) })
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(T::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flag_file_default() {
        let mut s = Settings::parse("window = 12\nlr=0.5 # comment\n").unwrap();
        assert_eq!(s.value("window", Some(3usize), 144).unwrap(), 3);
        assert_eq!(s.value("lr", None, 1e-3).unwrap(), 0.5);
        assert_eq!(s.value("epochs", None, 5usize).unwrap(), 5);
        s.finish().unwrap();
        let shown = s.render("train");
        assert!(shown.contains("window = 3  # flag"));
        assert!(shown.contains("lr = 0.5  # file"));
        assert!(shown.contains("epochs = 5  # default"));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut s = Settings::parse("windw = 12").unwrap();
        s.value("window", None, 144usize).unwrap();
        assert!(matches!(s.finish(), Err(CliError::Invalid(m)) if m.contains("windw")));
        assert!(Settings::parse("no equals sign").is_err());
        assert!(Settings::parse("a=1\na=2").is_err());
        let mut s = Settings::parse("window = many").unwrap();
        assert!(s.value("window", None, 144usize).is_err());
    }

    #[test]
    fn dashed_keys_match_flags() {
        let mut s = Settings::parse("train-fraction = 0.8").unwrap();
        assert_eq!(s.value("train_fraction", None, 0.9).unwrap(), 0.8);
        assert!(s.required::<String>("series", None).is_err());
    }

    #[test]
    fn lists() {
        let l: List<usize> = "4, 8".parse().unwrap();
        assert_eq!(l, List(vec![4, 8]));
        assert_eq!(l.to_string(), "4,8");
        assert!("4,x".parse::<List<usize>>().is_err());
    }
}
