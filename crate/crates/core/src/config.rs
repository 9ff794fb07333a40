//! Flat `key = value` configuration files.
//!
//! ```text
//! # Example domain
//! profile.alpha = 0.95
//! profile.kappa = 4
//! bump.a = 0.52
//! bump.b = 0.93
//! bump.width = 0.02
//! ```
//!
//! Numbers are written with the shortest decimal that parses back to the
//! same `f64`, so a parse/write cycle is exact.

use std::collections::BTreeMap;
use std::path::Path;

use crate::domain::{build_bump, default_profile, BumpSymbol, RadialProfile};
use crate::error::{Error, Result};

/// Parsed key-value pairs with the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueFile {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValueFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Config {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::Config {
                    line,
                    message: "empty key".into(),
                });
            }
            if let Some((_, first)) = entries.get(key) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
            entries.insert(key.to_string(), (value.to_string(), line));
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(_, l)| *l)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn parse_with<T, F>(&self, key: &str, parse: F) -> Result<Option<T>>
    where
        F: FnOnce(&str) -> std::result::Result<T, String>,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => parse(v).map(Some).map_err(|e| Error::Config {
                line: *line,
                message: format!("field `{key}`: {e}"),
            }),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, |v| {
            let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("`{v}` is not finite"))
            }
        })
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_with(key, |v| {
            v.parse()
                .map_err(|_| format!("`{v}` is not a nonnegative integer"))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKindConfig {
    Smooth,
    Flat,
}

/// Domain, symbol and numerical settings read from a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub profile_kind: ProfileKindConfig,
    pub alpha: f64,
    pub kappa: f64,
    pub bump_a: f64,
    pub bump_b: f64,
    pub bump_width: f64,
    pub caps: Option<(usize, usize)>,
    pub tol: Option<f64>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            profile_kind: ProfileKindConfig::Smooth,
            alpha: 0.95,
            kappa: 4.0,
            bump_a: 0.52,
            bump_b: 0.93,
            bump_width: 0.02,
            caps: None,
            tol: None,
        }
    }
}

const KNOWN_KEYS: [&str; 10] = [
    "profile.kind",
    "profile.alpha",
    "profile.kappa",
    "bump.a",
    "bump.b",
    "bump.width",
    "caps.n",
    "caps.m",
    "tol",
    "caps",
];

impl DomainConfig {
    /// Parses and validates. Missing keys take their defaults; unknown keys
    /// and out-of-range values are rejected with the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValueFile::parse(text)?;
        if let Some(key) = kv.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(Error::Config {
                line: kv.line_of(key).unwrap_or(0),
                message: format!("unknown field `{key}`"),
            });
        }
        let mut cfg = Self::default();
        if let Some(kind) = kv.get("profile.kind") {
            cfg.profile_kind = match kind {
                "smooth" => ProfileKindConfig::Smooth,
                "flat" => ProfileKindConfig::Flat,
                other => {
                    return Err(Error::Config {
                        line: kv.line_of("profile.kind").unwrap_or(0),
                        message: format!(
                            "field `profile.kind`: expected `smooth` or `flat`, found `{other}`"
                        ),
                    })
                }
            };
        }
        let num = |key: &str, slot: &mut f64| -> Result<()> {
            if let Some(v) = kv.get_f64(key)? {
                *slot = v;
            }
            Ok(())
        };
        num("profile.alpha", &mut cfg.alpha)?;
        num("profile.kappa", &mut cfg.kappa)?;
        num("bump.a", &mut cfg.bump_a)?;
        num("bump.b", &mut cfg.bump_b)?;
        num("bump.width", &mut cfg.bump_width)?;
        if kv.get("caps").is_some() {
            return Err(Error::Config {
                line: kv.line_of("caps").unwrap_or(0),
                message: "use `caps.n` and `caps.m`".into(),
            });
        }
        match (kv.get_usize("caps.n")?, kv.get_usize("caps.m")?) {
            (Some(n), Some(m)) => cfg.caps = Some((n, m)),
            (None, None) => {}
            _ => {
                let key = if kv.get("caps.n").is_some() { "caps.n" } else { "caps.m" };
                return Err(Error::Config {
                    line: kv.line_of(key).unwrap_or(0),
                    message: "`caps.n` and `caps.m` must be given together".into(),
                });
            }
        }
        cfg.tol = kv.get_f64("tol")?;

        let at = |key: &str, e: Error| -> Error {
            Error::Config {
                line: kv.line_of(key).unwrap_or(0),
                message: format!("field `{key}`: {e}"),
            }
        };
        if cfg.profile_kind == ProfileKindConfig::Smooth {
            if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
                return Err(at("profile.alpha", Error::InvalidParameter("must lie in (0, 1)".into())));
            }
            if cfg.kappa <= 0.0 {
                return Err(at("profile.kappa", Error::InvalidParameter("must be positive".into())));
            }
        }
        if let Some((n, m)) = cfg.caps {
            if n < 1 || m < 1 {
                return Err(at("caps.n", Error::InvalidParameter("caps must be ≥ 1".into())));
            }
        }
        if let Some(t) = cfg.tol {
            if t <= 0.0 {
                return Err(at("tol", Error::InvalidParameter("must be positive".into())));
            }
        }
        if let Err(e) = cfg.bump() {
            let key = match e {
                Error::MomentInequality { .. } => "bump.a",
                _ => "bump.width",
            };
            return Err(at(key, e));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text form; `parse(to_text())` reproduces `self` exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.profile_kind == ProfileKindConfig::Flat {
            out.push_str("profile.kind = flat\n");
        }
        out.push_str(&format!("profile.alpha = {}\n", self.alpha));
        out.push_str(&format!("profile.kappa = {}\n", self.kappa));
        out.push_str(&format!("bump.a = {}\n", self.bump_a));
        out.push_str(&format!("bump.b = {}\n", self.bump_b));
        out.push_str(&format!("bump.width = {}\n", self.bump_width));
        if let Some((n, m)) = self.caps {
            out.push_str(&format!("caps.n = {n}\ncaps.m = {m}\n"));
        }
        if let Some(t) = self.tol {
            out.push_str(&format!("tol = {t}\n"));
        }
        out
    }

    pub fn profile(&self) -> Result<RadialProfile> {
        match self.profile_kind {
            ProfileKindConfig::Flat => Ok(RadialProfile::flat()),
            ProfileKindConfig::Smooth => default_profile(self.alpha, self.kappa),
        }
    }

    pub fn bump(&self) -> Result<BumpSymbol> {
        build_bump(self.bump_a, self.bump_b, self.bump_width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trip() {
        let cfg = DomainConfig::default();
        let text = cfg.to_text();
        assert_eq!(DomainConfig::parse(&text).unwrap(), cfg);
        assert!(text.contains("bump.a = 0.52\n"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = DomainConfig::parse("# c\n\nprofile.alpha = 0.9  # trailing\ncaps.n=10\ncaps.m=12\n").unwrap();
        assert_eq!(cfg.alpha, 0.9);
        assert_eq!(cfg.caps, Some((10, 12)));
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let err = DomainConfig::parse("profile.alpha = 0.95\nbump.a = x\n").unwrap_err();
        assert_eq!(
            err,
            Error::Config {
                line: 2,
                message: "field `bump.a`: `x` is not a number".into()
            }
        );
        let err = DomainConfig::parse("profile.alpha = 1.5\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, ref message } if message.contains("profile.alpha")));
        let err = DomainConfig::parse("a = 1\na = 2\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. } | Error::Config { line: 2, .. }));
        let err = DomainConfig::parse("nonsense\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let err = DomainConfig::parse("bump.a = 0.1\nbump.b = 0.3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, ref message } if message.contains("moment")));
        let err = DomainConfig::parse("caps.n = 4\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
    }

    #[test]
    fn flat_kind() {
        let cfg = DomainConfig::parse("profile.kind = flat\n").unwrap();
        assert!(cfg.profile().unwrap().is_flat());
        assert_eq!(DomainConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
