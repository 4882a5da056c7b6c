//! Profiles and JSON inputs.

use std::io::Read;
use std::path::Path;

use cartier_lab_core::witt::structure::is_prime;
use cartier_lab_core::witt::MAX_LENGTH;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{usage, CliError};

pub const PROFILE_VAR: &str = "CARTIER_LAB_PROFILE";

/// Default bounds, read from `CARTIER_LAB_PROFILE` (inline JSON or a path).
/// Flags override profile entries, which override built-in defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub p: Option<u64>,
    pub n: Option<usize>,
    pub m: Option<u32>,
    pub k: Option<u32>,
    pub deg: Option<u64>,
    pub depth: Option<u32>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub degrees: Option<(i64, i64)>,
    pub weights: Option<(i64, i64)>,
}

impl Profile {
    pub fn from_env() -> Result<Self, CliError> {
        match std::env::var(PROFILE_VAR) {
            Ok(s) if !s.trim().is_empty() => {
                let v = read_source(&s).map_err(|e| CliError::Profile(e.to_string()))?;
                let p: Profile = serde_json::from_value(v).map_err(|e| CliError::Profile(e.to_string()))?;
                p.validate()?;
                Ok(p)
            }
            _ => Ok(Profile::default()),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Profile(m));
        if let Some(p) = self.p {
            if !is_prime(p) {
                return bad(format!("p = {p} is not prime"));
            }
        }
        if let Some(n) = self.n {
            if n == 0 || n > MAX_LENGTH {
                return bad(format!("n = {n} outside 1..={MAX_LENGTH}"));
            }
        }
        for (name, v) in [("m", self.m), ("k", self.k), ("depth", self.depth)] {
            if v == Some(0) {
                return bad(format!("{name} must be positive"));
            }
        }
        for (name, r) in [("degrees", self.degrees), ("weights", self.weights)] {
            if let Some((a, b)) = r {
                if a > b {
                    return bad(format!("{name} range [{a}, {b}] is empty"));
                }
            }
        }
        Ok(())
    }
}

/// Inline JSON (first non-space char `{` or `[`), `-` for stdin, or a path.
pub fn read_source(src: &str) -> Result<Value, CliError> {
    let t = src.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(serde_json::from_str(t)?);
    }
    let io = |source| CliError::Io { path: src.to_string(), source };
    let text = if src == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        s
    } else {
        std::fs::read_to_string(Path::new(src)).map_err(io)?
    };
    Ok(serde_json::from_str(&text)?)
}

/// Parse a value, unwrapping a previous result envelope: if the object has
/// a `key` field (as produced by this tool), that field is used.
pub fn parse_as<T: DeserializeOwned>(v: Value, key: &str) -> Result<T, CliError> {
    let inner = match v {
        Value::Object(mut o) if o.contains_key(key) => o.remove(key).unwrap(),
        v => v,
    };
    Ok(serde_json::from_value(inner)?)
}

/// Comma-separated integers or a JSON array.
pub fn components(s: &str) -> Result<Vec<Value>, CliError> {
    let t = s.trim();
    if t.starts_with('[') {
        return match serde_json::from_str(t)? {
            Value::Array(a) => Ok(a),
            _ => Err(usage("components must be a list")),
        };
    }
    Ok(t.split(',').map(|c| Value::String(c.trim().to_string())).collect())
}

/// `a:b` with `a ≤ b`.
pub fn range(s: &str) -> Result<(i64, i64), CliError> {
    let parse = |x: &str| x.trim().parse::<i64>().map_err(|_| usage(format!("bad range {s:?}, expected a:b")));
    let (a, b) = s.split_once(':').ok_or_else(|| usage(format!("bad range {s:?}, expected a:b")))?;
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(usage(format!("empty range {s:?}")));
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_rejects_unknown_fields() {
        assert!(serde_json::from_str::<Profile>(r#"{"p": 3, "bogus": 1}"#).is_err());
        let p: Profile = serde_json::from_str(r#"{"p": 4}"#).unwrap();
        assert!(p.validate().is_err());
    }

    #[test]
    fn ranges_and_components() {
        assert_eq!(range("-3:4").unwrap(), (-3, 4));
        assert!(range("4:-3").is_err());
        assert_eq!(components("1, 2").unwrap().len(), 2);
        assert_eq!(components(r#"[["1","2"],[]]"#).unwrap().len(), 2);
    }
}
