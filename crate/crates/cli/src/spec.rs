//! Parsing of the compact textual forms accepted for generating functions,
//! m.r.i. norms and operators, next to their full JSON forms.
//!
//! `power:m=1` becomes `{"kind":"power","m":1}`; every parameter value is read
//! as a JSON scalar. m.r.i. norms use `sup:<psi>` or `integral:s=<s>:<psi>`.

use std::path::{Path, PathBuf};

use glspace::operators::OperatorConfig;
use glspace::spaces::{GeneratingFunction, MriNorm};
use glspace::verify::{ExponentWindow, ScalingFunctions};
use glspace::Error;
use serde::de::{DeserializeOwned, Error as _};
use serde::{Deserialize, Deserializer};
use serde_json::{Map, Value};

pub trait Shorthand: Sized {
    fn parse_short(text: &str) -> Result<Self, String>;
}

fn keyed(text: &str) -> Result<Value, String> {
    let (kind, params) = text.split_once(':').unwrap_or((text, ""));
    let mut obj = Map::new();
    obj.insert("kind".into(), Value::String(kind.trim().into()));
    for pair in params.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found `{pair}`"))?;
        let v: Value = serde_json::from_str(v.trim()).map_err(|_| format!("`{}` is not a number", v.trim()))?;
        obj.insert(k.trim().into(), v);
    }
    Ok(Value::Object(obj))
}

fn from_keyed<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    serde_json::from_value(keyed(text)?).map_err(|e| e.to_string())
}

impl Shorthand for GeneratingFunction {
    fn parse_short(text: &str) -> Result<Self, String> {
        from_keyed(text)
    }
}

impl Shorthand for OperatorConfig {
    fn parse_short(text: &str) -> Result<Self, String> {
        from_keyed(text)
    }
}

impl Shorthand for MriNorm {
    fn parse_short(text: &str) -> Result<Self, String> {
        if let Some(psi) = text.strip_prefix("sup:") {
            return Ok(MriNorm::sup(GeneratingFunction::parse_short(psi)?));
        }
        if let Some(rest) = text.strip_prefix("integral:") {
            let (s, psi) = rest.split_once(':').ok_or("expected integral:s=<s>:<psi>")?;
            let s: f64 = s
                .strip_prefix("s=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| format!("expected s=<number>, found `{s}`"))?;
            return MriNorm::integral(GeneratingFunction::parse_short(psi)?, s).map_err(|e| e.to_string());
        }
        Err(format!("expected sup:<psi> or integral:s=<s>:<psi>, found `{text}`"))
    }
}

/// Windows and scaling tables have no compact form.
macro_rules! json_only {
    ($($t:ty),*) => {$(
        impl Shorthand for $t {
            fn parse_short(text: &str) -> Result<Self, String> {
                Err(format!("expected a JSON object or @file, found `{text}`"))
            }
        }
    )*};
}
json_only!(ExponentWindow, ScalingFunctions);

/// A value given either as JSON or in compact form, together with the
/// directory relative paths inside it refer to.
#[derive(Debug, Clone)]
pub struct Spec<T> {
    pub value: T,
    pub base_dir: PathBuf,
}

impl<'de, T: DeserializeOwned + Shorthand> Deserialize<'de> for Spec<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = match Value::deserialize(d)? {
            Value::String(s) => T::parse_short(&s).map_err(D::Error::custom)?,
            other => serde_json::from_value(other).map_err(D::Error::custom)?,
        };
        Ok(Spec {
            value,
            base_dir: PathBuf::new(),
        })
    }
}

impl<T> Spec<T> {
    pub fn rebase(mut self, dir: &Path) -> Self {
        self.base_dir = dir.join(&self.base_dir);
        self
    }
}

/// Reads a command-line value: inline JSON, `@path` to a JSON file, or the
/// compact form. `flag` names the source in error messages.
pub fn parse_arg<T: DeserializeOwned + Shorthand>(flag: &str, text: &str) -> Result<Spec<T>, Error> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix('@') {
        let path = Path::new(path);
        let body =
            std::fs::read_to_string(path).map_err(|e| parse_error(&path.display().to_string(), 0, &e.to_string()))?;
        let value = serde_json::from_str(&body).map_err(|e| Error::from_json(&path.display().to_string(), e))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        return Ok(Spec { value, base_dir });
    }
    let value = if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::from_json(flag, e))?
    } else {
        T::parse_short(text).map_err(|m| parse_error(flag, 1, &m))?
    };
    Ok(Spec {
        value,
        base_dir: PathBuf::new(),
    })
}

pub fn parse_error(source_name: &str, line: u64, message: &str) -> Error {
    Error::Parse {
        source_name: source_name.into(),
        line,
        message: message.into(),
    }
}
