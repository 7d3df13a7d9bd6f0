use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::error::CliError;

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serialisable output")
}

/// Rewrites every floating-point number with 17 significant digits.
/// Integers are left alone; non-finite values are already `null`.
pub fn normalise(v: &mut Value) {
    match v {
        Value::Number(n) => {
            let s = n.to_string();
            if s.contains(['.', 'e', 'E']) {
                if let Some(x) = n.as_f64() {
                    *n = fmt17(x).parse::<Number>().expect("formatted float is a JSON number");
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(normalise),
        Value::Object(o) => o.values_mut().for_each(normalise),
        _ => {}
    }
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

pub fn emit_json(mut v: Value, path: Option<&Path>) -> Result<(), CliError> {
    normalise(&mut v);
    let mut text = serde_json::to_string_pretty(&v).expect("valid JSON value");
    text.push('\n');
    emit(&text, path)
}
