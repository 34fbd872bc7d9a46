//! Model files: a TOML document naming a model from the zoo with its
//! parameters, or listing the coefficients of a custom symbol.
//!
//! ```toml
//! model = "hofstadter"
//! p = 1
//! q = 3
//! ```
//!
//! ```toml
//! model = "custom"
//! N = 1
//! R = 1
//! M = 0
//! strict = true
//! # j, m, row, col, re, im
//! coefficients = [[1, 0, 0, 0, 1.0, 0.0], [-1, 0, 0, 0, 1.0, 0.0]]
//! ```
//!
//! Optional keys: `copies` (direct-sum copies, default 1), `conjugate`
//! (complex-conjugate every coefficient, default false) and `strict`
//! (reject non-self-adjoint coefficients instead of symmetrizing, default
//! true).

use crate::error::{CliError, CliResult};
use bulkedge_core::model::{CoefficientEntry, CustomSymbol, ModelSpec};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use toml::{Table, Value};

/// Top-level keys that belong to the run configuration, not the model.
pub const RUN_KEYS: &[&str] = &["mu", "gap", "out", "format", "nodes"];


/// Source text kept around for line diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct Source<'a> {
    pub path: Option<&'a Path>,
    pub text: &'a str,
}

impl<'a> Source<'a> {
    pub fn new(path: Option<&'a Path>, text: &'a str) -> Self {
        Source { path, text }
    }

    /// 1-based line of `key` inside `[section]` (top level for `None`), or 0
    /// when the key is absent from the text (it came from an override).
    pub fn line_of(&self, section: Option<&str>, key: &str) -> usize {
        let mut current: Option<String> = None;
        for (n, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(h) = line.strip_prefix('[') {
                if !h.starts_with('[') {
                    current = Some(h.trim_end_matches(']').trim().to_string());
                }
                continue;
            }
            if current.as_deref() != section {
                continue;
            }
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return n + 1;
                }
            }
        }
        0
    }

    /// Line of the `k`-th entry of the top-level `coefficients` array.
    fn line_of_entry(&self, k: usize) -> usize {
        let start = self.line_of(None, "coefficients");
        if start == 0 {
            return 0;
        }
        let offset: usize = self.text.lines().take(start - 1).map(|l| l.len() + 1).sum();
        let body = &self.text[offset..];
        let Some(eq) = body.find('=') else { return start };
        let (mut depth, mut seen, mut line, mut comment) = (0usize, 0usize, start, false);
        for ch in body[eq..].chars() {
            match ch {
                '\n' => {
                    line += 1;
                    comment = false;
                }
                _ if comment => {}
                '#' => comment = true,
                '[' => {
                    depth += 1;
                    if depth == 2 {
                        if seen == k {
                            return line;
                        }
                        seen += 1;
                    }
                }
                ']' => {
                    if depth <= 1 {
                        break;
                    }
                    depth -= 1;
                }
                _ => {}
            }
        }
        start
    }

    pub fn error(&self, line: usize, field: impl Into<String>, message: impl Into<String>) -> CliError {
        CliError::Parse { path: self.path.map(PathBuf::from), line, field: field.into(), message: message.into() }
    }

    fn key_error(&self, key: &str, message: impl Into<String>) -> CliError {
        self.error(self.line_of(None, key), key, message)
    }
}

/// Parse TOML text into a table, reporting the line of a syntax error.
pub fn parse_table(src: &Source) -> CliResult<Table> {
    src.text.parse::<Table>().map_err(|e| {
        let line = e.span().map(|s| src.text[..s.start.min(src.text.len())].matches('\n').count() + 1).unwrap_or(0);
        src.error(line, "syntax", e.message().to_string())
    })
}

/// Parse a stand-alone model file.
pub fn parse_model(text: &str) -> CliResult<ModelSpec> {
    let src = Source::new(None, text);
    let table = parse_table(&src)?;
    model_from_table(&table, &src)
}

fn as_int(src: &Source, key: &str, v: &Value) -> CliResult<i64> {
    match v {
        Value::Integer(i) => Ok(*i),
        Value::Float(f) if *f == f.trunc() && f.abs() < 1e15 => Ok(*f as i64),
        other => Err(src.key_error(key, format!("expected an integer, found {}", other.type_str()))),
    }
}

fn as_count(src: &Source, key: &str, v: &Value) -> CliResult<usize> {
    let i = as_int(src, key, v)?;
    usize::try_from(i).map_err(|_| src.key_error(key, format!("expected a non-negative integer, found {i}")))
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Float(f) => Some(*f),
        _ => None,
    }
}

fn as_bool(src: &Source, key: &str, v: &Value) -> CliResult<bool> {
    v.as_bool().ok_or_else(|| src.key_error(key, format!("expected true or false, found {}", v.type_str())))
}

/// Model part of a (model or run) table; run-configuration keys and tables
/// are skipped.
pub fn model_from_table(table: &Table, src: &Source) -> CliResult<ModelSpec> {
    let name = match table.get("model") {
        Some(Value::String(s)) => s.clone(),
        Some(v) => return Err(src.key_error("model", format!("expected a string, found {}", v.type_str()))),
        None => return Err(src.error(0, "model", "missing key 'model'")),
    };
    if !bulkedge_core::model::MODEL_NAMES.contains(&name.as_str()) {
        return Err(src.key_error(
            "model",
            format!("unknown model '{name}' (known: {})", bulkedge_core::model::MODEL_NAMES.join(", ")),
        ));
    }
    let mut spec = ModelSpec::named(&name, &[]);
    let mut params = BTreeMap::new();
    for (key, value) in table {
        if value.is_table() || RUN_KEYS.contains(&key.as_str()) {
            continue;
        }
        match key.as_str() {
            "model" | "N" | "R" | "M" | "coefficients" => {}
            "copies" => {
                spec.copies = as_count(src, key, value)?;
                if spec.copies == 0 {
                    return Err(src.key_error(key, "must be at least 1"));
                }
            }
            "conjugate" => spec.conjugate = as_bool(src, key, value)?,
            "strict" => spec.strict = as_bool(src, key, value)?,
            _ => {
                let v = as_float(value).ok_or_else(|| src.key_error(key, format!("expected a number, found {}", value.type_str())))?;
                if !v.is_finite() {
                    return Err(src.key_error(key, "must be finite"));
                }
                params.insert(key.clone(), v);
            }
        }
    }
    spec.params = params;
    if name == "custom" {
        spec.custom = Some(custom_from_table(table, src)?);
    } else {
        for key in ["N", "R", "M", "coefficients"] {
            if table.contains_key(key) {
                return Err(src.key_error(key, format!("only allowed with model = \"custom\", not '{name}'")));
            }
        }
    }
    // Resolve here so that parameter errors point at the model line.
    spec.resolve().map_err(|e| {
        let field = spec.params.keys().find(|k| e.to_string().contains(&format!("'{k}'"))).cloned();
        match field {
            Some(k) => src.key_error(&k, e.to_string()),
            None => src.key_error("model", e.to_string()),
        }
    })?;
    Ok(spec)
}

fn custom_from_table(table: &Table, src: &Source) -> CliResult<CustomSymbol> {
    let get = |key: &str| -> CliResult<usize> {
        let v = table.get(key).ok_or_else(|| src.error(0, key, format!("custom model needs '{key}'")))?;
        as_count(src, key, v)
    };
    let (dim, range, t_range) = (get("N")?, get("R")?, get("M")?);
    if dim == 0 {
        return Err(src.key_error("N", "must be at least 1"));
    }
    let list = match table.get("coefficients") {
        Some(Value::Array(a)) => a,
        Some(v) => return Err(src.key_error("coefficients", format!("expected an array, found {}", v.type_str()))),
        None => return Err(src.error(0, "coefficients", "custom model needs 'coefficients'")),
    };
    let mut entries = Vec::with_capacity(list.len());
    for (k, item) in list.iter().enumerate() {
        let line = src.line_of_entry(k);
        let field = format!("coefficients[{k}]");
        let Value::Array(row) = item else {
            return Err(src.error(line, field, "expected [j, m, row, col, re, im]"));
        };
        if row.len() != 6 {
            return Err(src.error(line, field, format!("expected 6 numbers [j, m, row, col, re, im], found {}", row.len())));
        }
        let int = |i: usize, what: &str| -> CliResult<i64> {
            match &row[i] {
                Value::Integer(v) => Ok(*v),
                v => Err(src.error(line, field.clone(), format!("{what} must be an integer, found {}", v.type_str()))),
            }
        };
        let num = |i: usize, what: &str| -> CliResult<f64> {
            as_float(&row[i]).ok_or_else(|| src.error(line, field.clone(), format!("{what} must be a number")))
        };
        let (j, m) = (int(0, "j")?, int(1, "m")?);
        let (r, c) = (int(2, "row")?, int(3, "col")?);
        if j.unsigned_abs() as usize > range || m.unsigned_abs() as usize > t_range {
            return Err(src.error(line, field, format!("(j, m) = ({j}, {m}) outside |j| <= R = {range}, |m| <= M = {t_range}")));
        }
        if r < 0 || c < 0 || r as usize >= dim || c as usize >= dim {
            return Err(src.error(line, field, format!("(row, col) = ({r}, {c}) outside 0..N = {dim}")));
        }
        entries.push(CoefficientEntry { j, m, row: r as usize, col: c as usize, re: num(4, "re")?, im: num(5, "im")? });
    }
    let custom = CustomSymbol { dim, range, t_range, entries };
    // Duplicate and adjointness problems are reported against the entry list.
    let mut probe = ModelSpec::named("custom", &[]);
    probe.strict = table.get("strict").and_then(Value::as_bool).unwrap_or(true);
    probe.custom = Some(custom.clone());
    if let Err(e) = probe.resolve() {
        let msg = e.to_string();
        let line = msg
            .split("entry ")
            .nth(1)
            .and_then(|s| s.split(|c: char| !c.is_ascii_digit()).next())
            .and_then(|s| s.parse::<usize>().ok())
            .map(|k| src.line_of_entry(k))
            .unwrap_or_else(|| src.line_of(None, "coefficients"));
        return Err(src.error(line, "coefficients", msg));
    }
    Ok(custom)
}
