//! Run configuration: a model file extended with the Fermi level, grids,
//! window sizes, tolerances and output settings.
//!
//! ```toml
//! model = "hofstadter"
//! p = 1
//! q = 3
//! gap = 1            # or: mu = -1.2
//! nodes = 64         # contour nodes for the Riesz projection
//! out = "out/hof13"
//! format = "json"    # or "compact"
//!
//! [grids]
//! eta = 24
//! t = 24
//! z = 24
//! edge_t = 96
//!
//! [edge]
//! L = 64
//! theta = 0.9
//!
//! [gp]
//! k = 1              # optional; searched when absent
//! L = 64             # optional; defaults to edge.L
//!
//! [tolerances]
//! sigma_tol = 1e-7
//! ```

use crate::error::{CliError, CliResult};
use crate::modelfile::{self, Source};
use bulkedge_core::spectral::{band_envelope, gap_midpoint};
use bulkedge_core::tolerances::Tolerances;
use bulkedge_core::{BlochSymbol, HoppingFamily, ModelSpec, TorusGrid};
use serde::Serialize;
use std::path::{Path, PathBuf};
use toml::{Table, Value};

/// Where the Fermi level sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fermi {
    Mu(f64),
    /// Midpoint of gap `r`, between bands `r` and `r + 1`.
    Gap(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grids {
    pub eta: usize,
    pub t: usize,
    pub z: usize,
    pub edge_t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeConfig {
    #[serde(rename = "L")]
    pub cells: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GpConfig {
    pub k: Option<usize>,
    #[serde(rename = "L")]
    pub cells: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    /// Indented JSON.
    Json,
    /// Single-line JSON.
    Compact,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelSpec,
    /// Required by every command except `spectrum`.
    pub fermi: Option<Fermi>,
    pub grids: Grids,
    pub edge: EdgeConfig,
    pub gp: GpConfig,
    pub tolerances: Tolerances,
    pub nodes: usize,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

const TABLES: &[(&str, &[&str])] = &[
    ("grids", &["eta", "t", "z", "edge_t"]),
    ("edge", &["L", "theta"]),
    ("gp", &["k", "L"]),
    (
        "tolerances",
        &["sigma_tol", "idempotency", "hermiticity", "quadrature", "surjectivity", "window_angle", "kernel_gap_ratio", "degeneracy"],
    ),
];

impl RunConfig {
    /// Read a config file, apply `key=value` overrides, validate.
    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_text(&text, Some(path), overrides)
    }

    pub fn from_text(text: &str, path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let src = Source::new(path, text);
        let mut table = modelfile::parse_table(&src)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(&table, &src)
    }

    fn from_table(table: &Table, src: &Source) -> CliResult<Self> {
        for (key, value) in table {
            if value.is_table() && !TABLES.iter().any(|(t, _)| t == key) {
                return Err(src.error(src.line_of(None, key), key.clone(), "unknown table"));
            }
        }
        for (name, keys) in TABLES {
            if let Some(Value::Table(t)) = table.get(*name) {
                for key in t.keys() {
                    if !keys.contains(&key.as_str()) {
                        return Err(src.error(src.line_of(Some(name), key), format!("{name}.{key}"), format!("unknown key (expected one of: {})", keys.join(", "))));
                    }
                }
            } else if let Some(v) = table.get(*name) {
                return Err(src.error(src.line_of(None, name), *name, format!("expected a table, found {}", v.type_str())));
            }
        }
        let model = modelfile::model_from_table(table, src)?;
        let get = |section: Option<&str>, key: &str| -> Option<&Value> {
            match section {
                None => table.get(key),
                Some(s) => table.get(s).and_then(Value::as_table).and_then(|t| t.get(key)),
            }
        };
        let err = |section: Option<&str>, key: &str, msg: String| {
            let field = section.map(|s| format!("{s}.{key}")).unwrap_or_else(|| key.to_string());
            src.error(src.line_of(section, key), field, msg)
        };
        let count = |section: Option<&str>, key: &str, default: Option<usize>| -> CliResult<Option<usize>> {
            match get(section, key) {
                None => Ok(default),
                Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
                Some(v) => Err(err(section, key, format!("expected a non-negative integer, found {}", show(v)))),
            }
        };
        let real = |section: Option<&str>, key: &str, default: f64| -> CliResult<f64> {
            match get(section, key) {
                None => Ok(default),
                Some(Value::Integer(i)) => Ok(*i as f64),
                Some(Value::Float(f)) if f.is_finite() => Ok(*f),
                Some(v) => Err(err(section, key, format!("expected a finite number, found {}", show(v)))),
            }
        };

        let fermi = match (get(None, "mu"), get(None, "gap")) {
            (Some(_), Some(_)) => return Err(err(None, "gap", "give either 'mu' or 'gap', not both".into())),
            (Some(_), None) => Some(Fermi::Mu(real(None, "mu", 0.0)?)),
            (None, Some(_)) => Some(Fermi::Gap(count(None, "gap", None)?.unwrap_or(0))),
            (None, None) => None,
        };

        let grids = Grids {
            eta: count(Some("grids"), "eta", Some(24))?.unwrap_or(24),
            t: count(Some("grids"), "t", Some(24))?.unwrap_or(24),
            z: count(Some("grids"), "z", Some(24))?.unwrap_or(24),
            edge_t: count(Some("grids"), "edge_t", Some(96))?.unwrap_or(96),
        };
        for (key, v) in [("eta", grids.eta), ("t", grids.t), ("z", grids.z), ("edge_t", grids.edge_t)] {
            if v < 8 {
                return Err(err(Some("grids"), key, format!("grid size {v} is below 8")));
            }
        }

        let edge = EdgeConfig { cells: count(Some("edge"), "L", Some(64))?.unwrap_or(64), theta: real(Some("edge"), "theta", 0.9)? };
        if !(edge.theta > 0.5 && edge.theta < 1.0) {
            return Err(err(Some("edge"), "theta", format!("theta = {} must lie in (0.5, 1)", edge.theta)));
        }
        let gp = GpConfig { k: count(Some("gp"), "k", None)?, cells: count(Some("gp"), "L", None)? };
        if gp.k == Some(0) {
            return Err(err(Some("gp"), "k", "k must be at least 1".into()));
        }

        let family = model.resolve()?;
        let r = family.range();
        if edge.cells < 4 * r.max(1) {
            return Err(err(Some("edge"), "L", format!("L = {} is below 4R = {}", edge.cells, 4 * r.max(1))));
        }
        if let Some(l) = gp.cells {
            let need = 4 * r.max(gp.k.unwrap_or(1)).max(1);
            if l < need {
                return Err(err(Some("gp"), "L", format!("L = {l} is below max(4R, 4k) = {need}")));
            }
        }

        let d = Tolerances::default();
        let tol_key = |key: &str, default: f64| -> CliResult<f64> {
            let v = real(Some("tolerances"), key, default)?;
            if v <= 0.0 {
                return Err(err(Some("tolerances"), key, format!("{v} must be positive")));
            }
            Ok(v)
        };
        let tolerances = Tolerances {
            sigma_tol: tol_key("sigma_tol", d.sigma_tol)?,
            idempotency: tol_key("idempotency", d.idempotency)?,
            hermiticity: tol_key("hermiticity", d.hermiticity)?,
            quadrature: tol_key("quadrature", d.quadrature)?,
            surjectivity: tol_key("surjectivity", d.surjectivity)?,
            window_angle: tol_key("window_angle", d.window_angle)?,
            kernel_gap_ratio: tol_key("kernel_gap_ratio", d.kernel_gap_ratio)?,
            degeneracy: tol_key("degeneracy", d.degeneracy)?,
        };

        let nodes = count(None, "nodes", Some(64))?.unwrap_or(64);
        if nodes < 8 {
            return Err(err(None, "nodes", format!("{nodes} contour nodes is below 8")));
        }
        let out = match get(None, "out") {
            None => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(v) => return Err(err(None, "out", format!("expected a path string, found {}", show(v)))),
        };
        let format = match get(None, "format") {
            None => ReportFormat::Json,
            Some(Value::String(s)) if s == "json" => ReportFormat::Json,
            Some(Value::String(s)) if s == "compact" => ReportFormat::Compact,
            Some(v) => return Err(err(None, "format", format!("expected \"json\" or \"compact\", found {}", show(v)))),
        };

        Ok(RunConfig { model, fermi, grids, edge, gp, tolerances, nodes, out, format })
    }

    pub fn family(&self) -> CliResult<HoppingFamily> {
        Ok(self.model.resolve()?)
    }

    /// Numerical Fermi level. A gap index is resolved to the midpoint of the
    /// band envelope on a grid of at least 48 x 48.
    pub fn mu(&self, symbol: &BlochSymbol) -> CliResult<f64> {
        match self.fermi {
            None => Err(CliError::Config("missing Fermi level: set 'mu' or 'gap'".into())),
            Some(Fermi::Mu(mu)) => Ok(mu),
            Some(Fermi::Gap(r)) => {
                let grid = TorusGrid::new(self.grids.eta.max(48), self.grids.t.max(48));
                Ok(gap_midpoint(&band_envelope(symbol, grid), r)?)
            }
        }
    }

    /// Window length for the kernel bundle.
    pub fn gp_cells(&self) -> usize {
        self.gp.cells.unwrap_or(self.edge.cells)
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::String(s) => format!("string \"{s}\""),
        Value::Integer(i) => format!("integer {i}"),
        Value::Float(f) => format!("float {f}"),
        other => other.type_str().to_string(),
    }
}

/// Apply `a.b.c=value`. The value is read as a TOML value, falling back to a
/// bare string.
pub fn apply_override(table: &mut Table, spec: &str) -> CliResult<()> {
    let bad = |msg: &str| CliError::Config(format!("override '{spec}': {msg}"));
    let (path, raw) = spec.split_once('=').ok_or_else(|| bad("expected key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(bad("empty key"));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let (last, parents) = keys.split_last().expect("at least one key");
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| bad(&format!("'{k}' is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
