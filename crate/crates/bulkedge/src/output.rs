//! Plot data as CSV and atomic file output.

use crate::error::{CliError, CliResult};
use bulkedge_core::bulk::ChernResult;
use bulkedge_core::edge::{EdgeSweep, FlowAccount};
use bulkedge_core::grid::angle;
use std::io::Write;
use std::path::{Path, PathBuf};

/// A named output file and its contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: String) -> Self {
        Artifact { name: name.into(), contents }
    }
}

fn table(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

/// Shortest round-trip form, in exponent notation for very small or large
/// magnitudes.
fn num(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-4..1e9).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// `theta_eta, theta_t, f12` for every plaquette.
pub fn plaquettes_csv(res: &ChernResult) -> String {
    let g = res.grid;
    table(
        &strings(&["theta_eta", "theta_t", "f12"]),
        res.plaquettes.iter().enumerate().map(|(k, f)| {
            let (i, j) = g.coords(k);
            vec![num(angle(i, g.g1)), num(angle(j, g.g2)), num(*f)]
        }),
    )
}

/// `t, eigenvalue, left_mass, branch_id` for every in-window level; a
/// degenerate level is written once per multiplicity.
pub fn edge_spectrum_csv(sweep: &EdgeSweep) -> String {
    let mut rows = Vec::new();
    for (a, levels) in sweep.levels.iter().enumerate() {
        for (p, l) in levels.iter().enumerate() {
            for _ in 0..l.multiplicity {
                rows.push(vec![
                    num(sweep.t_angle(a)),
                    num(l.energy),
                    num(l.left_mass),
                    sweep.branches[a][p].to_string(),
                ]);
            }
        }
    }
    table(&strings(&["t", "eigenvalue", "left_mass", "branch_id"]), rows)
}

pub fn edge_crossings_csv(account: &FlowAccount) -> String {
    table(
        &strings(&["t_from", "t_to", "branch_id", "direction", "multiplicity", "left_mass", "counted"]),
        account.crossings.iter().map(|c| {
            vec![
                num(c.t_from),
                num(c.t_to),
                c.branch.to_string(),
                c.direction.to_string(),
                c.multiplicity.to_string(),
                num(c.left_mass),
                c.counted.to_string(),
            ]
        }),
    )
}

/// `t, band_min_1, band_max_1, ...` from an envelope indexed `[t][band]`.
pub fn spectrum_csv(t_angles: &[f64], envelope: &[Vec<(f64, f64)>]) -> String {
    let bands = envelope.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    for b in 1..=bands {
        header.push(format!("band_min_{b}"));
        header.push(format!("band_max_{b}"));
    }
    table(
        &header,
        t_angles.iter().zip(envelope).map(|(t, row)| {
            let mut r = vec![num(*t)];
            for (lo, hi) in row {
                r.push(num(*lo));
                r.push(num(*hi));
            }
            r
        }),
    )
}

/// Write `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = std::fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(contents.as_bytes()).and_then(|_| f.sync_all()).map_err(|e| CliError::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> CliResult<Vec<PathBuf>> {
    artifacts.iter().map(|a| write_atomic(dir, &a.name, &a.contents)).collect()
}
