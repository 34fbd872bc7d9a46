//! The five commands. Each returns the report and the plot data; writing is
//! left to the caller.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, EXIT_CONFIG};
use crate::output::{self, Artifact};
use crate::report::{
    BulkReport, CertificateReport, ContourReport, EdgeReport, GpReport, IndexReport, LocalEntry, LocalReport, StageError, Summary,
};
use bulkedge_core::bulk::{bulk_index_with, BulkIndex};
use bulkedge_core::edge::{edge_index, spectral_flow_phillips, EdgeIndex};
use bulkedge_core::grafporta::{gp_index, local_index, FlatOperatorPlan, GPIndex};
use bulkedge_core::grid::angle;
use bulkedge_core::spectral::{band_envelope_by_t, default_gamma, refine_certificate, Contour, ContourCheck, GapCertificate, MAX_CERT_SIDE};
use bulkedge_core::{BlochSymbol, HoppingFamily, TorusGrid};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bulk,
    Edge,
    Gp,
    Verify,
    Spectrum,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bulk => "bulk",
            Command::Edge => "edge",
            Command::Gp => "gp",
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
        }
    }
}

/// Report (absent for `spectrum`) and files to write.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Option<IndexReport>,
    pub artifacts: Vec<Artifact>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        self.report.as_ref().map_or(crate::error::EXIT_OK, |r| r.summary.exit_code())
    }
}

/// Certified Fermi level and the contour shared by all pipelines.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub family: HoppingFamily,
    pub symbol: BlochSymbol,
    pub cert: GapCertificate,
    pub gamma: Contour,
    pub check: ContourCheck,
}

pub fn prepare(cfg: &RunConfig) -> CliResult<Prepared> {
    let family = cfg.family()?;
    let symbol = BlochSymbol::new(family.clone());
    let mu = cfg.mu(&symbol)?;
    let cert = refine_certificate(&symbol, mu, TorusGrid::new(cfg.grids.eta, cfg.grids.t), MAX_CERT_SIDE)?;
    if !cert.certified {
        let (i, j) = cert.worst;
        return Err(bulkedge_core::Error::Gap(format!(
            "mu = {mu} is not certified: grid distance {:.3e} at ({i}, {j}) vs Lipschitz margin {:.3e} on {}x{}",
            cert.delta_grid, cert.margin, cert.grid.g1, cert.grid.g2
        ))
        .into());
    }
    let (gamma, check) = default_gamma(&cert, cfg.nodes)?;
    Ok(Prepared { family, symbol, cert, gamma, check })
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.insert(stage.to_string(), start.elapsed().as_secs_f64());
        out
    }
}

/// Configuration-class failures abort; numerical ones are recorded.
fn stage<T>(name: &'static str, r: CliResult<T>, errors: &mut Vec<StageError>) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.exit_code() == EXIT_CONFIG => Err(e),
        Err(e) => {
            errors.push(StageError::new(name, &e));
            Ok(None)
        }
    }
}

pub fn run_bulk(cfg: &RunConfig, p: &Prepared) -> CliResult<BulkIndex> {
    Ok(bulk_index_with(&p.symbol, &p.gamma, TorusGrid::new(cfg.grids.eta, cfg.grids.t), &cfg.tolerances)?)
}

pub fn run_edge(cfg: &RunConfig, p: &Prepared) -> CliResult<EdgeIndex> {
    Ok(edge_index(&p.family, &p.cert, cfg.edge.cells, cfg.grids.edge_t, cfg.edge.theta)?)
}

pub fn run_gp(cfg: &RunConfig, p: &Prepared) -> CliResult<GPIndex> {
    Ok(gp_index(&p.family, &p.gamma, cfg.grids.z, cfg.grids.t, cfg.gp_cells(), cfg.gp.k, &cfg.tolerances)?)
}

fn local_report(cfg: &RunConfig, p: &Prepared, edge: &EdgeIndex, gp: &GPIndex) -> LocalReport {
    let run = || -> CliResult<Vec<LocalEntry>> {
        let plan = FlatOperatorPlan::new(&p.family, gp.plan.k, edge.cells)?;
        let crossings = local_index(&p.family, &edge.sweep, &edge.account, &plan, &cfg.tolerances)?;
        Ok(crossings.iter().map(LocalEntry::from).collect())
    };
    match run() {
        Ok(crossings) => {
            let signed_sum = Some(crossings.iter().map(|c| c.direction * c.winding).sum());
            LocalReport { crossings, signed_sum, error: None }
        }
        Err(e) => LocalReport { crossings: Vec::new(), signed_sum: None, error: Some(e.to_string()) },
    }
}

/// Run one command on a validated config.
pub fn run(cmd: Command, cfg: &RunConfig) -> CliResult<RunOutput> {
    if cmd == Command::Spectrum {
        return spectrum(cfg);
    }
    let mut timer = Timer(BTreeMap::new());
    let mut report = IndexReport::new(cmd.name(), cfg);
    let p = timer.time("certificate", || prepare(cfg))?;
    report.mu = Some(p.cert.mu);
    report.certificate = Some(CertificateReport::from(&p.cert));
    let left = p.cert.spectrum_min() - p.cert.gap();
    report.contour = Some(ContourReport::new(&p.gamma, &p.check, 0.5 * (p.cert.mu + left), 0.5 * (p.cert.mu - left)));

    let mut errors = Vec::new();
    let mut artifacts = Vec::new();
    let wants = |c: Command| cmd == c || cmd == Command::Verify;

    let bulk = if wants(Command::Bulk) { stage("bulk", timer.time("bulk", || run_bulk(cfg, &p)), &mut errors)? } else { None };
    if let Some(b) = &bulk {
        report.bulk = Some(BulkReport::new(b, p.cert.bands_below));
        artifacts.push(Artifact::new("plaquettes.csv", output::plaquettes_csv(&b.result)));
    }

    let edge = if wants(Command::Edge) { stage("edge", timer.time("edge", || run_edge(cfg, &p)), &mut errors)? } else { None };
    if let Some(e) = &edge {
        let decay = p.family.range() as f64 * p.family.norm_bound() / p.cert.gap();
        let unfiltered = spectral_flow_phillips(&e.sweep, 0.0).map_err(CliError::from)?.total;
        report.edge = Some(EdgeReport::new(e, decay, unfiltered));
        artifacts.push(Artifact::new("edge_spectrum.csv", output::edge_spectrum_csv(&e.sweep)));
        artifacts.push(Artifact::new("edge_crossings.csv", output::edge_crossings_csv(&e.account)));
    }

    let gp = if wants(Command::Gp) { stage("gp", timer.time("gp", || run_gp(cfg, &p)), &mut errors)? } else { None };
    if let Some(g) = &gp {
        report.gp = Some(GpReport::from(g));
    }

    if let (Command::Verify, Some(e), Some(g)) = (cmd, &edge, &gp) {
        report.local = Some(timer.time("local", || local_report(cfg, &p, e, g)));
    }

    report.summary = Summary::new(bulk.map(|b| b.index), edge.map(|e| e.index), gp.map(|g| g.index), errors);
    report.timing = timer.0;
    let json = report.to_json(cfg.format == crate::config::ReportFormat::Compact);
    artifacts.insert(0, Artifact::new("report.json", json));
    Ok(RunOutput { report: Some(report), artifacts })
}

/// Band envelope over the eta grid at each point of the edge `t` grid.
pub fn spectrum(cfg: &RunConfig) -> CliResult<RunOutput> {
    let symbol = BlochSymbol::new(cfg.family()?);
    let grid = TorusGrid::new(cfg.grids.eta, cfg.grids.edge_t);
    let env = band_envelope_by_t(&symbol, grid);
    let ts: Vec<f64> = (0..grid.g2).map(|j| angle(j, grid.g2)).collect();
    Ok(RunOutput { report: None, artifacts: vec![Artifact::new("spectrum.csv", output::spectrum_csv(&ts, &env))] })
}
