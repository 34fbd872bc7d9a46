//! JSON report. Everything outside `timing` is a function of the config and
//! the tool version only.

use crate::config::{EdgeConfig, Fermi, GpConfig, Grids, RunConfig};
use crate::error::CliError;
use bulkedge_core::bulk::{BulkIndex, LadderStep};
use bulkedge_core::edge::EdgeIndex;
use bulkedge_core::grafporta::{GPIndex, LocalCrossing};
use bulkedge_core::spectral::{Contour, ContourCheck, GapCertificate};
use serde::Serialize;
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub schema_version: u32,
    pub tool: Tool,
    pub command: String,
    pub config: ConfigEcho,
    pub mu: Option<f64>,
    pub certificate: Option<CertificateReport>,
    pub contour: Option<ContourReport>,
    pub bulk: Option<BulkReport>,
    pub edge: Option<EdgeReport>,
    pub gp: Option<GpReport>,
    /// Per-crossing winding data; best effort, never affects the status.
    pub local: Option<LocalReport>,
    pub summary: Summary,
    /// Wall time per stage in seconds. The only non-reproducible block.
    pub timing: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for Tool {
    fn default() -> Self {
        Tool { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelEcho {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub copies: usize,
    pub conjugate: bool,
    pub strict: bool,
    /// `(N, R, M, entries)` of a custom symbol.
    pub custom: Option<(usize, usize, usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub model: ModelEcho,
    pub fermi: Option<Fermi>,
    pub grids: Grids,
    pub edge: EdgeConfig,
    pub gp: GpConfig,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub nodes: usize,
}

impl ConfigEcho {
    pub fn new(cfg: &RunConfig) -> Self {
        let m = &cfg.model;
        let t = &cfg.tolerances;
        ConfigEcho {
            model: ModelEcho {
                name: m.name.clone(),
                params: m.params.clone(),
                copies: m.copies,
                conjugate: m.conjugate,
                strict: m.strict,
                custom: m.custom.as_ref().map(|c| (c.dim, c.range, c.t_range, c.entries.len())),
            },
            fermi: cfg.fermi,
            grids: cfg.grids,
            edge: cfg.edge,
            gp: cfg.gp,
            tolerances: BTreeMap::from([
                ("sigma_tol", t.sigma_tol),
                ("idempotency", t.idempotency),
                ("hermiticity", t.hermiticity),
                ("quadrature", t.quadrature),
                ("surjectivity", t.surjectivity),
                ("window_angle", t.window_angle),
                ("kernel_gap_ratio", t.kernel_gap_ratio),
                ("degeneracy", t.degeneracy),
            ]),
            nodes: cfg.nodes,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub mu: f64,
    pub grid: [usize; 2],
    pub delta_grid: f64,
    pub margin: f64,
    pub half_gap: f64,
    pub certified: bool,
    pub bands_below: usize,
    pub spectrum: [f64; 2],
}

impl From<&GapCertificate> for CertificateReport {
    fn from(c: &GapCertificate) -> Self {
        CertificateReport {
            mu: c.mu,
            grid: [c.grid.g1, c.grid.g2],
            delta_grid: c.delta_grid,
            margin: c.margin,
            half_gap: c.half_gap(),
            certified: c.certified,
            bands_below: c.bands_below,
            spectrum: [c.spectrum_min(), c.spectrum_max()],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContourReport {
    pub kind: &'static str,
    pub center: f64,
    pub radius: f64,
    pub nodes: usize,
    pub min_distance: f64,
    pub certified_distance: f64,
}

impl ContourReport {
    pub fn new(gamma: &Contour, check: &ContourCheck, center: f64, radius: f64) -> Self {
        ContourReport {
            kind: "circle",
            center,
            radius,
            nodes: gamma.len(),
            min_distance: check.min_distance,
            certified_distance: check.certified_distance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Rung {
    pub parameter: &'static str,
    pub value: usize,
    /// `null` when the rung asked for refinement.
    pub index: Option<i64>,
}

pub fn trail(steps: &[LadderStep]) -> Vec<Rung> {
    steps.iter().map(|s| Rung { parameter: s.parameter, value: s.value, index: s.index }).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BulkReport {
    pub index: i64,
    pub raw: f64,
    pub admissible: bool,
    pub grid: [usize; 2],
    pub rank: usize,
    pub min_link: f64,
    pub max_plaquette: f64,
    pub trail: Vec<Rung>,
}

impl BulkReport {
    pub fn new(b: &BulkIndex, rank: usize) -> Self {
        let r = &b.result;
        BulkReport {
            index: b.index,
            raw: r.raw,
            admissible: r.admissible,
            grid: [r.grid.g1, r.grid.g2],
            rank,
            min_link: r.min_link,
            max_plaquette: r.max_plaquette,
            trail: trail(&b.trail),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeReport {
    pub index: i64,
    #[serde(rename = "L")]
    pub cells: usize,
    pub t_points: usize,
    pub theta: f64,
    pub half_window: f64,
    /// `R |H| / gap`, a rough decay length of in-gap states in cells.
    pub decay_length: f64,
    pub branches: usize,
    pub crossings: usize,
    pub counted_crossings: usize,
    pub partition_total: i64,
    /// Unfiltered flow over the closed loop; zero for any finite window.
    pub unfiltered_total: i64,
    pub trail: Vec<Rung>,
}

impl EdgeReport {
    pub fn new(e: &EdgeIndex, decay_length: f64, unfiltered_total: i64) -> Self {
        EdgeReport {
            index: e.index,
            cells: e.cells,
            t_points: e.t_points,
            theta: e.account.theta,
            half_window: e.sweep.half_window,
            decay_length,
            branches: e.sweep.branch_count(),
            crossings: e.account.crossings.len(),
            counted_crossings: e.account.crossings.iter().filter(|c| c.counted).count(),
            partition_total: e.account.partition_total,
            unfiltered_total,
            trail: trail(&e.trail),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GpReport {
    pub index: i64,
    pub k: usize,
    #[serde(rename = "L")]
    pub cells: usize,
    pub rank: usize,
    pub g_z: usize,
    pub t_points: usize,
    pub raw: f64,
    pub admissible: bool,
    /// Smallest certified `sigma_min / sigma_max` of the truncated map.
    pub surjectivity: f64,
    /// Largest subspace angle between fibres at `L` and `2L`.
    pub window_angle: f64,
    /// Smallest ratio between the certified singular gap and the kernel residual.
    pub min_gap_ratio: f64,
    pub trail: Vec<Rung>,
}

impl From<&GPIndex> for GpReport {
    fn from(g: &GPIndex) -> Self {
        GpReport {
            index: g.index,
            k: g.plan.k,
            cells: g.plan.cells,
            rank: g.plan.rank(),
            g_z: g.g_z,
            t_points: g.t_points,
            raw: g.result.raw,
            admissible: g.result.admissible,
            surjectivity: g.plan.surjectivity,
            window_angle: g.plan.window_angle,
            min_gap_ratio: g.min_gap_ratio,
            trail: trail(&g.trail),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalEntry {
    pub theta: f64,
    pub energy: f64,
    pub direction: i64,
    pub multiplicity: usize,
    pub kernel_dim: usize,
    pub winding: i64,
    pub radius: f64,
}

impl From<&LocalCrossing> for LocalEntry {
    fn from(c: &LocalCrossing) -> Self {
        LocalEntry {
            theta: c.theta,
            energy: c.energy,
            direction: c.direction,
            multiplicity: c.multiplicity,
            kernel_dim: c.kernel_dim,
            winding: c.winding,
            radius: c.radius,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalReport {
    pub crossings: Vec<LocalEntry>,
    /// `sum direction * winding`.
    pub signed_sum: Option<i64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageError {
    pub stage: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Every requested index converged and they agree.
    Agree,
    /// Every requested index converged but they differ.
    Unequal,
    NotConverged,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub i_bulk: Option<i64>,
    pub i_edge: Option<i64>,
    pub i_gp: Option<i64>,
    pub agree: bool,
    pub converged: bool,
    pub status: Status,
    pub errors: Vec<StageError>,
}

impl Summary {
    pub fn new(i_bulk: Option<i64>, i_edge: Option<i64>, i_gp: Option<i64>, errors: Vec<StageError>) -> Self {
        let got: Vec<i64> = [i_bulk, i_edge, i_gp].into_iter().flatten().collect();
        let converged = errors.is_empty();
        let agree = converged && got.windows(2).all(|w| w[0] == w[1]);
        let status = match (converged, agree) {
            (false, _) => Status::NotConverged,
            (true, true) => Status::Agree,
            (true, false) => Status::Unequal,
        };
        Summary { i_bulk, i_edge, i_gp, agree, converged, status, errors }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Agree => crate::error::EXIT_OK,
            Status::Unequal => crate::error::EXIT_UNEQUAL,
            Status::NotConverged => crate::error::EXIT_NOT_CONVERGED,
        }
    }
}

impl StageError {
    pub fn new(stage: &'static str, e: &CliError) -> Self {
        StageError { stage, message: e.to_string() }
    }
}

impl IndexReport {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        IndexReport {
            schema_version: SCHEMA_VERSION,
            tool: Tool::default(),
            command: command.to_string(),
            config: ConfigEcho::new(cfg),
            mu: None,
            certificate: None,
            contour: None,
            bulk: None,
            edge: None,
            gp: None,
            local: None,
            summary: Summary::new(None, None, None, Vec::new()),
            timing: BTreeMap::new(),
        }
    }

    pub fn to_json(&self, compact: bool) -> String {
        let mut s = if compact { serde_json::to_string(self) } else { serde_json::to_string_pretty(self) }.expect("report serializes");
        s.push('\n');
        s
    }
}
