//! Bloch projector field and its lattice Chern number.

use crate::grid::TorusGrid;
use crate::math::{carg, cabs, round};
use crate::model::BlochSymbol;
use crate::spectral::{self, Contour, ProjectorField};
use crate::tolerances::Tolerances;
use crate::{Error, Result, ORIENTATION};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Riesz projector field of the bands below the Fermi level.
#[derive(Debug, Clone)]
pub struct BlochBundleField {
    pub field: ProjectorField,
}

impl BlochBundleField {
    pub fn rank(&self) -> usize {
        self.field.rank()
    }
}

/// Lattice field strength of a projector field.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernResult {
    pub chern: i64,
    /// `sum F12 / 2 pi`, before rounding and orientation.
    pub raw: f64,
    /// Plaquette phases, row-major over the grid.
    pub plaquettes: Vec<f64>,
    pub admissible: bool,
    pub grid: TorusGrid,
    /// Smallest link modulus seen.
    pub min_link: f64,
    /// Largest plaquette phase magnitude.
    pub max_plaquette: f64,
}

/// Riesz projections of `symbol` over `grid`; rank must be constant.
pub fn bloch_field(symbol: &BlochSymbol, gamma: &Contour, grid: TorusGrid, tol: &Tolerances) -> Result<BlochBundleField> {
    if grid.g1 < 8 || grid.g2 < 8 {
        return Err(Error::Config(format!("bulk grid {}x{} is below 8x8", grid.g1, grid.g2)));
    }
    let projs = spectral::riesz_field(symbol, gamma, grid, tol)?;
    let ranks: Vec<i64> = projs.iter().map(|p| round(p.trace().re) as i64).collect();
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        for (a, b) in [(i + 1, j), (i, j + 1)] {
            let k2 = grid.index(a, b);
            if ranks[k] != ranks[k2] {
                return Err(Error::Gap(format!(
                    "projector rank jumps from {} to {} between grid points ({i}, {j}) and ({}, {})",
                    ranks[k],
                    ranks[k2],
                    a % grid.g1,
                    b % grid.g2
                )));
            }
        }
    }
    Ok(BlochBundleField { field: ProjectorField::from_projectors(grid, &projs, tol)? })
}

/// Link and plaquette variables of a field, whatever their size.
pub fn field_strength(field: &ProjectorField, orientation: i64) -> ChernResult {
    let grid = field.grid();
    let link = |i: usize, j: usize, di: usize, dj: usize| {
        let a = field.frame(i, j);
        let b = field.frame(i + di, j + dj);
        if a.ncols() == 0 {
            return crate::C64::new(1.0, 0.0);
        }
        (a.adjoint() * b).determinant()
    };
    let links: Vec<(crate::C64, crate::C64)> = crate::par::map_indexed(grid.len(), |k| {
        let (i, j) = grid.coords(k);
        (link(i, j, 1, 0), link(i, j, 0, 1))
    });
    let mut plaquettes = Vec::with_capacity(grid.len());
    let mut min_link = f64::INFINITY;
    let mut sum = 0.0;
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        let u1 = links[k].0;
        let u2 = links[k].1;
        let u2_right = links[grid.index(i + 1, j)].1;
        let u1_up = links[grid.index(i, j + 1)].0;
        min_link = min_link.min(cabs(u1)).min(cabs(u2));
        let f = carg(u1 * u2_right * u1_up.conj() * u2.conj());
        sum += f;
        plaquettes.push(f);
    }
    let max_plaquette = plaquettes.iter().fold(0.0f64, |a, f| a.max(f.abs()));
    let raw = sum / (2.0 * PI);
    ChernResult {
        chern: orientation * round(raw) as i64,
        raw,
        plaquettes,
        admissible: max_plaquette < PI - 0.1 && min_link >= 1e-6,
        grid,
        min_link,
        max_plaquette,
    }
}

/// Chern number of a projector field; inadmissible grids are an error that
/// asks for refinement.
pub fn chern_number(field: &ProjectorField, orientation: i64) -> Result<ChernResult> {
    let res = field_strength(field, orientation);
    if !res.admissible {
        return Err(Error::RefineGrid(format!(
            "{}x{} grid is inadmissible (max |F12| = {:.3}, min |U| = {:.2e})",
            res.grid.g1, res.grid.g2, res.max_plaquette, res.min_link
        )));
    }
    if (res.raw - round(res.raw)).abs() >= 0.05 {
        return Err(Error::conditioning(format!("plaquette sum {:.4} is not near an integer", res.raw), Vec::new()));
    }
    Ok(res)
}

/// One rung of a convergence ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderStep {
    pub parameter: &'static str,
    pub value: usize,
    /// `None` when this rung failed with a refinable error.
    pub index: Option<i64>,
}

/// Bulk index with its evidence.
#[derive(Debug, Clone)]
pub struct BulkIndex {
    pub index: i64,
    pub result: ChernResult,
    pub trail: Vec<LadderStep>,
}

/// Chern number of the Bloch field on a fixed grid.
pub fn bulk_chern_at(symbol: &BlochSymbol, gamma: &Contour, grid: TorusGrid, tol: &Tolerances) -> Result<ChernResult> {
    let field = bloch_field(symbol, gamma, grid, tol)?;
    chern_number(&field.field, ORIENTATION)
}

/// Run a doubling ladder on one parameter until two consecutive rungs give
/// the same integer. `eval` maps a parameter value to an index or an error;
/// refinable errors move on to the next rung.
pub fn ladder<T: Clone>(
    parameter: &'static str,
    start: usize,
    max_rungs: usize,
    trail: &mut Vec<LadderStep>,
    mut eval: impl FnMut(usize) -> Result<(i64, T)>,
) -> Result<(usize, i64, T)> {
    let mut value = start;
    let mut prev: Option<(usize, i64, T)> = None;
    for _ in 0..max_rungs {
        match eval(value) {
            Ok((index, data)) => {
                trail.push(LadderStep { parameter, value, index: Some(index) });
                if let Some(p) = &prev {
                    if p.1 == index {
                        return Ok(p.clone());
                    }
                }
                prev = Some((value, index, data));
            }
            Err(e) if e.is_refinable() => {
                trail.push(LadderStep { parameter, value, index: None });
                prev = None;
            }
            Err(e) => return Err(e),
        }
        value *= 2;
    }
    Err(Error::NotConverged(format!("{parameter} ladder from {start} did not stabilize in {max_rungs} rungs")))
}

/// Bulk index on a prepared contour, with automatic refinement: the `eta`
/// grid is doubled until two rungs agree, then the `t` grid.
pub fn bulk_index_with(symbol: &BlochSymbol, gamma: &Contour, grid: TorusGrid, tol: &Tolerances) -> Result<BulkIndex> {
    let mut trail = Vec::new();
    let (g1, _, _) = ladder("G_eta", grid.g1, 5, &mut trail, |g| {
        let r = bulk_chern_at(symbol, gamma, TorusGrid::new(g, grid.g2), tol)?;
        Ok((r.chern, ()))
    })?;
    let (_, index, result) = ladder("G_t", grid.g2, 5, &mut trail, |g| {
        let r = bulk_chern_at(symbol, gamma, TorusGrid::new(g1, g), tol)?;
        Ok((r.chern, r))
    })?;
    Ok(BulkIndex { index, result, trail })
}

/// Bulk index of `symbol` at Fermi level `mu`: certify the gap, build the
/// default contour and run [`bulk_index_with`].
pub fn bulk_index(symbol: &BlochSymbol, mu: f64, grid: TorusGrid) -> Result<BulkIndex> {
    let (_, gamma) = spectral::prepare(symbol, mu, grid, 64)?;
    bulk_index_with(symbol, &gamma, grid, &Tolerances::default())
}
