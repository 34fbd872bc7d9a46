//! Truncated half-space compression `H#(t)` and its spectral flow.

mod flow;
mod sweep;

pub use flow::{spectral_flow_phillips, spectral_flow_seeded, Crossing, FlowAccount, PartitionInterval};
pub use sweep::{edge_sweep, levels_at, refine_crossing, window_eigenpairs, EdgeSweep, Level, RefinedCrossing, SyntheticBranch};

use crate::banded::HermitianBand;
use crate::bulk::{ladder, LadderStep};
use crate::model::HoppingFamily;
use crate::spectral::GapCertificate;
use crate::{CMat, Error, Result, C64};
use alloc::format;
use alloc::vec::Vec;

/// Window of `L` cells `n = 0..L-1` with Dirichlet truncation on both ends.
/// The left end (`n = 0`) is the physical edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeOperatorPlan {
    pub cells: usize,
    pub dim: usize,
    pub range: usize,
}

impl EdgeOperatorPlan {
    pub fn new(family: &HoppingFamily, cells: usize) -> Result<Self> {
        let plan = EdgeOperatorPlan { cells, dim: family.dim(), range: family.range() };
        if cells == 0 || cells < 4 * plan.range {
            return Err(Error::Config(format!("edge window L = {cells} must be at least 4R = {}", 4 * plan.range)));
        }
        Ok(plan)
    }

    /// `L N`.
    pub fn size(&self) -> usize {
        self.cells * self.dim
    }

    /// Scalar half-bandwidth of the truncated matrix.
    pub fn bandwidth(&self) -> usize {
        (self.range + 1) * self.dim - 1
    }

    /// Number of leading rows that count as the left half.
    pub fn left_rows(&self) -> usize {
        (self.cells / 2) * self.dim
    }

    pub fn with_cells(&self, cells: usize) -> Self {
        EdgeOperatorPlan { cells, ..*self }
    }
}

/// Hopping matrices `A_j(t)` for `j = -R..=R`.
pub(crate) fn hoppings(family: &HoppingFamily, t: C64) -> Vec<CMat> {
    let r = family.range() as i64;
    (-r..=r).map(|j| family.hopping(j, t)).collect()
}

/// Band form of the truncation: block `(n, n')` is `A_{n-n'}(t)`.
pub fn edge_band(family: &HoppingFamily, t: C64, plan: &EdgeOperatorPlan) -> HermitianBand {
    let a = hoppings(family, t);
    let (n, r) = (plan.dim, plan.range as i64);
    HermitianBand::from_lower_fn(plan.size(), plan.bandwidth(), |i, j| {
        let d = (i / n) as i64 - (j / n) as i64;
        if d > r {
            C64::new(0.0, 0.0)
        } else {
            a[(d + r) as usize][(i % n, j % n)]
        }
    })
}

/// Dense `L N x L N` truncation.
pub fn edge_matrix(family: &HoppingFamily, t: C64, plan: &EdgeOperatorPlan) -> CMat {
    edge_band(family, t, plan).to_dense()
}

/// Edge index with its ladder trail.
#[derive(Debug, Clone)]
pub struct EdgeIndex {
    pub index: i64,
    pub account: FlowAccount,
    pub sweep: EdgeSweep,
    pub trail: Vec<LadderStep>,
    pub cells: usize,
    pub t_points: usize,
}

/// Filtered spectral flow on fixed parameters.
pub fn edge_flow_at(
    family: &HoppingFamily,
    cert: &GapCertificate,
    cells: usize,
    t_points: usize,
    theta: f64,
) -> Result<(FlowAccount, EdgeSweep)> {
    let plan = EdgeOperatorPlan::new(family, cells)?;
    let sweep = edge_sweep(family, cert.mu, cert.half_gap(), &plan, t_points)?;
    let account = spectral_flow_phillips(&sweep, theta)?;
    Ok((account, sweep))
}

/// Edge index: spectral flow of left branches through `mu`, stabilized by
/// doubling `G_t` and then `L`.
pub fn edge_index(family: &HoppingFamily, cert: &GapCertificate, cells: usize, t_points: usize, theta: f64) -> Result<EdgeIndex> {
    if !cert.certified {
        return Err(Error::Gap(format!("mu = {} is not certified in a gap", cert.mu)));
    }
    let mut trail = Vec::new();
    let (g, _, _) = ladder("G_t(edge)", t_points, 4, &mut trail, |g| {
        let (acc, _) = edge_flow_at(family, cert, cells, g, theta)?;
        Ok((crate::ORIENTATION * acc.total, ()))
    })?;
    let (l, index, (account, sweep)) = ladder("L(edge)", cells, 4, &mut trail, |l| {
        let (acc, sw) = edge_flow_at(family, cert, l, g, theta)?;
        Ok((crate::ORIENTATION * acc.total, (acc, sw)))
    })?;
    Ok(EdgeIndex { index, account, sweep, trail, cells: l, t_points: g })
}
