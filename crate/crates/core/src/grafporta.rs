//! Kernel bundle of the truncated map `H_flat(z, t)`: rows `k..L-1` of
//! `H_L(t) - z` against all `L` columns. Its kernel is the space of solutions
//! of the eigenvalue equation away from the edge, which decay into the bulk.

use crate::banded::{BandMatrix, HermitianBand};
use crate::bulk::{chern_number, ladder, ChernResult, LadderStep};
use crate::edge::{edge_band, edge_matrix, EdgeOperatorPlan};
use crate::grid::{angle, TorusGrid};
use crate::math::{self, cabs, carg, cis, orthonormalize, seeded_matrix, wrap_angle};
use crate::model::HoppingFamily;
use crate::spectral::{kernel_frame_with, subspace_angle, Contour, ProjectorField};
use crate::tolerances::Tolerances;
use crate::{par, CMat, Error, Result, C64, ORIENTATION};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Shape of the truncated map and the evidence that it is surjective.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatOperatorPlan {
    /// Deleted block rows.
    pub k: usize,
    /// Window length in cells.
    pub cells: usize,
    pub dim: usize,
    pub range: usize,
    /// Smallest certified `sigma_min / sigma_max` over the grid.
    pub surjectivity: f64,
    /// Largest subspace angle between fibers at `L` and `2L`.
    pub window_angle: f64,
}

impl FlatOperatorPlan {
    /// Unchecked plan, for evaluating single fibers.
    pub fn new(family: &HoppingFamily, k: usize, cells: usize) -> Result<Self> {
        if k == 0 || cells < 4 * k || cells < 4 * family.range() {
            return Err(Error::Config(format!("need k >= 1 and L >= 4k, 4R (k = {k}, L = {cells})")));
        }
        Ok(FlatOperatorPlan { k, cells, dim: family.dim(), range: family.range(), surjectivity: f64::NAN, window_angle: f64::NAN })
    }

    /// `k N`, the fiber rank.
    pub fn rank(&self) -> usize {
        self.k * self.dim
    }

    fn edge_plan(&self) -> EdgeOperatorPlan {
        EdgeOperatorPlan { cells: self.cells, dim: self.dim, range: self.range }
    }

    fn with_cells(&self, cells: usize) -> Self {
        FlatOperatorPlan { cells, ..self.clone() }
    }
}

/// Fiber of the truncated map at one `(z, t)`.
#[derive(Debug, Clone)]
pub struct FlatFiber {
    /// Orthonormal `L N x k N` kernel frame.
    pub frame: CMat,
    /// `|H_flat F|_F`, the size of the kernel singular values.
    pub residual: f64,
}

/// Surjectivity evidence at one `(z, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surjectivity {
    /// Estimate of `sigma_min(H_flat)` from inverse iteration.
    pub sigma_est: f64,
    /// Certified lower bound of `sigma_min(H_flat)`.
    pub sigma_lower: f64,
    /// Upper bound of `sigma_max(H_flat)`.
    pub sigma_upper: f64,
}

impl Surjectivity {
    pub fn ratio(&self) -> f64 {
        self.sigma_lower / self.sigma_upper
    }
}

fn shifted_band(family: &HoppingFamily, z: C64, t: C64, plan: &FlatOperatorPlan) -> (HermitianBand, BandMatrix) {
    let band = edge_band(family, t, &plan.edge_plan());
    let shifted = band.shifted(z);
    (band, shifted)
}

/// Kernel frame of `H_flat(z, t)` through the resolvent: when `H_L - z` is
/// invertible the kernel is `(H_L - z)^{-1}` applied to the first `k N`
/// coordinates.
pub fn flat_fiber(family: &HoppingFamily, z: C64, t: C64, plan: &FlatOperatorPlan) -> Result<FlatFiber> {
    let (_, m) = shifted_band(family, z, t, plan);
    let (n, r) = (plan.cells * plan.dim, plan.rank());
    let scale = family.norm_bound().max(1.0) + cabs(z);
    let lu = m.clone().lu(0.0);
    if !(lu.min_pivot() > 1e-13 * scale) {
        return Err(Error::conditioning(format!("H_L - z singular at z = {z}, use the dense kernel"), Vec::new()));
    }
    let mut y = CMat::zeros(n, r);
    for i in 0..r {
        y[(i, i)] = C64::new(1.0, 0.0);
    }
    lu.solve_in_place(&mut y);
    let frame = orthonormalize(y);
    let image = m.mul(&frame);
    let residual = image.rows(r, n - r).norm();
    Ok(FlatFiber { frame, residual })
}

/// Dense `(L - k) N x L N` matrix of the truncated map.
pub fn flat_matrix(family: &HoppingFamily, z: C64, t: C64, plan: &FlatOperatorPlan) -> CMat {
    let mut h = edge_matrix(family, t, &plan.edge_plan());
    for i in 0..h.nrows() {
        h[(i, i)] -= z;
    }
    let r = plan.rank();
    h.rows(r, h.nrows() - r).into_owned()
}

/// Kernel frame of the dense truncated map by singular value decomposition.
pub fn flat_fiber_dense(family: &HoppingFamily, z: C64, t: C64, plan: &FlatOperatorPlan, tol: &Tolerances) -> Result<FlatFiber> {
    let a = flat_matrix(family, z, t, plan);
    let k = kernel_frame_with(&a, Some(plan.rank()), tol.sigma_tol, tol.kernel_gap_ratio)?;
    let residual = (&a * &k.frame).norm();
    Ok(FlatFiber { frame: k.frame, residual })
}

/// Bound `sigma_min(H_flat)` from below via Cholesky factorizations of
/// `H_flat H_flat^dagger - s`.
pub fn surjectivity(family: &HoppingFamily, z: C64, t: C64, plan: &FlatOperatorPlan) -> Surjectivity {
    let (band, _) = shifted_band(family, z, t, plan);
    let (n, r, w) = (band.n(), plan.rank(), band.bandwidth());
    let rows = n - r;
    let entry = |i: usize, j: usize| {
        let mut v = band.get(i, j);
        if i == j {
            v -= z;
        }
        v
    };
    let gram = HermitianBand::from_lower_fn(rows, 2 * w, |a, b| {
        let (ra, rb) = (a + r, b + r);
        let lo = ra.saturating_sub(w);
        let hi = (rb + w).min(n - 1);
        let mut acc = C64::new(0.0, 0.0);
        for j in lo..=hi {
            acc += entry(ra, j) * entry(rb, j).conj();
        }
        acc
    });
    let sigma_upper = family.norm_bound() + cabs(z);
    let mut out = Surjectivity { sigma_est: 0.0, sigma_lower: 0.0, sigma_upper };
    let Some(chol) = gram.cholesky(0.0) else {
        return out;
    };
    let mut x = orthonormalize(seeded_matrix(rows, 1, 0xc0ffee));
    let mut lambda = f64::INFINITY;
    for _ in 0..12 {
        chol.solve_in_place(&mut x);
        let nrm = x.norm();
        if !(nrm > 0.0) {
            break;
        }
        x /= C64::new(nrm, 0.0);
        let gx = gram.mul(&x);
        lambda = (x.adjoint() * gx)[(0, 0)].re;
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return out;
    }
    out.sigma_est = math::sqrt(lambda);
    let mut s = 0.25 * lambda;
    for _ in 0..8 {
        if gram.cholesky(s).is_some() {
            out.sigma_lower = math::sqrt(s);
            break;
        }
        s *= 0.0625;
    }
    out
}

/// Fiber and surjectivity data over a `(z, t)` grid.
struct GridFibers {
    frames: Vec<CMat>,
    residuals: Vec<f64>,
    surj: Vec<Surjectivity>,
}

fn grid_fibers(family: &HoppingFamily, nodes: &[C64], t_points: usize, plan: &FlatOperatorPlan, with_surj: bool) -> Result<GridFibers> {
    let grid = TorusGrid::new(nodes.len(), t_points);
    let pts = par::try_map_indexed(grid.len(), |k| {
        let (s, j) = grid.coords(k);
        let t = cis(angle(j, t_points));
        let f = flat_fiber(family, nodes[s], t, plan)?;
        let sj = if with_surj { Some(surjectivity(family, nodes[s], t, plan)) } else { None };
        Ok((f, sj))
    })?;
    let mut out = GridFibers { frames: Vec::new(), residuals: Vec::new(), surj: Vec::new() };
    for (f, s) in pts {
        out.frames.push(f.frame);
        out.residuals.push(f.residual);
        if let Some(s) = s {
            out.surj.push(s);
        }
    }
    Ok(out)
}

/// Restrict frames of a `2L` window to the first `L` cells and compare spans.
fn window_angle(a: &[CMat], b: &[CMat], rows: usize) -> f64 {
    a.iter()
        .zip(b)
        .map(|(fa, fb)| subspace_angle(fa, &orthonormalize(fb.rows(0, rows).into_owned())))
        .fold(0.0, f64::max)
}

/// Kernel bundle over `gamma x T`.
#[derive(Debug, Clone)]
pub struct GPField {
    pub field: ProjectorField,
    pub plan: FlatOperatorPlan,
    /// Largest `|H_flat F|` over the grid.
    pub max_residual: f64,
    /// Smallest certified `sigma_min(H_flat) / |H_flat F|` over the grid.
    pub min_gap_ratio: f64,
    pub surjectivity: Vec<Surjectivity>,
}

/// Smallest `k >= max(R, 1)` with a certified surjective truncation on the
/// grid, and a window `L` stable under doubling. A fixed `k` is only checked.
pub fn select_k(family: &HoppingFamily, gamma: &Contour, t_points: usize, cells: usize, fixed_k: Option<usize>, tol: &Tolerances) -> Result<(GPField, usize)> {
    let k0 = family.range().max(1);
    let (k_lo, k_max) = match fixed_k {
        Some(0) => return Err(Error::Config("gp.k must be at least 1".into())),
        Some(k) => (k, k),
        None => (k0, 8 * k0),
    };
    let mut worst = Vec::new();
    for k in k_lo..=k_max {
        let mut plan = FlatOperatorPlan::new(family, k, cells.max(4 * k))?;
        let fib = grid_fibers(family, &gamma.nodes, t_points, &plan, true)?;
        let ratio = fib.surj.iter().map(|s| s.ratio()).fold(f64::INFINITY, f64::min);
        worst.push(ratio);
        if !(ratio > tol.surjectivity) {
            continue;
        }
        plan.surjectivity = ratio;
        let mut current = fib;
        loop {
            let doubled = plan.with_cells(2 * plan.cells);
            let next = grid_fibers(family, &gamma.nodes, t_points, &doubled, false)?;
            let angle = window_angle(&current.frames, &next.frames, plan.cells * plan.dim);
            if angle < tol.window_angle {
                plan.window_angle = angle;
                return Ok((assemble(current, plan, gamma.len(), t_points)?, k));
            }
            if doubled.cells > 4096 {
                return Err(Error::NotConverged(format!("window L did not stabilize (angle {angle:.2e} at L = {})", plan.cells)));
            }
            plan = doubled;
            current = grid_fibers(family, &gamma.nodes, t_points, &plan, true)?;
            plan.surjectivity = current.surj.iter().map(|s| s.ratio()).fold(f64::INFINITY, f64::min);
        }
    }
    Err(Error::Model(format!("no k <= {k_max} gives a surjective truncation; worst sigma ratios per k: {worst:?}")))
}

fn assemble(fib: GridFibers, plan: FlatOperatorPlan, g_z: usize, t_points: usize) -> Result<GPField> {
    let grid = TorusGrid::new(g_z, t_points);
    let max_residual = fib.residuals.iter().cloned().fold(0.0, f64::max);
    if max_residual > 1e-6 {
        return Err(Error::InconsistentFiber(format!("kernel residual {max_residual:.2e} exceeds 1e-6")));
    }
    let min_gap_ratio = fib
        .surj
        .iter()
        .zip(&fib.residuals)
        .map(|(s, r)| s.sigma_lower / r.max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    Ok(GPField { field: ProjectorField::from_frames(grid, fib.frames)?, plan, max_residual, min_gap_ratio, surjectivity: fib.surj })
}

/// Kernel bundle on a given plan (no selection).
pub fn gp_field(family: &HoppingFamily, gamma: &Contour, t_points: usize, plan: &FlatOperatorPlan) -> Result<GPField> {
    let fib = grid_fibers(family, &gamma.nodes, t_points, plan, true)?;
    let mut plan = plan.clone();
    plan.surjectivity = fib.surj.iter().map(|s| s.ratio()).fold(f64::INFINITY, f64::min);
    assemble(fib, plan, gamma.len(), t_points)
}

/// Index of the kernel bundle with its evidence.
#[derive(Debug, Clone)]
pub struct GPIndex {
    pub index: i64,
    pub result: ChernResult,
    pub plan: FlatOperatorPlan,
    pub min_gap_ratio: f64,
    pub trail: Vec<LadderStep>,
    pub g_z: usize,
    pub t_points: usize,
}

/// Chern number of the kernel bundle on fixed grids.
pub fn gp_chern_at(
    family: &HoppingFamily,
    gamma: &Contour,
    g_z: usize,
    t_points: usize,
    cells: usize,
    fixed_k: Option<usize>,
    tol: &Tolerances,
) -> Result<(ChernResult, GPField)> {
    let nodes = gamma.resampled(g_z).unwrap_or_else(|| gamma.clone());
    let (field, _) = select_k(family, &nodes, t_points, cells, fixed_k, tol)?;
    let res = chern_number(&field.field, ORIENTATION)?;
    Ok((res, field))
}

/// Kernel-bundle index, stabilized by doubling `G_z`, then `G_t`, then `L`.
pub fn gp_index(
    family: &HoppingFamily,
    gamma: &Contour,
    g_z: usize,
    t_points: usize,
    cells: usize,
    fixed_k: Option<usize>,
    tol: &Tolerances,
) -> Result<GPIndex> {
    let mut trail = Vec::new();
    let at = |gz, gt, l| gp_chern_at(family, gamma, gz, gt, l, fixed_k, tol);
    let (gz, _, _) = ladder("G_z", g_z, 4, &mut trail, |g| Ok((at(g, t_points, cells)?.0.chern, ())))?;
    let (gt, _, _) = ladder("G_t(gp)", t_points, 4, &mut trail, |g| Ok((at(gz, g, cells)?.0.chern, ())))?;
    let (_, index, (result, field)) = ladder("L(gp)", cells, 4, &mut trail, |l| {
        let (r, f) = at(gz, gt, l)?;
        Ok((r.chern, (r, f)))
    })?;
    Ok(GPIndex { index, result, min_gap_ratio: field.min_gap_ratio, plan: field.plan, trail, g_z: gz, t_points: gt })
}

/// Decaying solutions of `sum_j A_j(t) phi_{n-j} = z phi_n` from the transfer
/// matrix, on the first `cells` sites, orthonormalized. Needs `A_{+-R}`
/// invertible.
pub fn transfer_matrix_fiber(family: &HoppingFamily, z: C64, t: C64, cells: usize) -> Result<CMat> {
    let (n, r) = (family.dim(), family.range());
    if r == 0 {
        return Err(Error::Unsupported("transfer matrix needs R >= 1".into()));
    }
    let ri = r as i64;
    for j in [-ri, ri] {
        let a = family.hopping(j, t);
        let sv = math::singular_values_desc(&a);
        if sv[n - 1] <= 1e-10 * sv[0].max(1.0) {
            return Err(Error::Unsupported(format!("A_{j}(t) is singular (sigma_min = {:.2e})", sv[n - 1])));
        }
    }
    let d = 2 * r * n;
    let inv = family.hopping(-ri, t).lu().try_inverse().ok_or_else(|| Error::Unsupported("A_-R not invertible".into()))?;
    let mut tm = CMat::zeros(d, d);
    for b in 0..2 * r - 1 {
        for i in 0..n {
            tm[(b * n + i, (b + 1) * n + i)] = C64::new(1.0, 0.0);
        }
    }
    // phi_{n+2R} = A_{-R}^{-1} (z phi_{n+R} - sum_{j > -R} A_j phi_{n+R-j})
    for j in (-ri + 1)..=ri {
        let mut a = -family.hopping(j, t);
        if j == 0 {
            for i in 0..n {
                a[(i, i)] += z;
            }
        }
        let blk = &inv * a;
        let col = (ri - j) as usize;
        tm.view_mut(((2 * r - 1) * n, col * n), (n, n)).copy_from(&blk);
    }
    let eig = tm.clone().schur().eigenvalues().ok_or_else(|| Error::SpectralLocalization("no Schur form".into()))?;
    let mut contraction: f64 = 0.0;
    for e in eig.iter() {
        let m = cabs(*e);
        if (m - 1.0).abs() < 1e-8 {
            return Err(Error::SpectralLocalization(format!("eigenvalue of modulus {m:.10}")));
        }
        contraction = contraction.max(if m < 1.0 { m } else { 1.0 / m });
    }
    // Riesz projection onto the eigenvalues inside the unit circle.
    let mut q = 64usize;
    let riesz = |q: usize| -> Result<CMat> {
        let mut p = CMat::zeros(d, d);
        for s in 0..q {
            let zeta = cis(2.0 * PI * (s as f64 + 0.5) / q as f64);
            let mut a = -tm.clone();
            for i in 0..d {
                a[(i, i)] += zeta;
            }
            let res = a.lu().try_inverse().ok_or_else(|| Error::SpectralLocalization("unit-circle resolvent singular".into()))?;
            p += res * (zeta / q as f64);
        }
        Ok(p)
    };
    let need = math::ceil(math::ln(1e-15) / math::ln(contraction)) as usize;
    while q < need.min(1 << 16) {
        q *= 2;
    }
    let p = riesz(q)?;
    let rank = math::round(p.trace().re) as usize;
    if rank != r * n {
        return Err(Error::InconsistentFiber(format!("{rank} decaying modes, expected {}", r * n)));
    }
    let w = orthonormalize(&p * seeded_matrix(d, rank, 0x5eed));
    if (&p * &w - &w).norm() > 1e-8 {
        return Err(Error::InconsistentFiber("decaying subspace basis is not invariant under the projection".into()));
    }
    let lambda = w.adjoint() * &tm * &w;
    let mut phi = CMat::zeros(cells * n, rank);
    let mut cur = w;
    for site in 0..cells {
        phi.view_mut((site * n, 0), (n, rank)).copy_from(&cur.rows(0, n));
        cur = &cur * &lambda;
    }
    Ok(orthonormalize(phi))
}

/// Matrix of `H#(t) - z` on a fiber frame, against the first `k N` coordinates.
pub fn g_matrix(family: &HoppingFamily, z: C64, t: C64, plan: &FlatOperatorPlan, frame: &CMat) -> Result<CMat> {
    let (_, m) = shifted_band(family, z, t, plan);
    let image = m.mul(frame);
    let r = plan.rank();
    let lower = image.rows(r, image.nrows() - r);
    for c in 0..lower.ncols() {
        let v = lower.column(c).norm();
        if v > 1e-6 {
            return Err(Error::InconsistentFiber(format!("column {c} leaves rows n >= k with norm {v:.2e}")));
        }
    }
    Ok(image.rows(0, r).into_owned())
}

/// Dimension of the kernel of `g` at a real `z`, from the dense kernel frame.
pub fn g_kernel_dim(family: &HoppingFamily, z: f64, t: C64, plan: &FlatOperatorPlan, tol: &Tolerances) -> Result<(usize, Vec<f64>)> {
    let fiber = flat_fiber_dense(family, C64::new(z, 0.0), t, plan, tol)?;
    let g = g_matrix(family, C64::new(z, 0.0), t, plan, &fiber.frame)?;
    let sv = math::singular_values_desc(&g);
    let cut = tol.sigma_tol * family.norm_bound().max(1.0);
    Ok((sv.iter().filter(|&&s| s < cut).count(), sv))
}

/// Winding of `det g` around a circle in the `z` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Winding {
    pub winding: i64,
    /// Unrounded winding.
    pub raw: f64,
    /// Argument of the closing holonomy.
    pub holonomy: f64,
    pub nodes: usize,
    /// Eigenvalues of `H_L(t*)` inside the circle, with multiplicity.
    pub enclosed: usize,
}

/// Closest unitary to `m` (polar factor).
fn polar_unitary(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Number of zeros of `det g(z, t*)` inside `|z - z0| = rho`, from the argument
/// principle with parallel-transported fiber frames.
pub fn det_g_winding(family: &HoppingFamily, theta: f64, z0: f64, rho: f64, plan: &FlatOperatorPlan, nodes: usize) -> Result<Winding> {
    let t = cis(theta);
    let edge_plan = plan.edge_plan();
    let band = edge_band(family, t, &edge_plan);
    let scale = family.norm_bound().max(1.0);
    let (vals, _) = crate::edge::window_eigenpairs(&band, z0 - 2.0 * rho, z0 + 2.0 * rho, scale);
    let mut enclosed = 0;
    for &e in &vals {
        let d = (e - z0).abs();
        if (d - rho).abs() < 1e-3 * rho {
            return Err(Error::Contour(format!("eigenvalue {e} lies on the winding circle")));
        }
        if d < rho {
            enclosed += 1;
        }
    }
    let mut q = nodes.max(64);
    loop {
        match winding_on(family, t, z0, rho, plan, q) {
            Ok((raw, holonomy)) => {
                let winding = math::round(raw) as i64;
                if (raw - winding as f64).abs() > 0.1 {
                    return Err(Error::conditioning(format!("winding {raw:.4} is not near an integer"), Vec::new()));
                }
                if winding < 0 {
                    return Err(Error::conditioning(format!("negative winding {winding} of a holomorphic determinant"), Vec::new()));
                }
                return Ok(Winding { winding, raw, holonomy, nodes: q, enclosed });
            }
            Err(e) if e.is_refinable() && q < 4096 => q *= 2,
            Err(e) => return Err(e),
        }
    }
}

fn winding_on(family: &HoppingFamily, t: C64, z0: f64, rho: f64, plan: &FlatOperatorPlan, q: usize) -> Result<(f64, f64)> {
    let zs: Vec<C64> = (0..q).map(|s| C64::new(z0, 0.0) + cis(2.0 * PI * (s as f64 + 0.5) / q as f64) * rho).collect();
    let frames = par::try_map_indexed(q, |s| Ok(flat_fiber(family, zs[s], t, plan)?.frame))?;
    let det_g = |s: usize, f: &CMat| -> Result<C64> { Ok(g_matrix(family, zs[s], t, plan, f)?.determinant()) };
    let mut aligned = frames[0].clone();
    let mut prev = det_g(0, &aligned)?;
    let mut total = 0.0;
    for s in 1..=q {
        let idx = s % q;
        let u = polar_unitary(&(frames[idx].adjoint() * &aligned));
        aligned = &frames[idx] * u;
        let d = det_g(idx, &aligned)?;
        let step = carg(d / prev);
        if step.abs() >= PI / 2.0 {
            return Err(Error::RefineGrid(format!("Q = {q}: det g turns by {step:.3} in one step")));
        }
        total += step;
        prev = d;
    }
    // `aligned` is now the transported frame at node 0; remove its holonomy.
    let hol = (frames[0].adjoint() * &aligned).determinant();
    let holonomy = carg(hol);
    Ok(((total - holonomy) / (2.0 * PI), wrap_angle(holonomy)))
}

/// Per-crossing local data: winding of `det g` and `dim Ker g` at the crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCrossing {
    pub theta: f64,
    pub energy: f64,
    pub direction: i64,
    pub multiplicity: usize,
    pub kernel_dim: usize,
    pub winding: i64,
    pub radius: f64,
}

/// For every counted crossing of `account`, locate `t*`, and compute the
/// local winding and kernel dimension of `g`.
pub fn local_index(
    family: &HoppingFamily,
    sweep: &crate::edge::EdgeSweep,
    account: &crate::edge::FlowAccount,
    plan: &FlatOperatorPlan,
    tol: &Tolerances,
) -> Result<Vec<LocalCrossing>> {
    let edge_plan = plan.edge_plan();
    let mut out = Vec::new();
    for c in account.crossings.iter().filter(|c| c.counted) {
        let rc = crate::edge::refine_crossing(family, &edge_plan, sweep, c.step, c.level)?;
        let others = rc
            .levels
            .iter()
            .filter(|l| (l.energy - rc.energy).abs() > 1e-9 || (l.left_mass - rc.level.left_mass).abs() > 0.05)
            .map(|l| (l.energy - rc.energy).abs())
            .fold(f64::INFINITY, f64::min);
        let rho = (0.5 * others).min(0.5 * sweep.half_window);
        let t = cis(rc.theta);
        let (kernel_dim, _) = g_kernel_dim(family, rc.energy, t, plan, tol)?;
        let w = det_g_winding(family, rc.theta, rc.energy, rho, plan, 64)?;
        out.push(LocalCrossing {
            theta: rc.theta,
            energy: rc.energy,
            direction: c.direction,
            multiplicity: c.multiplicity,
            kernel_dim,
            winding: w.winding,
            radius: rho,
        });
    }
    Ok(out)
}
