use super::{edge_band, EdgeOperatorPlan};
use crate::banded::HermitianBand;
use crate::grid::angle;
use crate::math::{self, cis, hermitian_eigen, orthonormalize, seeded_matrix};
use crate::model::HoppingFamily;
use crate::{par, CMat, Error, Result, C64};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// One (possibly degenerate) in-window level at a fixed `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub multiplicity: usize,
    /// Mean weight on the left half of the window, in `[0, 1]`.
    pub left_mass: f64,
    /// Orthonormal eigenvectors, `L N x multiplicity`; absent for synthetic sweeps.
    pub vectors: Option<CMat>,
}

/// In-window spectrum of the truncation along a periodic `t` grid, with
/// levels linked across neighbouring points.
#[derive(Debug, Clone)]
pub struct EdgeSweep {
    pub mu: f64,
    /// Half-width of the window `[mu - w, mu + w]`.
    pub half_window: f64,
    /// Levels at `t_a = -pi + 2 pi a / G`, ascending in energy.
    pub levels: Vec<Vec<Level>>,
    /// `links[a][p]` is the index at `t_{a+1}` (cyclically) continuing level `p` at `t_a`.
    pub links: Vec<Vec<Option<usize>>>,
    /// Branch label of each level, consistent along links.
    pub branches: Vec<Vec<usize>>,
}

impl EdgeSweep {
    pub fn t_points(&self) -> usize {
        self.levels.len()
    }

    pub fn t_angle(&self, a: usize) -> f64 {
        angle(a, self.levels.len())
    }

    /// Number of distinct branch labels.
    pub fn branch_count(&self) -> usize {
        self.branches.iter().flatten().map(|b| b + 1).max().unwrap_or(0)
    }

    /// Sweep from explicitly given branches, for testing the flow bookkeeping.
    pub fn synthetic(mu: f64, half_window: f64, t_points: usize, branches: &[SyntheticBranch]) -> Result<Self> {
        let mut rows: Vec<Vec<(f64, usize)>> = vec![Vec::new(); t_points];
        for (b, br) in branches.iter().enumerate() {
            if br.values.len() != t_points {
                return Err(Error::Config(format!("synthetic branch {b} has {} values, expected {t_points}", br.values.len())));
            }
            for (a, v) in br.values.iter().enumerate() {
                if let Some(e) = v {
                    if (e - mu).abs() <= half_window {
                        rows[a].push((*e, b));
                    }
                }
            }
        }
        for r in rows.iter_mut() {
            r.sort_by(|x, y| x.0.total_cmp(&y.0));
        }
        let levels: Vec<Vec<Level>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&(e, b)| Level {
                        energy: e,
                        multiplicity: branches[b].multiplicity,
                        left_mass: branches[b].left_mass,
                        vectors: None,
                    })
                    .collect()
            })
            .collect();
        let links = (0..t_points)
            .map(|a| {
                let next = &rows[(a + 1) % t_points];
                rows[a].iter().map(|&(_, b)| next.iter().position(|&(_, b2)| b2 == b)).collect()
            })
            .collect();
        let branches_out = rows.iter().map(|r| r.iter().map(|&(_, b)| b).collect()).collect();
        Ok(EdgeSweep { mu, half_window, levels, links, branches: branches_out })
    }
}

/// Branch for [`EdgeSweep::synthetic`]: a value (or absence) per `t` point.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBranch {
    pub values: Vec<Option<f64>>,
    pub left_mass: f64,
    pub multiplicity: usize,
}

impl SyntheticBranch {
    /// `f(t)` sampled on the `t` grid.
    pub fn from_fn(t_points: usize, left_mass: f64, f: impl Fn(f64) -> f64) -> Self {
        SyntheticBranch { values: (0..t_points).map(|a| Some(f(angle(a, t_points)))).collect(), left_mass, multiplicity: 1 }
    }
}

struct Isolated {
    lo: f64,
    hi: f64,
    count: usize,
}

fn isolate(band: &HermitianBand, lo: f64, hi: f64, pivmin: f64, scale: f64) -> (Vec<Isolated>, usize) {
    let c_lo = band.count_below(lo, pivmin);
    let c_hi = band.count_below(hi, pivmin);
    let total = c_hi.saturating_sub(c_lo);
    let mut out = Vec::new();
    if total == 0 {
        return (out, 0);
    }
    let cluster_width = 1e-11 * scale;
    let single_width = 1e-7 * scale;
    let mut stack = vec![(lo, hi, c_lo, c_hi)];
    while let Some((a, b, ca, cb)) = stack.pop() {
        if cb <= ca {
            continue;
        }
        let k = cb - ca;
        if b - a <= cluster_width || (k == 1 && b - a <= single_width) {
            out.push(Isolated { lo: a, hi: b, count: k });
            continue;
        }
        let mid = 0.5 * (a + b);
        let cm = band.count_below(mid, pivmin).clamp(ca, cb);
        stack.push((mid, b, cm, cb));
        stack.push((a, mid, ca, cm));
    }
    out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    (out, total)
}

fn refine_group(band: &HermitianBand, lo: f64, hi: f64, m: usize, scale: f64, seed: u64) -> Option<(Vec<f64>, CMat)> {
    let shift = 0.5 * (lo + hi);
    let lu = band.shifted(C64::new(shift, 0.0)).lu(f64::EPSILON * scale);
    let mut x = orthonormalize(seeded_matrix(band.n(), m, seed));
    for it in 0..60 {
        lu.solve_in_place(&mut x);
        x = orthonormalize(x);
        let hx = band.mul(&x);
        let (vals, w) = hermitian_eigen(&(x.adjoint() * &hx));
        let v = &x * &w;
        let hv = hx * &w;
        let mut resid: f64 = 0.0;
        for c in 0..m {
            resid = resid.max((hv.column(c) - v.column(c) * C64::new(vals[c], 0.0)).norm());
        }
        if resid < 1e-11 * scale && it >= 1 {
            let slack = 1e-9 * scale;
            if vals.iter().all(|&e| e >= lo - slack && e <= hi + slack) {
                return Some((vals, v));
            }
            return None;
        }
        x = v;
    }
    None
}

/// Eigenpairs of a Hermitian band matrix with eigenvalues in `[lo, hi)`,
/// ascending. Bisection on inertia counts isolates the eigenvalues, shifted
/// inverse iteration with Rayleigh-Ritz refines them; a dense solve is the
/// fallback if the two disagree.
pub fn window_eigenpairs(band: &HermitianBand, lo: f64, hi: f64, scale: f64) -> (Vec<f64>, CMat) {
    let pivmin = 1e-15 * scale;
    let (cells, total) = isolate(band, lo, hi, pivmin, scale);
    if total == 0 {
        return (Vec::new(), CMat::zeros(band.n(), 0));
    }
    let join = 1e-4 * scale;
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for c in cells {
        match groups.last_mut() {
            Some(g) if c.lo - g.1 < join => {
                g.1 = c.hi;
                g.2 += c.count;
            }
            _ => groups.push((c.lo, c.hi, c.count)),
        }
    }
    let mut vals = Vec::with_capacity(total);
    let mut cols: Vec<CMat> = Vec::new();
    let mut ok = true;
    for (k, &(a, b, m)) in groups.iter().enumerate() {
        match refine_group(band, a, b, m, scale, 0x5eed + k as u64) {
            Some((v, x)) => {
                vals.extend(v);
                cols.push(x);
            }
            None => {
                ok = false;
                break;
            }
        }
    }
    if ok {
        let mut x = CMat::zeros(band.n(), total);
        let mut c0 = 0;
        for blk in &cols {
            x.view_mut((0, c0), (band.n(), blk.ncols())).copy_from(blk);
            c0 += blk.ncols();
        }
        let orth = math::max_abs_diff(&(x.adjoint() * &x), &CMat::identity(total, total));
        if orth < 1e-8 {
            return sort_pairs(vals, x);
        }
    }
    dense_window(band, lo, hi)
}

fn sort_pairs(vals: Vec<f64>, x: CMat) -> (Vec<f64>, CMat) {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let v = order.iter().map(|&i| vals[i]).collect();
    let m = CMat::from_fn(x.nrows(), order.len(), |r, c| x[(r, order[c])]);
    (v, m)
}

fn dense_window(band: &HermitianBand, lo: f64, hi: f64) -> (Vec<f64>, CMat) {
    let (vals, vecs) = hermitian_eigen(&band.to_dense());
    let idx: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= lo && vals[i] < hi).collect();
    let v = idx.iter().map(|&i| vals[i]).collect();
    let m = CMat::from_fn(band.n(), idx.len(), |r, c| vecs[(r, idx[c])]);
    (v, m)
}

fn left_mass_matrix(v: &CMat, left_rows: usize) -> CMat {
    let top = v.rows(0, left_rows);
    top.adjoint() * top
}

/// Group eigenpairs into levels: eigenvalues within `degeneracy` form one
/// cluster, which is then split by left/right localization.
fn build_levels(vals: &[f64], vecs: &CMat, left_rows: usize, degeneracy: f64) -> Vec<Level> {
    let mut levels = Vec::new();
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && vals[end] - vals[end - 1] < degeneracy {
            end += 1;
        }
        let block = vecs.columns(start, end - start).into_owned();
        let (masses, rot) = hermitian_eigen(&left_mass_matrix(&block, left_rows));
        let local = &block * rot;
        let energy = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        let mut s = 0;
        while s < masses.len() {
            let mut e = s + 1;
            while e < masses.len() && masses[e] - masses[e - 1] < 0.05 {
                e += 1;
            }
            let mass = masses[s..e].iter().sum::<f64>() / (e - s) as f64;
            levels.push(Level {
                energy,
                multiplicity: e - s,
                left_mass: mass.clamp(0.0, 1.0),
                vectors: Some(local.columns(s, e - s).into_owned()),
            });
            s = e;
        }
        start = end;
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.left_mass.total_cmp(&b.left_mass)));
    levels
}

/// Levels of the truncation at angle `theta` in `[mu - w, mu + w)`.
pub fn levels_at(family: &HoppingFamily, plan: &EdgeOperatorPlan, theta: f64, mu: f64, half_window: f64) -> Vec<Level> {
    let band = edge_band(family, cis(theta), plan);
    let scale = family.norm_bound().max(1.0);
    // Keep clear of the window edges, where bulk bands may touch.
    let w = half_window - 1e-6 * scale;
    let (vals, vecs) = window_eigenpairs(&band, mu - w, mu + w, scale);
    build_levels(&vals, &vecs, plan.left_rows(), 1e-9)
}

fn overlap(a: &Level, b: &Level) -> f64 {
    match (&a.vectors, &b.vectors) {
        (Some(x), Some(y)) => (x.adjoint() * y).norm_squared() / a.multiplicity.max(b.multiplicity) as f64,
        _ => 0.0,
    }
}

fn match_levels(prev: &[Level], next: &[Level], a: usize) -> Result<Vec<Option<usize>>> {
    let mut links = vec![None; prev.len()];
    let mut taken = vec![None::<usize>; next.len()];
    for (p, lp) in prev.iter().enumerate() {
        let mut best = (0.0, usize::MAX);
        let mut second = 0.0;
        for (q, lq) in next.iter().enumerate() {
            let o = overlap(lp, lq);
            if o > best.0 {
                second = best.0;
                best = (o, q);
            } else if o > second {
                second = o;
            }
        }
        if best.0 < 0.5 {
            continue;
        }
        if second > 0.95 * best.0 {
            return Err(Error::RefineGrid(format!("G_t: ambiguous branch match after t-point {a} (overlaps {:.3}, {second:.3})", best.0)));
        }
        let q = best.1;
        if let Some(other) = taken[q] {
            return Err(Error::RefineGrid(format!("G_t: levels {other} and {p} at t-point {a} both continue into level {q}")));
        }
        if next[q].multiplicity != lp.multiplicity {
            return Err(Error::RefineGrid(format!("G_t: multiplicity changes along a branch after t-point {a}")));
        }
        taken[q] = Some(p);
        links[p] = Some(q);
    }
    Ok(links)
}

/// Split a degenerate level into pieces along the neighbouring levels it
/// continues into, when those pieces are mutually orthogonal. Two unrelated
/// states that happen to be degenerate exactly at a grid point (a crossing
/// fixed by a symmetry) become separate levels again.
fn split_along(level: &Level, neighbours: &[Level], left_rows: usize) -> Option<Vec<Level>> {
    let v = level.vectors.as_ref()?;
    let mut parts = Vec::new();
    let mut total = 0;
    for n in neighbours {
        let Some(u) = &n.vectors else { continue };
        let proj = v.adjoint() * u;
        if proj.norm_squared() < 0.5 * n.multiplicity as f64 {
            continue;
        }
        let w = math::orthonormalize(v * proj);
        total += n.multiplicity;
        parts.push(w);
    }
    if parts.len() < 2 || total != level.multiplicity {
        return None;
    }
    for i in 0..parts.len() {
        for j in 0..i {
            if (parts[i].adjoint() * &parts[j]).norm() > 0.1 {
                return None;
            }
        }
    }
    let mut out: Vec<Level> = parts
        .into_iter()
        .map(|w| {
            let m = w.ncols();
            let left = w.rows(0, left_rows).norm_squared() / m as f64;
            Level { energy: level.energy, multiplicity: m, left_mass: left.clamp(0.0, 1.0), vectors: Some(w) }
        })
        .collect();
    out.sort_by(|a, b| a.left_mass.total_cmp(&b.left_mass));
    Some(out)
}

fn resolve_degeneracies(levels: &mut [Vec<Level>], left_rows: usize) {
    let g = levels.len();
    for a in 0..g {
        if levels[a].iter().all(|l| l.multiplicity == 1) {
            continue;
        }
        let mut row = Vec::with_capacity(levels[a].len());
        for l in &levels[a] {
            let split = if l.multiplicity > 1 {
                split_along(l, &levels[(a + 1) % g], left_rows).or_else(|| split_along(l, &levels[(a + g - 1) % g], left_rows))
            } else {
                None
            };
            match split {
                Some(parts) => row.extend(parts),
                None => row.push(l.clone()),
            }
        }
        levels[a] = row;
    }
}

fn label_branches(levels: &[Vec<Level>], links: &[Vec<Option<usize>>]) -> Vec<Vec<usize>> {
    let g = levels.len();
    let offsets: Vec<usize> = levels
        .iter()
        .scan(0, |acc, l| {
            let o = *acc;
            *acc += l.len();
            Some(o)
        })
        .collect();
    let total: usize = levels.iter().map(|l| l.len()).sum();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for a in 0..g {
        for (p, l) in links[a].iter().enumerate() {
            if let Some(q) = l {
                let x = find(&mut parent, offsets[a] + p);
                let y = find(&mut parent, offsets[(a + 1) % g] + q);
                if x != y {
                    parent[x.max(y)] = x.min(y);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; total];
    let mut next = 0;
    let mut out = Vec::with_capacity(g);
    for a in 0..g {
        let mut row = Vec::with_capacity(levels[a].len());
        for p in 0..levels[a].len() {
            let root = find(&mut parent, offsets[a] + p);
            if label[root] == usize::MAX {
                label[root] = next;
                next += 1;
            }
            row.push(label[root]);
        }
        out.push(row);
    }
    out
}

/// Levels in `[mu - w, mu + w)` at `G_t` angles, matched by eigenvector overlap.
pub fn edge_sweep(family: &HoppingFamily, mu: f64, half_window: f64, plan: &EdgeOperatorPlan, t_points: usize) -> Result<EdgeSweep> {
    if t_points < 8 {
        return Err(Error::Config(format!("G_t = {t_points} is below 8")));
    }
    if !(half_window > 0.0) {
        return Err(Error::Gap(format!("empty edge window around mu = {mu}")));
    }
    let mut levels = par::map_indexed(t_points, |a| levels_at(family, plan, angle(a, t_points), mu, half_window));
    resolve_degeneracies(&mut levels, plan.left_rows());
    let mut links = Vec::with_capacity(t_points);
    for a in 0..t_points {
        links.push(match_levels(&levels[a], &levels[(a + 1) % t_points], a)?);
    }
    let branches = label_branches(&levels, &links);
    Ok(EdgeSweep { mu, half_window, levels, links, branches })
}

/// A crossing of `mu` located to high accuracy.
#[derive(Debug, Clone)]
pub struct RefinedCrossing {
    /// Angle `t*` of the crossing.
    pub theta: f64,
    /// Level energy at `t*`, equal to `mu` up to the `t` resolution.
    pub energy: f64,
    pub level: Level,
    /// All window levels at `t*`.
    pub levels: Vec<Level>,
}

/// Bisect for the angle at which the level `p` at step `a` of `sweep`
/// crosses `mu`, following it by eigenvector overlap.
pub fn refine_crossing(family: &HoppingFamily, plan: &EdgeOperatorPlan, sweep: &EdgeSweep, a: usize, p: usize) -> Result<RefinedCrossing> {
    let g = sweep.t_points();
    let h = 2.0 * core::f64::consts::PI / g as f64;
    let mut lo = sweep.t_angle(a);
    let mut hi = lo + h;
    let start = sweep.levels[a][p].clone();
    let below_at_lo = start.energy < sweep.mu;
    let mut reference = start;
    let follow = |theta: f64, reference: &Level| -> Result<(Level, Vec<Level>)> {
        let levels = levels_at(family, plan, theta, sweep.mu, sweep.half_window);
        let best = levels
            .iter()
            .map(|l| overlap(reference, l))
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .filter(|x| x.1 > 0.5)
            .ok_or_else(|| Error::RefineGrid(format!("G_t: lost the crossing branch near t = {theta:.6}")))?;
        Ok((levels[best.0].clone(), levels))
    };
    let mut found = follow(lo, &reference)?;
    for _ in 0..60 {
        if hi - lo < 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (lvl, levels) = follow(mid, &reference)?;
        if (lvl.energy < sweep.mu) == below_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        reference = lvl.clone();
        found = (lvl, levels);
    }
    let theta = 0.5 * (lo + hi);
    let (level, levels) = follow(theta, &reference).unwrap_or(found);
    Ok(RefinedCrossing { theta, energy: level.energy, level, levels })
}
