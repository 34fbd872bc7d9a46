//! Gap certification, the contour around the filled bands, Riesz and Fermi
//! projections, numerical kernels and projector fields.

use crate::grid::{unit, TorusGrid};
use crate::math::{self, cabs, hermitian_eigen, hermitian_eigenvalues};
use crate::model::BlochSymbol;
use crate::tolerances::Tolerances;
use crate::{par, CMat, Error, Result, C64};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Result of checking that `mu` lies in a gap of the symbol over the whole torus.
#[derive(Debug, Clone, PartialEq)]
pub struct GapCertificate {
    pub mu: f64,
    pub grid: TorusGrid,
    /// Smallest distance from `mu` to a grid eigenvalue.
    pub delta_grid: f64,
    pub lipschitz_eta: f64,
    pub lipschitz_t: f64,
    /// `lipschitz_eta * h_eta / 2 + lipschitz_t * h_t / 2`.
    pub margin: f64,
    pub certified: bool,
    /// Grid point attaining `delta_grid`.
    pub worst: (usize, usize),
    /// Number of bands below `mu` (meaningful when certified).
    pub bands_below: usize,
    pub e_min_grid: f64,
    pub e_max_grid: f64,
    /// Sorted eigenvalues at each grid point, row-major.
    pub eigenvalues: Vec<Vec<f64>>,
}

impl GapCertificate {
    /// Certified distance from `mu` to the spectrum anywhere on the torus.
    pub fn half_gap(&self) -> f64 {
        self.delta_grid - self.margin
    }

    /// Certified gap width `g`; the spectrum avoids `[mu - g/2, mu + g/2]`.
    pub fn gap(&self) -> f64 {
        2.0 * self.half_gap()
    }

    /// Certified lower bound of the whole spectrum.
    pub fn spectrum_min(&self) -> f64 {
        self.e_min_grid - self.margin
    }

    /// Certified upper bound of the whole spectrum.
    pub fn spectrum_max(&self) -> f64 {
        self.e_max_grid + self.margin
    }
}

/// Eigenvalue sweep over `grid` with an exact Lipschitz margin between points.
pub fn gap_certificate(symbol: &BlochSymbol, mu: f64, grid: TorusGrid) -> Result<GapCertificate> {
    if grid.g1 < 8 || grid.g2 < 8 {
        return Err(Error::Config(format!("certificate grid {}x{} is below 8x8", grid.g1, grid.g2)));
    }
    let fam = symbol.family();
    let eigenvalues = par::map_indexed(grid.len(), |k| {
        let (i, j) = grid.coords(k);
        hermitian_eigenvalues(&symbol.at_grid(grid, i, j))
    });
    let lipschitz_eta = fam.lipschitz_eta();
    let lipschitz_t = fam.lipschitz_t();
    let (h1, h2) = grid.steps();
    let margin = lipschitz_eta * h1 / 2.0 + lipschitz_t * h2 / 2.0;
    let mut delta_grid = f64::INFINITY;
    let mut worst = (0, 0);
    let mut e_min_grid = f64::INFINITY;
    let mut e_max_grid = f64::NEG_INFINITY;
    for (k, ev) in eigenvalues.iter().enumerate() {
        for &e in ev {
            let d = (e - mu).abs();
            if d < delta_grid {
                delta_grid = d;
                worst = grid.coords(k);
            }
        }
        e_min_grid = e_min_grid.min(ev[0]);
        e_max_grid = e_max_grid.max(ev[ev.len() - 1]);
    }
    let bands_below = eigenvalues[0].iter().filter(|&&e| e < mu).count();
    Ok(GapCertificate {
        mu,
        grid,
        delta_grid,
        lipschitz_eta,
        lipschitz_t,
        margin,
        certified: delta_grid - margin > 0.0,
        worst,
        bands_below,
        e_min_grid,
        e_max_grid,
        eigenvalues,
    })
}

/// Double the certificate grid until the Lipschitz margin is at most half of
/// the observed gap, or `max_side` is reached. Returns the last certificate.
pub fn refine_certificate(symbol: &BlochSymbol, mu: f64, start: TorusGrid, max_side: usize) -> Result<GapCertificate> {
    let mut grid = start;
    loop {
        let cert = gap_certificate(symbol, mu, grid)?;
        let good = cert.certified && cert.margin <= 0.5 * cert.delta_grid;
        if good || grid.g1.max(grid.g2) * 2 > max_side {
            return Ok(cert);
        }
        if cert.delta_grid < 1e-10 {
            return Ok(cert);
        }
        grid = grid.doubled();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourKind {
    Circle { center: C64, radius: f64 },
    Polyline,
}

/// Closed, positively oriented contour sampled at `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub nodes: Vec<C64>,
    pub kind: ContourKind,
}

impl Contour {
    /// Circle sampled at `n` half-offset angles `2 pi (s + 1/2) / n`, so that no
    /// node lies on the real axis.
    pub fn circle(center: C64, radius: f64, n: usize) -> Self {
        let nodes = (0..n).map(|s| center + math::cis(2.0 * PI * (s as f64 + 0.5) / n as f64) * radius).collect();
        Contour { nodes, kind: ContourKind::Circle { center, radius } }
    }

    /// Closed polygon through `nodes`; must be counter-clockwise.
    pub fn polyline(nodes: Vec<C64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::Config("a polyline contour needs at least 3 nodes".into()));
        }
        let area: f64 = (0..nodes.len())
            .map(|s| {
                let (a, b) = (nodes[s], nodes[(s + 1) % nodes.len()]);
                a.re * b.im - b.re * a.im
            })
            .sum();
        if area <= 0.0 {
            return Err(Error::Config("polyline contour is not counter-clockwise".into()));
        }
        Ok(Contour { nodes, kind: ContourKind::Polyline })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The same contour with `n` nodes (circles only).
    pub fn resampled(&self, n: usize) -> Option<Self> {
        match self.kind {
            ContourKind::Circle { center, radius } => Some(Contour::circle(center, radius, n)),
            ContourKind::Polyline => None,
        }
    }

    /// Trapezoid weights `dz_s`, so that `integral f dz ~ sum w_s f(z_s)`.
    pub fn weights(&self) -> Vec<C64> {
        let n = self.nodes.len();
        match self.kind {
            ContourKind::Circle { center, .. } => {
                let h = C64::new(0.0, 2.0 * PI / n as f64);
                self.nodes.iter().map(|z| (z - center) * h).collect()
            }
            ContourKind::Polyline => (0..n)
                .map(|s| (self.nodes[(s + 1) % n] - self.nodes[(s + n - 1) % n]) * 0.5)
                .collect(),
        }
    }

    /// Exact distance from a real point to the curve, and the nearest curve point.
    pub fn distance_to_real(&self, x: f64) -> (f64, C64) {
        match self.kind {
            ContourKind::Circle { center, radius } => {
                let d = C64::new(x, 0.0) - center;
                let r = cabs(d);
                let dir = if r > 0.0 { d / r } else { C64::new(1.0, 0.0) };
                ((r - radius).abs(), center + dir * radius)
            }
            ContourKind::Polyline => {
                let n = self.nodes.len();
                let p = C64::new(x, 0.0);
                let mut best = (f64::INFINITY, self.nodes[0]);
                for s in 0..n {
                    let (a, b) = (self.nodes[s], self.nodes[(s + 1) % n]);
                    let ab = b - a;
                    let len2 = ab.norm_sqr();
                    let u = if len2 > 0.0 { ((p - a) * ab.conj()).re / len2 } else { 0.0 };
                    let q = a + ab * u.clamp(0.0, 1.0);
                    let d = cabs(p - q);
                    if d < best.0 {
                        best = (d, q);
                    }
                }
                best
            }
        }
    }

    /// Whether a real point lies inside the curve.
    pub fn encloses_real(&self, x: f64) -> bool {
        match self.kind {
            ContourKind::Circle { center, radius } => cabs(C64::new(x, 0.0) - center) < radius,
            ContourKind::Polyline => {
                let n = self.nodes.len();
                let mut inside = false;
                for s in 0..n {
                    let (a, b) = (self.nodes[s], self.nodes[(s + 1) % n]);
                    if (a.im > 0.0) != (b.im > 0.0) {
                        let cross = a.re + (b.re - a.re) * (0.0 - a.im) / (b.im - a.im);
                        if x < cross {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }
}

/// Outcome of contour validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourCheck {
    /// Smallest exact distance from a grid eigenvalue to the curve.
    pub min_distance: f64,
    /// Smallest distance from a grid eigenvalue to a node.
    pub min_node_distance: f64,
    /// `min_distance` minus the Lipschitz margin of the grid.
    pub certified_distance: f64,
}

/// Check that the curve stays away from the spectrum over the whole torus and
/// that it encloses exactly the grid eigenvalues below `mu`.
pub fn validate_contour(contour: &Contour, cert: &GapCertificate) -> Result<ContourCheck> {
    let mut min_distance = f64::INFINITY;
    let mut min_node_distance = f64::INFINITY;
    let mut where_ = (0usize, 0.0f64, C64::new(0.0, 0.0));
    for (k, ev) in cert.eigenvalues.iter().enumerate() {
        for &e in ev {
            let (d, z) = contour.distance_to_real(e);
            if d < min_distance {
                min_distance = d;
                where_ = (k, e, z);
            }
            for z in &contour.nodes {
                min_node_distance = min_node_distance.min(cabs(z - e));
            }
            if contour.encloses_real(e) != (e < cert.mu) {
                let (i, j) = cert.grid.coords(k);
                return Err(Error::Contour(format!(
                    "eigenvalue {e:.6} at grid point ({i}, {j}) is on the wrong side of the contour"
                )));
            }
        }
    }
    let certified_distance = min_distance - cert.margin;
    if certified_distance <= 1e-10 {
        let (i, j) = cert.grid.coords(where_.0);
        return Err(Error::Contour(format!(
            "z = {:.6}{:+.6}i comes within {:.3e} of eigenvalue {:.6} at eta-angle {:.6}, t-angle {:.6} (margin {:.3e})",
            where_.2.re,
            where_.2.im,
            min_distance,
            where_.1,
            crate::grid::angle(i, cert.grid.g1),
            crate::grid::angle(j, cert.grid.g2),
            cert.margin
        )));
    }
    Ok(ContourCheck { min_distance, min_node_distance, certified_distance })
}

/// Circle through `mu` and `E_min - g`, with `g` the certified gap.
pub fn default_gamma(cert: &GapCertificate, nodes: usize) -> Result<(Contour, ContourCheck)> {
    if !cert.certified {
        return Err(Error::Gap(format!("mu = {} is not certified in a gap", cert.mu)));
    }
    let left = cert.spectrum_min() - cert.gap();
    let center = C64::new(0.5 * (cert.mu + left), 0.0);
    let radius = 0.5 * (cert.mu - left);
    let contour = Contour::circle(center, radius, nodes);
    let check = validate_contour(&contour, cert)?;
    Ok((contour, check))
}

/// Largest grid side used when refining a gap certificate.
pub const MAX_CERT_SIDE: usize = 1024;

/// Certify `mu` (refining the grid as needed) and build the default contour.
pub fn prepare(symbol: &BlochSymbol, mu: f64, grid: TorusGrid, nodes: usize) -> Result<(GapCertificate, Contour)> {
    let cert = refine_certificate(symbol, mu, grid, MAX_CERT_SIDE)?;
    if !cert.certified {
        let (i, j) = cert.worst;
        return Err(Error::Gap(format!(
            "mu = {mu} is not certified: grid distance {:.3e} at ({i}, {j}) vs Lipschitz margin {:.3e} on {}x{}",
            cert.delta_grid, cert.margin, cert.grid.g1, cert.grid.g2
        )));
    }
    let (gamma, _) = default_gamma(&cert, nodes)?;
    Ok((cert, gamma))
}

fn resolvent_sum(h: &CMat, nodes: &[C64], weights: &[C64]) -> Result<CMat> {
    let n = h.nrows();
    let mut p = CMat::zeros(n, n);
    for (z, w) in nodes.iter().zip(weights) {
        let mut a = -h.clone();
        for i in 0..n {
            a[(i, i)] += z;
        }
        let inv = a.lu().try_inverse().ok_or_else(|| Error::Contour(format!("resolvent singular at z = {z}")))?;
        p += inv * *w;
    }
    Ok(p * C64::new(0.0, -0.5 / PI))
}

/// Trapezoid rule for the Riesz projection on exactly the nodes of `contour`.
pub fn riesz_quadrature(h: &CMat, contour: &Contour) -> Result<CMat> {
    resolvent_sum(h, &contour.nodes, &contour.weights())
}

/// Riesz projection of a Hermitian matrix onto the eigenvalues inside `contour`.
///
/// Circles are refined by doubling the node count until successive results
/// differ by less than `tol.quadrature`. Returns the projector and the final
/// node count.
pub fn riesz_from_matrix(h: &CMat, contour: &Contour, tol: &Tolerances) -> Result<(CMat, usize)> {
    let ev = hermitian_eigenvalues(h);
    let scale = ev.iter().fold(1.0f64, |a, e| a.max(e.abs()));
    let check = |c: &Contour| -> Result<()> {
        for z in &c.nodes {
            let d = ev.iter().fold(f64::INFINITY, |a, e| a.min(cabs(z - e)));
            if d < 1e-8 * scale {
                return Err(Error::Contour(format!("node z = {z} within {d:.3e} of the spectrum")));
            }
        }
        Ok(())
    };
    check(contour)?;
    let mut current = contour.clone();
    let mut p = resolvent_sum(h, &current.nodes, &current.weights())?;
    let Some(_) = contour.resampled(1) else {
        return Ok((p, contour.len()));
    };
    let mut n = contour.len();
    while n < (1 << 16) {
        n *= 2;
        current = contour.resampled(n).unwrap();
        check(&current)?;
        let next = resolvent_sum(h, &current.nodes, &current.weights())?;
        let diff = math::max_abs_diff(&next, &p);
        p = next;
        if diff < tol.quadrature {
            return Ok((p, n));
        }
    }
    Err(Error::NotConverged(format!("Riesz quadrature did not settle below {:.1e}", tol.quadrature)))
}

/// `(1 / 2 pi i) int_gamma (lambda - H(eta, t))^{-1} d lambda`.
pub fn riesz_projection(symbol: &BlochSymbol, eta: C64, t: C64, gamma: &Contour) -> Result<CMat> {
    let h = symbol.evaluate(eta, t)?;
    Ok(riesz_from_matrix(&h, gamma, &Tolerances::default())?.0)
}

/// Spectral projection of a Hermitian matrix onto eigenvalues below `mu`.
pub fn fermi_from_matrix(h: &CMat, mu: f64) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(h);
    if let Some(e) = vals.iter().find(|e| (*e - mu).abs() < 1e-10) {
        return Err(Error::Gap(format!("eigenvalue {e} within 1e-10 of mu = {mu}")));
    }
    let r = vals.iter().filter(|&&e| e < mu).count();
    let f = vecs.columns(0, r);
    Ok(f * f.adjoint())
}

/// Sum of eigenprojectors of `H(eta, t)` with eigenvalue below `mu`.
pub fn fermi_projection(symbol: &BlochSymbol, eta: C64, t: C64, mu: f64) -> Result<CMat> {
    fermi_from_matrix(&symbol.evaluate(eta, t)?, mu)
}

/// Orthonormal kernel basis with its singular-value evidence.
#[derive(Debug, Clone)]
pub struct KernelFrame {
    /// `q x r`, orthonormal columns.
    pub frame: CMat,
    /// All `q` singular values (zeros for a short matrix), descending.
    pub singular_values: Vec<f64>,
    /// Smallest non-kernel singular value over largest kernel singular value.
    pub gap_ratio: f64,
}

/// [`kernel_frame_with`] at the default gap ratio `1e4`.
pub fn kernel_frame(a: &CMat, dim_hint: Option<usize>, sigma_tol: f64) -> Result<KernelFrame> {
    kernel_frame_with(a, dim_hint, sigma_tol, Tolerances::default().kernel_gap_ratio)
}

/// Right singular vectors of `a` for singular values below `sigma_tol * sigma_max`.
///
/// With a `dim_hint` the count must match and the singular-value gap at the
/// hinted position must exceed `min_ratio`.
pub fn kernel_frame_with(a: &CMat, dim_hint: Option<usize>, sigma_tol: f64, min_ratio: f64) -> Result<KernelFrame> {
    let (p, q) = a.shape();
    if p == 0 || q == 0 {
        return Err(Error::Config("kernel of an empty matrix".into()));
    }
    let padded;
    let m = if p < q {
        let mut z = CMat::zeros(q, q);
        z.view_mut((0, 0), (p, q)).copy_from(a);
        padded = z;
        &padded
    } else {
        a
    };
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smax = sv[0];
    let counted = if smax == 0.0 { q } else { sv.iter().filter(|&&s| s < sigma_tol * smax).count() };
    let ratio_at = |r: usize| -> f64 {
        if r == 0 || r == q {
            return f64::INFINITY;
        }
        let (outside, inside) = (sv[q - r - 1], sv[q - r]);
        if inside == 0.0 {
            if outside > 0.0 {
                f64::INFINITY
            } else {
                1.0
            }
        } else {
            outside / inside
        }
    };
    let r = match dim_hint {
        None => counted,
        Some(h) => {
            if h > q {
                return Err(Error::Config(format!("kernel dimension hint {h} exceeds {q} columns")));
            }
            if counted != h || ratio_at(h) < min_ratio {
                return Err(Error::conditioning(
                    format!("expected a {h}-dimensional kernel, found {counted} (gap ratio {:.3e})", ratio_at(h)),
                    sv,
                ));
            }
            h
        }
    };
    let frame = CMat::from_fn(q, r, |i, c| v_t[(order[q - r + c], i)].conj());
    let residual = (a * &frame).norm();
    if r > 0 && residual > 2.0 * sigma_tol * smax * math::sqrt(r as f64) {
        return Err(Error::conditioning(format!("kernel frame residual {residual:.3e} exceeds its singular-value bound"), sv));
    }
    Ok(KernelFrame { frame, gap_ratio: ratio_at(r), singular_values: sv })
}

/// Largest principal angle between the column spans of two orthonormal frames.
pub fn subspace_angle(f1: &CMat, f2: &CMat) -> f64 {
    if f1.ncols() != f2.ncols() || f1.nrows() != f2.nrows() {
        return PI / 2.0;
    }
    if f1.ncols() == 0 {
        return 0.0;
    }
    let m = f1.adjoint() * f2;
    let resid = f2 - f1 * m;
    let gram = resid.adjoint() * &resid;
    let top = hermitian_eigenvalues(&gram).last().cloned().unwrap_or(0.0).max(0.0);
    math::asin(math::sqrt(top).min(1.0))
}

/// Doubly periodic field of rank-`r` projectors in `C^d`, stored as
/// orthonormal frames (`P = F F^dagger` is formed only on request).
#[derive(Debug, Clone)]
pub struct ProjectorField {
    grid: TorusGrid,
    ambient: usize,
    rank: usize,
    frames: Vec<CMat>,
}

impl ProjectorField {
    /// Field from explicit projectors; checks the projector laws and extracts
    /// the top-`r` eigenvectors at every point.
    pub fn from_projectors(grid: TorusGrid, projectors: &[CMat], tol: &Tolerances) -> Result<Self> {
        if projectors.len() != grid.len() || projectors.is_empty() {
            return Err(Error::Config("projector count does not match the grid".into()));
        }
        let d = projectors[0].nrows();
        let rank_of = |p: &CMat| math::round(p.trace().re) as usize;
        let rank = rank_of(&projectors[0]);
        let frames = par::try_map_indexed(projectors.len(), |k| {
            let p = &projectors[k];
            let (i, j) = grid.coords(k);
            let herm = math::max_abs_diff(p, &p.adjoint());
            let idem = math::max_abs_diff(&(p * p), p);
            let tr = p.trace();
            if herm > tol.hermiticity || idem > tol.idempotency || (tr.re - rank as f64).abs() > 1e-6 || tr.im.abs() > 1e-6 {
                return Err(Error::Contour(format!(
                    "projector law violated at ({i}, {j}): |P-P^+| = {herm:.2e}, |P^2-P| = {idem:.2e}, tr P = {:.8}, expected rank {rank}",
                    tr.re
                )));
            }
            let (_, vecs) = hermitian_eigen(p);
            Ok(vecs.columns(d - rank, rank).into_owned())
        })?;
        Ok(ProjectorField { grid, ambient: d, rank, frames })
    }

    /// Field from orthonormal frames of equal shape.
    pub fn from_frames(grid: TorusGrid, frames: Vec<CMat>) -> Result<Self> {
        if frames.len() != grid.len() || frames.is_empty() {
            return Err(Error::Config("frame count does not match the grid".into()));
        }
        let (d, r) = frames[0].shape();
        for (k, f) in frames.iter().enumerate() {
            if f.shape() != (d, r) {
                return Err(Error::Config(format!("frame {k} has shape {:?}, expected ({d}, {r})", f.shape())));
            }
            let defect = math::max_abs_diff(&(f.adjoint() * f), &CMat::identity(r, r));
            if defect > 1e-9 {
                return Err(Error::Config(format!("frame {k} is not orthonormal (defect {defect:.2e})")));
            }
        }
        Ok(ProjectorField { grid, ambient: d, rank: r, frames })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }
    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn frame(&self, i: usize, j: usize) -> &CMat {
        &self.frames[self.grid.index(i, j)]
    }

    pub fn frames(&self) -> &[CMat] {
        &self.frames
    }

    pub fn projector(&self, i: usize, j: usize) -> CMat {
        let f = self.frame(i, j);
        f * f.adjoint()
    }

    /// Apply `f` to every frame, e.g. to change gauge.
    pub fn map_frames(&self, mut f: impl FnMut(usize, &CMat) -> CMat) -> Result<Self> {
        let frames = self.frames.iter().enumerate().map(|(k, x)| f(k, x)).collect();
        ProjectorField::from_frames(self.grid, frames)
    }
}

/// Projector field of Riesz projections of `symbol` over `grid`.
pub fn riesz_field(symbol: &BlochSymbol, gamma: &Contour, grid: TorusGrid, tol: &Tolerances) -> Result<Vec<CMat>> {
    par::try_map_indexed(grid.len(), |k| {
        let (i, j) = grid.coords(k);
        Ok(riesz_from_matrix(&symbol.at_grid(grid, i, j), gamma, tol)?.0)
    })
}

/// Grid point of `g` at which to evaluate the symbol, as unit complex numbers.
pub fn grid_point(grid: TorusGrid, i: usize, j: usize) -> (C64, C64) {
    (unit(i, grid.g1), unit(j, grid.g2))
}


/// Per-band `[min, max]` over the eta grid at each t of a torus grid, indexed
/// `[t][band]`.
pub fn band_envelope_by_t(symbol: &BlochSymbol, grid: TorusGrid) -> Vec<Vec<(f64, f64)>> {
    let n = symbol.dim();
    let evs = par::map_indexed(grid.len(), |k| {
        let (i, j) = grid.coords(k);
        math::hermitian_eigenvalues(&symbol.at_grid(grid, i, j))
    });
    (0..grid.g2)
        .map(|j| {
            (0..n)
                .map(|b| {
                    (0..grid.g1).map(|i| evs[grid.index(i, j)][b]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)))
                })
                .collect()
        })
        .collect()
}

/// Per-band `[min, max]` over the whole grid.
pub fn band_envelope(symbol: &BlochSymbol, grid: TorusGrid) -> Vec<(f64, f64)> {
    let by_t = band_envelope_by_t(symbol, grid);
    (0..symbol.dim())
        .map(|b| by_t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), row| (lo.min(row[b].0), hi.max(row[b].1))))
        .collect()
}

/// Midpoint of gap `r` (between bands `r` and `r + 1`, counted from 1) of an
/// envelope, or a gap error if the bands overlap.
pub fn gap_midpoint(envelope: &[(f64, f64)], r: usize) -> Result<f64> {
    if r == 0 || r >= envelope.len() {
        return Err(Error::Config(format!("gap index {r} outside 1..{}", envelope.len().saturating_sub(1))));
    }
    let below = envelope[..r].iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let above = envelope[r..].iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    if below >= above {
        return Err(Error::Gap(format!("gap {r} is closed (bands meet at {below:.6} / {above:.6})")));
    }
    Ok(0.5 * (below + above))
}
