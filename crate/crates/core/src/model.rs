//! Finite-range Laurent symbols `H(eta, t) = sum_{j,m} B[j,m] eta^j t^m` and the
//! model zoo.

use crate::grid::{unit, TorusGrid};
use crate::math::{cabs, cis, cpowi, spectral_norm};
use crate::{CMat, Error, Result, C64};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

const UNIT_TOL: f64 = 1e-12;

/// Hopping matrices `B[j,m]`, `|j| <= R`, `|m| <= M`, each `N x N`.
///
/// `A_j(t) = sum_m B[j,m] t^m` is the hop by `j` cells; the bulk operator acts
/// as `(H phi)_n = sum_j A_j(t) phi_{n-j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingFamily {
    dim: usize,
    range: usize,
    t_range: usize,
    coeffs: Vec<CMat>,
}

impl HoppingFamily {
    pub fn zeros(dim: usize, range: usize, t_range: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Model("fiber dimension N must be positive".into()));
        }
        let count = (2 * range + 1) * (2 * t_range + 1);
        Ok(HoppingFamily { dim, range, t_range, coeffs: (0..count).map(|_| CMat::zeros(dim, dim)).collect() })
    }

    /// `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// `R`.
    pub fn range(&self) -> usize {
        self.range
    }
    /// `M`.
    pub fn t_range(&self) -> usize {
        self.t_range
    }

    fn slot(&self, j: i64, m: i64) -> Option<usize> {
        let (r, mm) = (self.range as i64, self.t_range as i64);
        if j.abs() > r || m.abs() > mm {
            return None;
        }
        Some(((j + r) * (2 * mm + 1) + (m + mm)) as usize)
    }

    /// `B[j,m]`, or `None` outside the stored range (where it is zero).
    pub fn coeff(&self, j: i64, m: i64) -> Option<&CMat> {
        self.slot(j, m).map(|s| &self.coeffs[s])
    }

    pub fn coeff_mut(&mut self, j: i64, m: i64) -> Result<&mut CMat> {
        match self.slot(j, m) {
            Some(s) => Ok(&mut self.coeffs[s]),
            None => Err(Error::Model(format!("coefficient ({j}, {m}) outside range R={}, M={}", self.range, self.t_range))),
        }
    }

    pub fn set_coeff(&mut self, j: i64, m: i64, b: CMat) -> Result<()> {
        if b.shape() != (self.dim, self.dim) {
            return Err(Error::Model(format!("coefficient ({j}, {m}) has shape {:?}, expected {}x{}", b.shape(), self.dim, self.dim)));
        }
        *self.coeff_mut(j, m)? = b;
        Ok(())
    }

    /// Iterate over `(j, m, B[j,m])`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, &CMat)> + '_ {
        let (r, mm) = (self.range as i64, self.t_range as i64);
        (-r..=r).flat_map(move |j| (-mm..=mm).map(move |m| (j, m, self.coeff(j, m).unwrap())))
    }

    /// Largest `|B[-j,-m] - B[j,m]^dagger|` entry.
    pub fn adjoint_defect(&self) -> f64 {
        self.iter()
            .map(|(j, m, b)| {
                let partner = self.coeff(-j, -m).unwrap();
                crate::math::max_abs_diff(partner, &b.adjoint())
            })
            .fold(0.0, f64::max)
    }

    /// Check the self-adjointness invariant.
    pub fn validate(&self) -> Result<()> {
        let scale = self.norm_bound().max(1.0);
        for (j, m, b) in self.iter() {
            let partner = self.coeff(-j, -m).unwrap();
            let d = crate::math::max_abs_diff(partner, &b.adjoint());
            if d > UNIT_TOL * scale {
                return Err(Error::Model(format!(
                    "B[{},{}] is not the adjoint of B[{j},{m}] (defect {d:.3e})",
                    -j, -m
                )));
            }
        }
        Ok(())
    }

    /// Replace each `B[j,m]` by `(B[j,m] + B[-j,-m]^dagger) / 2`.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for (j, m, b) in self.iter() {
            let partner = self.coeff(-j, -m).unwrap();
            *out.coeff_mut(j, m).unwrap() = (b + partner.adjoint()) * C64::new(0.5, 0.0);
        }
        out
    }

    /// `A_j(t)`; zero for `|j| > R`.
    pub fn hopping(&self, j: i64, t: C64) -> CMat {
        let mut a = CMat::zeros(self.dim, self.dim);
        if j.unsigned_abs() as usize > self.range {
            return a;
        }
        let mm = self.t_range as i64;
        for m in -mm..=mm {
            let b = self.coeff(j, m).unwrap();
            if b.iter().any(|x| *x != C64::new(0.0, 0.0)) {
                a += b * cpowi(t, m);
            }
        }
        a
    }

    /// `H(eta, t)` without argument checks.
    pub fn symbol(&self, eta: C64, t: C64) -> CMat {
        let r = self.range as i64;
        let mut h = CMat::zeros(self.dim, self.dim);
        for j in -r..=r {
            h += self.hopping(j, t) * cpowi(eta, j);
        }
        h
    }

    /// `sum |B[j,m]|_2`, a bound on `|H(eta,t)|` and on the norm of every truncation.
    pub fn norm_bound(&self) -> f64 {
        self.iter().map(|(_, _, b)| spectral_norm(b)).sum()
    }

    /// Bound on `|dH / d theta_eta|`.
    pub fn lipschitz_eta(&self) -> f64 {
        self.iter().map(|(j, _, b)| j.unsigned_abs() as f64 * spectral_norm(b)).sum()
    }

    /// Bound on `|dH / d theta_t|`.
    pub fn lipschitz_t(&self) -> f64 {
        self.iter().map(|(_, m, b)| m.unsigned_abs() as f64 * spectral_norm(b)).sum()
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &HoppingFamily) -> Self {
        let dim = self.dim + other.dim;
        let range = self.range.max(other.range);
        let t_range = self.t_range.max(other.t_range);
        let mut out = HoppingFamily::zeros(dim, range, t_range).unwrap();
        for (j, m, b) in self.iter() {
            out.coeff_mut(j, m).unwrap().view_mut((0, 0), (self.dim, self.dim)).copy_from(b);
        }
        for (j, m, b) in other.iter() {
            out.coeff_mut(j, m).unwrap().view_mut((self.dim, self.dim), (other.dim, other.dim)).copy_from(b);
        }
        out
    }

    /// `n`-fold direct sum with itself.
    pub fn copies(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Model("copies must be at least 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.direct_sum(self);
        }
        Ok(out)
    }

    /// Entrywise complex conjugate of every coefficient. The symbol becomes
    /// `conj(H(1/eta, 1/t))`, so every Chern number changes sign.
    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = c.map(|x| x.conj());
        }
        out
    }
}

/// A hopping family with an optional memo of its values on one torus grid.
#[derive(Debug, Clone)]
pub struct BlochSymbol {
    family: HoppingFamily,
    cache: Option<(TorusGrid, Vec<CMat>)>,
}

impl BlochSymbol {
    pub fn new(family: HoppingFamily) -> Self {
        BlochSymbol { family, cache: None }
    }

    /// Precompute `H` on every point of `grid`.
    pub fn memoized(family: HoppingFamily, grid: TorusGrid) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.coords(k);
                family.symbol(unit(i, grid.g1), unit(j, grid.g2))
            })
            .collect();
        BlochSymbol { family, cache: Some((grid, values)) }
    }

    pub fn family(&self) -> &HoppingFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.family.dim
    }

    /// `H(eta, t)` for unit-modulus arguments.
    pub fn evaluate(&self, eta: C64, t: C64) -> Result<CMat> {
        for (name, z) in [("eta", eta), ("t", t)] {
            if (cabs(z) - 1.0).abs() > UNIT_TOL {
                return Err(Error::Domain(format!("{name} = {z} is not on the unit circle")));
            }
        }
        Ok(self.family.symbol(eta, t))
    }

    /// `H` at grid point `(i, j)`, from the memo when the grid matches.
    pub fn at_grid(&self, grid: TorusGrid, i: usize, j: usize) -> CMat {
        if let Some((g, values)) = &self.cache {
            if *g == grid {
                return values[grid.index(i, j)].clone();
            }
        }
        self.family.symbol(unit(i, grid.g1), unit(j, grid.g2))
    }
}

impl From<HoppingFamily> for BlochSymbol {
    fn from(f: HoppingFamily) -> Self {
        BlochSymbol::new(f)
    }
}

/// Free-function form of [`BlochSymbol::evaluate`].
pub fn evaluate_symbol(symbol: &BlochSymbol, eta: C64, t: C64) -> Result<CMat> {
    symbol.evaluate(eta, t)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Harper model at flux `p/q` in a `q`-site magnetic cell along the transverse direction.
pub fn hofstadter(p: i64, q: i64) -> Result<HoppingFamily> {
    if q < 1 {
        return Err(Error::Config(format!("hofstadter: q = {q} must be positive")));
    }
    if gcd(p.unsigned_abs(), q as u64) != 1 {
        return Err(Error::Config(format!("hofstadter: gcd({p}, {q}) != 1")));
    }
    let n = q as usize;
    let mut f = HoppingFamily::zeros(n, 1, 1)?;
    let phase = |r: usize| cis(2.0 * PI * (p * r as i64) as f64 / q as f64);
    let plus = CMat::from_fn(n, n, |a, b| if a == b { phase(a) } else { C64::new(0.0, 0.0) });
    f.set_coeff(-1, 0, plus.adjoint())?;
    f.set_coeff(1, 0, plus)?;
    let one = C64::new(1.0, 0.0);
    let b00 = f.coeff_mut(0, 0)?;
    for r in 0..n.saturating_sub(1) {
        b00[(r + 1, r)] += one;
        b00[(r, r + 1)] += one;
    }
    f.coeff_mut(0, 1)?[(0, n - 1)] += one;
    f.coeff_mut(0, -1)?[(n - 1, 0)] += one;
    Ok(f)
}

/// Two-band Chern insulator with mass `m`; topological for `0 < |m| < 2`.
pub fn qwz(m: f64) -> HoppingFamily {
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let sx = CMat::from_row_slice(2, 2, &[zero, one, one, zero]);
    let sy = CMat::from_row_slice(2, 2, &[zero, -i, i, zero]);
    let sz = CMat::from_row_slice(2, 2, &[one, zero, zero, -one]);
    let half = C64::new(0.5, 0.0);
    let mut f = HoppingFamily::zeros(2, 1, 1).unwrap();
    f.set_coeff(1, 0, (&sz - &sx * i) * half).unwrap();
    f.set_coeff(-1, 0, (&sz + &sx * i) * half).unwrap();
    f.set_coeff(0, 1, (&sz - &sy * i) * half).unwrap();
    f.set_coeff(0, -1, (&sz + &sy * i) * half).unwrap();
    f.set_coeff(0, 0, sz * C64::new(m, 0.0)).unwrap();
    f
}

/// Constant symbol `diag(lower, upper)`.
pub fn atomic(lower: f64, upper: f64) -> HoppingFamily {
    let mut f = HoppingFamily::zeros(2, 0, 0).unwrap();
    let b = f.coeff_mut(0, 0).unwrap();
    b[(0, 0)] = C64::new(lower, 0.0);
    b[(1, 1)] = C64::new(upper, 0.0);
    f
}

/// Scalar chain `hop (eta + 1/eta) + onsite`.
pub fn chain(hop: f64, onsite: f64) -> HoppingFamily {
    let mut f = HoppingFamily::zeros(1, 1, 0).unwrap();
    f.coeff_mut(1, 0).unwrap()[(0, 0)] = C64::new(hop, 0.0);
    f.coeff_mut(-1, 0).unwrap()[(0, 0)] = C64::new(hop, 0.0);
    f.coeff_mut(0, 0).unwrap()[(0, 0)] = C64::new(onsite, 0.0);
    f
}

/// One explicit coefficient `B[j,m][row, col] = re + i im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientEntry {
    pub j: i64,
    pub m: i64,
    pub row: usize,
    pub col: usize,
    pub re: f64,
    pub im: f64,
}

/// Explicitly listed symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomSymbol {
    pub dim: usize,
    pub range: usize,
    pub t_range: usize,
    pub entries: Vec<CoefficientEntry>,
}

/// A named model with parameters, resolvable to a [`HoppingFamily`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub custom: Option<CustomSymbol>,
    /// Number of direct-sum copies.
    pub copies: usize,
    /// Apply [`HoppingFamily::conjugate`].
    pub conjugate: bool,
    /// Reject non-self-adjoint custom coefficients instead of symmetrizing.
    pub strict: bool,
}

/// Names accepted by [`ModelSpec::resolve`].
pub const MODEL_NAMES: &[&str] = &["hofstadter", "qwz", "atomic", "chain", "free", "custom"];

impl ModelSpec {
    pub fn named(name: &str, params: &[(&str, f64)]) -> Self {
        ModelSpec {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            custom: None,
            copies: 1,
            conjugate: false,
            strict: true,
        }
    }

    fn param(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match (self.params.get(key), default) {
            (Some(v), _) => Ok(*v),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::Config(format!("model '{}' needs parameter '{key}'", self.name))),
        }
    }

    fn int_param(&self, key: &str) -> Result<i64> {
        let v = self.param(key, None)?;
        if v != libm::trunc(v) || v.abs() > 1e9 {
            return Err(Error::Config(format!("parameter '{key}' = {v} must be an integer")));
        }
        Ok(v as i64)
    }

    fn allow_params(&self, allowed: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!("model '{}' has no parameter '{k}'", self.name)));
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<HoppingFamily> {
        let base = match self.name.as_str() {
            "hofstadter" => {
                self.allow_params(&["p", "q"])?;
                hofstadter(self.int_param("p")?, self.int_param("q")?)?
            }
            "qwz" => {
                self.allow_params(&["m"])?;
                qwz(self.param("m", None)?)
            }
            "atomic" => {
                self.allow_params(&["lower", "upper"])?;
                atomic(self.param("lower", Some(-1.0))?, self.param("upper", Some(1.0))?)
            }
            "chain" => {
                self.allow_params(&["hop", "onsite"])?;
                chain(self.param("hop", Some(1.0))?, self.param("onsite", Some(0.0))?)
            }
            "free" => {
                self.allow_params(&[])?;
                hofstadter(0, 1)?
            }
            "custom" => {
                self.allow_params(&[])?;
                let c = self.custom.as_ref().ok_or_else(|| Error::Config("custom model without coefficients".into()))?;
                self.build_custom(c)?
            }
            other => return Err(Error::Config(format!("unknown model '{other}' (known: {})", MODEL_NAMES.join(", ")))),
        };
        base.validate()?;
        let mut f = base.copies(self.copies)?;
        if self.conjugate {
            f = f.conjugate();
        }
        Ok(f)
    }

    fn build_custom(&self, c: &CustomSymbol) -> Result<HoppingFamily> {
        let mut f = HoppingFamily::zeros(c.dim, c.range, c.t_range)?;
        let mut seen = BTreeMap::new();
        for (k, e) in c.entries.iter().enumerate() {
            if e.row >= c.dim || e.col >= c.dim {
                return Err(Error::Model(format!("entry {k}: index ({}, {}) outside N = {}", e.row, e.col, c.dim)));
            }
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::Model(format!("entry {k}: non-finite value")));
            }
            if let Some(prev) = seen.insert((e.j, e.m, e.row, e.col), k) {
                return Err(Error::Model(format!("entry {k} repeats entry {prev}")));
            }
            f.coeff_mut(e.j, e.m).map_err(|err| Error::Model(format!("entry {k}: {err}")))?[(e.row, e.col)] = C64::new(e.re, e.im);
        }
        if self.strict {
            f.validate()?;
            Ok(f)
        } else {
            Ok(f.symmetrized())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hofstadter_example_at_origin() {
        let f = hofstadter(1, 3).unwrap();
        let h = f.symbol(C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        for r in 0..3 {
            assert!((h[(r, r)].re - 2.0 * (2.0 * PI * r as f64 / 3.0).cos()).abs() < 1e-14);
            assert!(h[(r, r)].im.abs() < 1e-14);
            for s in 0..3 {
                if s != r {
                    assert!((h[(r, s)] - C64::new(1.0, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gcd_rejected() {
        assert!(matches!(hofstadter(2, 4), Err(Error::Config(_))));
        assert!(hofstadter(0, 1).is_ok());
    }

    #[test]
    fn qwz_extreme_hop_is_singular() {
        let f = qwz(1.0);
        let a = f.hopping(1, C64::new(1.0, 0.0));
        assert!(a.determinant().norm() < 1e-15);
    }

    #[test]
    fn lenient_symmetrizes() {
        let mut spec = ModelSpec::named("custom", &[]);
        spec.custom = Some(CustomSymbol {
            dim: 1,
            range: 1,
            t_range: 0,
            entries: alloc::vec![CoefficientEntry { j: 1, m: 0, row: 0, col: 0, re: 1.0, im: 0.0 }],
        });
        assert!(spec.resolve().is_err());
        spec.strict = false;
        let f = spec.resolve().unwrap();
        assert_eq!(f.coeff(-1, 0).unwrap()[(0, 0)], C64::new(0.5, 0.0));
    }
}
