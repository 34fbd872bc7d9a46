//! Banded matrices: Hermitian band storage with an inertia count, a general
//! band LU with partial pivoting, and a band Cholesky factorization.

use crate::math::cabs;
use crate::{CMat, C64};
use alloc::vec;
use alloc::vec::Vec;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Hermitian `n x n` matrix with half-bandwidth `w`, lower triangle stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBand {
    n: usize,
    w: usize,
    lower: Vec<C64>,
}

impl HermitianBand {
    pub fn zeros(n: usize, w: usize) -> Self {
        HermitianBand { n, w, lower: vec![ZERO; n * (w + 1)] }
    }

    /// Build from the lower-triangle entries `f(i, j)`, `0 <= i - j <= w`.
    pub fn from_lower_fn(n: usize, w: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut b = HermitianBand::zeros(n, w);
        for i in 0..n {
            for j in i.saturating_sub(w)..=i {
                b.lower[i * (w + 1) + (i - j)] = f(i, j);
            }
        }
        b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.w
    }

    /// Entry `(i, j)` with `i >= j`.
    #[inline]
    pub fn lower(&self, i: usize, j: usize) -> C64 {
        if i - j > self.w {
            ZERO
        } else {
            self.lower[i * (self.w + 1) + (i - j)]
        }
    }

    #[inline]
    pub fn lower_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        debug_assert!(i >= j && i - j <= self.w);
        &mut self.lower[i * (self.w + 1) + (i - j)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i >= j {
            self.lower(i, j)
        } else {
            self.lower(j, i).conj()
        }
    }

    pub fn to_dense(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| if i.abs_diff(j) <= self.w { self.get(i, j) } else { ZERO })
    }

    /// `self * x`.
    pub fn mul(&self, x: &CMat) -> CMat {
        let mut y = CMat::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            for i in 0..self.n {
                let lo = i.saturating_sub(self.w);
                let hi = (i + self.w).min(self.n - 1);
                let mut acc = ZERO;
                for j in lo..=hi {
                    acc += self.get(i, j) * x[(j, c)];
                }
                y[(i, c)] = acc;
            }
        }
        y
    }

    /// Number of eigenvalues strictly below `lambda`, from the signs of the
    /// pivots of an `L D L^dagger` factorization of `self - lambda`.
    ///
    /// No pivoting is done; a pivot smaller than `pivmin` in magnitude is
    /// replaced by `-pivmin`, which changes the count only for `lambda`
    /// within about `pivmin` of an eigenvalue of a leading submatrix.
    pub fn count_below(&self, lambda: f64, pivmin: f64) -> usize {
        let (n, w) = (self.n, self.w);
        let mut a = self.lower.clone();
        let stride = w + 1;
        for i in 0..n {
            a[i * stride].re -= lambda;
        }
        let mut col = vec![ZERO; w];
        let mut count = 0;
        for c in 0..n {
            let mut d = a[c * stride].re;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
            let hi = (c + w).min(n - 1);
            let len = hi - c;
            for (k, r) in (c + 1..=hi).enumerate() {
                col[k] = a[r * stride + (r - c)];
            }
            let inv = 1.0 / d;
            for k in 0..len {
                let r = c + 1 + k;
                let vr = col[k] * inv;
                if vr == ZERO {
                    continue;
                }
                for q in 0..=k {
                    let s = c + 1 + q;
                    a[r * stride + (r - s)] -= vr * col[q].conj();
                }
            }
        }
        count
    }

    /// General band copy of `self - shift`.
    pub fn shifted(&self, shift: C64) -> BandMatrix {
        let mut m = BandMatrix::zeros(self.n, self.w, self.w);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.w);
            let hi = (i + self.w).min(self.n - 1);
            for j in lo..=hi {
                let mut v = self.get(i, j);
                if i == j {
                    v -= shift;
                }
                m.set(i, j, v);
            }
        }
        m
    }

    /// Cholesky factor of `self - shift`, or `None` if it is not positive definite.
    pub fn cholesky(&self, shift: f64) -> Option<BandCholesky> {
        let (n, w) = (self.n, self.w);
        let stride = w + 1;
        let mut l = self.lower.clone();
        for c in 0..n {
            let mut d = l[c * stride].re - shift;
            for k in c.saturating_sub(w)..c {
                let v = l[c * stride + (c - k)];
                d -= v.norm_sqr();
            }
            if !(d > 0.0) {
                return None;
            }
            let d = crate::math::sqrt(d);
            l[c * stride] = C64::new(d, 0.0);
            for r in c + 1..=(c + w).min(n - 1) {
                let mut v = l[r * stride + (r - c)];
                for k in r.saturating_sub(w)..c {
                    v -= l[r * stride + (r - k)] * l[c * stride + (c - k)].conj();
                }
                l[r * stride + (r - c)] = v / d;
            }
        }
        Some(BandCholesky { n, w, l })
    }
}

/// Lower Cholesky factor in band storage.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    w: usize,
    l: Vec<C64>,
}

impl BandCholesky {
    /// Solve `L L^dagger x = b` in place.
    pub fn solve_in_place(&self, b: &mut CMat) {
        let (n, w, stride) = (self.n, self.w, self.w + 1);
        for c in 0..b.ncols() {
            for i in 0..n {
                let mut v = b[(i, c)];
                for k in i.saturating_sub(w)..i {
                    v -= self.l[i * stride + (i - k)] * b[(k, c)];
                }
                b[(i, c)] = v / self.l[i * stride].re;
            }
            for i in (0..n).rev() {
                let mut v = b[(i, c)];
                for r in i + 1..=(i + w).min(n - 1) {
                    v -= self.l[r * stride + (r - i)].conj() * b[(r, c)];
                }
                b[(i, c)] = v / self.l[i * stride].re;
            }
        }
    }
}

/// General complex band matrix with `kl` sub- and `ku` superdiagonals, stored
/// with room for the fill-in of partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![ZERO; n * width] }
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry outside band");
        let p = self.pos(i, j);
        self.data[p] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            ZERO
        } else {
            self.data[self.pos(i, j)]
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `self * x` (before factorization).
    pub fn mul(&self, x: &CMat) -> CMat {
        let mut y = CMat::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            for i in 0..self.n {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                let mut acc = ZERO;
                for j in lo..=hi {
                    acc += self.get(i, j) * x[(j, c)];
                }
                y[(i, c)] = acc;
            }
        }
        y
    }

    /// LU factorization with partial pivoting. Exactly zero pivots are
    /// replaced by `tiny`, which suits inverse iteration.
    pub fn lu(mut self, tiny: f64) -> BandLu {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let mut min_pivot = f64::INFINITY;
        for c in 0..n {
            let last = (c + kl).min(n - 1);
            let mut p = c;
            let mut best = cabs(self.data[self.pos(c, c)]);
            for r in c + 1..=last {
                let v = cabs(self.data[self.pos(r, c)]);
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[c] = p;
            let jhi = (c + kl + ku).min(n - 1);
            if p != c {
                for j in c..=jhi {
                    let (a, b) = (self.pos(c, j), self.pos(p, j));
                    self.data.swap(a, b);
                }
            }
            let pc = self.pos(c, c);
            if best == 0.0 {
                self.data[pc] = C64::new(tiny, 0.0);
            }
            min_pivot = min_pivot.min(cabs(self.data[pc]));
            let inv = C64::new(1.0, 0.0) / self.data[pc];
            for r in c + 1..=last {
                let prc = self.pos(r, c);
                let l = self.data[prc] * inv;
                self.data[prc] = l;
                if l == ZERO {
                    continue;
                }
                for j in c + 1..=jhi {
                    let u = self.data[self.pos(c, j)];
                    let prj = self.pos(r, j);
                    self.data[prj] -= l * u;
                }
            }
        }
        BandLu { m: self, piv, min_pivot }
    }
}

/// Factorization produced by [`BandMatrix::lu`].
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
    min_pivot: f64,
}

impl BandLu {
    /// Smallest pivot magnitude; a rough singularity indicator.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solve `A x = b` in place for every column of `b`.
    pub fn solve_in_place(&self, b: &mut CMat) {
        let m = &self.m;
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        for col in 0..b.ncols() {
            for c in 0..n {
                let p = self.piv[c];
                if p != c {
                    b.swap((c, col), (p, col));
                }
                let bc = b[(c, col)];
                if bc == ZERO {
                    continue;
                }
                for r in c + 1..=(c + kl).min(n - 1) {
                    let l = m.data[m.pos(r, c)];
                    b[(r, col)] -= l * bc;
                }
            }
            for i in (0..n).rev() {
                let mut v = b[(i, col)];
                for j in i + 1..=(i + kl + ku).min(n - 1) {
                    v -= m.data[m.pos(i, j)] * b[(j, col)];
                }
                b[(i, col)] = v / m.data[m.pos(i, i)];
            }
        }
    }

    pub fn solve(&self, b: &CMat) -> CMat {
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        x
    }
}
