//! Uniform periodic grids. Angles are addressed by index into a uniform
//! partition of `[-pi, pi)`, so wrap-around is exact.

use crate::math::cis;
use crate::C64;
use core::f64::consts::PI;

/// Angle of index `i` on a circle partitioned into `n` points.
#[inline]
pub fn angle(i: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * (i % n) as f64 / n as f64
}

/// Unit-modulus point of index `i`.
#[inline]
pub fn unit(i: usize, n: usize) -> C64 {
    cis(angle(i, n))
}

/// A `g1 x g2` doubly periodic grid, row-major with the first axis slow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    pub g1: usize,
    pub g2: usize,
}

impl TorusGrid {
    pub const fn new(g1: usize, g2: usize) -> Self {
        TorusGrid { g1, g2 }
    }

    pub fn len(&self) -> usize {
        self.g1 * self.g2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        (i % self.g1) * self.g2 + (j % self.g2)
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k / self.g2, k % self.g2)
    }

    /// Step sizes `(2 pi / g1, 2 pi / g2)`.
    pub fn steps(&self) -> (f64, f64) {
        (2.0 * PI / self.g1 as f64, 2.0 * PI / self.g2 as f64)
    }

    pub fn doubled(&self) -> Self {
        TorusGrid::new(2 * self.g1, 2 * self.g2)
    }
}
