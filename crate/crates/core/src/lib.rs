//! Topological indices of two-dimensional periodic tight-binding Hamiltonians.
//!
//! A Hamiltonian is given by a finite family of hopping matrices `B[j, m]`, with
//! `j` the hop along the truncated direction and `m` the power of the transverse
//! quasi-momentum `t`. Three integers are computed from it:
//!
//! * [`bulk::bulk_index`]: the lattice Chern number of the Fermi projection,
//! * [`edge::edge_index`]: the spectral flow of left edge states of the half-space
//!   compression through the Fermi level,
//! * [`grafporta::gp_index`]: the Chern number of the kernel bundle of the
//!   truncated shifted operator over a contour around the filled bands.
//!
//! ```
//! use bulkedge_core::{bulk, edge, grafporta, spectral, BlochSymbol, ModelSpec, TorusGrid};
//!
//! let family = ModelSpec::named("qwz", &[("m", 1.0)]).resolve()?;
//! let symbol = BlochSymbol::new(family.clone());
//! let grid = TorusGrid::new(24, 24);
//! let (cert, gamma) = spectral::prepare(&symbol, 0.0, grid, 64)?;
//! let tol = Default::default();
//! let b = bulk::bulk_index_with(&symbol, &gamma, grid, &tol)?;
//! let e = edge::edge_index(&family, &cert, 64, 96, 0.9)?;
//! let g = grafporta::gp_index(&family, &gamma, 24, 24, 64, None, &tol)?;
//! assert_eq!((b.index, e.index, g.index), (1, 1, 1));
//! # Ok::<(), bulkedge_core::Error>(())
//! ```
//!
//! The crate is `no_std` with `alloc`. The `std` feature only enables the
//! `parallel` grid evaluation.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod banded;
pub mod bulk;
pub mod edge;
mod error;
pub mod grafporta;
pub mod grid;
pub mod math;
pub mod model;
mod par;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
pub use grid::TorusGrid;
pub use model::{BlochSymbol, HoppingFamily, ModelSpec};

/// Complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;

/// Sign relating the plaquette Chern sum to the physical index.
///
/// Calibrated once on the two-band model `qwz(1)` against the spectral flow of
/// its left edge and against its Berry-connection Chern number, which is `+1`.
/// Every Chern number in the crate (bulk and kernel bundle) is multiplied by it.
pub const ORIENTATION: i64 = 1;
