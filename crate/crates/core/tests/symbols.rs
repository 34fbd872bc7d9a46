use bulkedge_core::grid::{unit, TorusGrid};
use bulkedge_core::math::{cis, max_abs_diff};
use bulkedge_core::model::{atomic, chain, evaluate_symbol, hofstadter, qwz, CoefficientEntry, CustomSymbol, ModelSpec};
use bulkedge_core::{BlochSymbol, CMat, Error, HoppingFamily, C64};
use proptest::prelude::*;

fn hermitian_on_grid(f: &HoppingFamily, g: usize) -> f64 {
    let s = BlochSymbol::new(f.clone());
    let grid = TorusGrid::new(g, g);
    let mut worst: f64 = 0.0;
    for i in 0..g {
        for j in 0..g {
            let h = s.at_grid(grid, i, j);
            worst = worst.max(max_abs_diff(&h, &h.adjoint()));
        }
    }
    worst
}

/// Trapezoid Fourier coefficient of the symbol on an `a x b` grid.
fn fourier(f: &HoppingFamily, j: i64, m: i64, a: usize, b: usize) -> CMat {
    let s = BlochSymbol::new(f.clone());
    let mut acc = CMat::zeros(f.dim(), f.dim());
    for p in 0..a {
        for q in 0..b {
            let (eta, t) = (unit(p, a), unit(q, b));
            let w = eta.powi(-j as i32) * t.powi(-m as i32);
            acc += evaluate_symbol(&s, eta, t).unwrap() * w;
        }
    }
    acc / C64::new((a * b) as f64, 0.0)
}

#[test]
fn constant_and_scalar_symbols() {
    let s = BlochSymbol::new(atomic(-1.0, 1.0));
    let h = s.evaluate(cis(0.3), cis(-1.1)).unwrap();
    assert!((h[(0, 0)].re + 1.0).abs() < 1e-15 && (h[(1, 1)].re - 1.0).abs() < 1e-15);
    let s = BlochSymbol::new(chain(1.0, 0.0));
    let h = s.evaluate(C64::new(1.0, 0.0), cis(2.0)).unwrap();
    assert!((h[(0, 0)] - C64::new(2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn off_circle_arguments_are_rejected() {
    let s = BlochSymbol::new(qwz(1.0));
    let err = s.evaluate(C64::new(1.1, 0.0), C64::new(1.0, 0.0)).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
}

#[test]
fn zoo_is_hermitian_on_32_grid() {
    for f in [qwz(1.0), qwz(-0.5), hofstadter(1, 3).unwrap(), hofstadter(2, 5).unwrap(), chain(0.7, 0.2), atomic(-1.0, 1.0)] {
        f.validate().unwrap();
        assert!(hermitian_on_grid(&f, 32) < 1e-12);
    }
}

#[test]
fn free_lattice_is_zero_flux_hofstadter() {
    let f = hofstadter(0, 1).unwrap();
    let s = BlochSymbol::new(f);
    for (a, b) in [(0.3, -2.0), (1.0, 1.0), (-3.0, 0.5)] {
        let h = s.evaluate(cis(a), cis(b)).unwrap();
        assert!((h[(0, 0)].re - 2.0 * (a.cos() + b.cos())).abs() < 1e-14);
    }
}

#[test]
fn hofstadter_spectrum_within_gershgorin_bound() {
    let s = BlochSymbol::new(hofstadter(1, 3).unwrap());
    let grid = TorusGrid::new(16, 16);
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        for e in bulkedge_core::math::hermitian_eigenvalues(&s.at_grid(grid, i, j)) {
            assert!(e.abs() <= 4.0 + 1e-12);
        }
    }
}

#[test]
fn qwz_zero_mass_vanishes_at_a_corner() {
    let s = BlochSymbol::new(qwz(0.0));
    let h = s.evaluate(C64::new(-1.0, 0.0), C64::new(1.0, 0.0)).unwrap();
    assert!(h.norm() < 1e-15);
}

#[test]
fn custom_spec_strict_and_lenient() {
    let entry = |j, m, re| CoefficientEntry { j, m, row: 0, col: 0, re, im: 0.0 };
    let mut spec = ModelSpec::named("custom", &[]);
    spec.custom = Some(CustomSymbol { dim: 1, range: 1, t_range: 0, entries: vec![entry(1, 0, 1.0)] });
    assert!(matches!(spec.resolve(), Err(Error::Model(_))));
    spec.strict = false;
    let f = spec.resolve().unwrap();
    assert!((f.coeff(-1, 0).unwrap()[(0, 0)].re - 0.5).abs() < 1e-15);
    spec.strict = true;
    spec.custom.as_mut().unwrap().entries = vec![entry(1, 0, 1.0), entry(-1, 0, 1.0)];
    let f = spec.resolve().unwrap();
    assert_eq!((f.dim(), f.range()), (1, 1));
}

#[test]
fn unknown_model_is_rejected() {
    assert!(ModelSpec::named("graphene", &[]).resolve().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fourier_recovers_coefficients(m in -3.0f64..3.0, p in 0i64..5, q in 1i64..6) {
        prop_assume!(num_integer_gcd(p, q) == 1);
        for f in [qwz(m), hofstadter(p, q).unwrap()] {
            let (a, b) = (4 * f.range().max(1), 4 * f.t_range().max(1));
            for (j, mm, coeff) in f.iter() {
                prop_assert!(max_abs_diff(&fourier(&f, j, mm, a, b), coeff) < 1e-10);
            }
        }
    }

    #[test]
    fn random_hermitian_families_evaluate_hermitian(seed in any::<u64>(), n in 1usize..4, r in 0usize..3, mt in 0usize..3) {
        let mut f = HoppingFamily::zeros(n, r, mt).unwrap();
        let mut rng = bulkedge_core::math::SplitMix::new(seed);
        for j in -(r as i64)..=(r as i64) {
            for m in -(mt as i64)..=(mt as i64) {
                let b = CMat::from_fn(n, n, |_, _| C64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5));
                f.set_coeff(j, m, b).unwrap();
            }
        }
        let f = f.symmetrized();
        f.validate().unwrap();
        prop_assert!(hermitian_on_grid(&f, 8) < 1e-12);
    }
}

fn num_integer_gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { num_integer_gcd(b, a % b) }
}
