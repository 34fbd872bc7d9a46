use bulkedge_core::grid::{unit, TorusGrid};
use bulkedge_core::math::{hermitian_eigenvalues, max_abs_diff, seeded_matrix, spectral_norm};
use bulkedge_core::model::{atomic, hofstadter, qwz};
use bulkedge_core::spectral::{
    band_envelope, default_gamma, fermi_from_matrix, fermi_projection, gap_certificate, gap_midpoint, kernel_frame, prepare,
    riesz_from_matrix, riesz_projection, riesz_quadrature, Contour,
};
use bulkedge_core::tolerances::Tolerances;
use bulkedge_core::{BlochSymbol, CMat, Error, C64};
use proptest::prelude::*;

fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn projector_laws(p: &CMat) {
    assert!(max_abs_diff(&(p * p), p) < 1e-8);
    assert!(max_abs_diff(&p.adjoint(), p) < 1e-10);
}

fn first_gap(q: i64) -> (BlochSymbol, f64) {
    let s = BlochSymbol::new(hofstadter(1, q).unwrap());
    let mu = gap_midpoint(&band_envelope(&s, TorusGrid::new(48, 48)), 1).unwrap();
    (s, mu)
}

#[test]
fn certificate_for_constant_symbol() {
    let s = BlochSymbol::new(atomic(-1.0, 1.0));
    let c = gap_certificate(&s, 0.0, TorusGrid::new(8, 8)).unwrap();
    assert!(c.certified);
    assert!((c.delta_grid - 1.0).abs() < 1e-14);
}

#[test]
fn certificate_for_qwz() {
    let s = BlochSymbol::new(qwz(10.0));
    assert!(gap_certificate(&s, 0.0, TorusGrid::new(64, 64)).unwrap().certified);
    let s = BlochSymbol::new(qwz(0.0));
    let c = gap_certificate(&s, 0.0, TorusGrid::new(24, 24)).unwrap();
    assert!(!c.certified);
    assert!(c.delta_grid < 1e-12);
}

#[test]
fn small_grids_are_rejected() {
    let s = BlochSymbol::new(qwz(1.0));
    assert!(gap_certificate(&s, 0.0, TorusGrid::new(4, 8)).is_err());
}

#[test]
fn default_contour_separates_constant_bands() {
    let s = BlochSymbol::new(atomic(-1.0, 1.0));
    let c = gap_certificate(&s, 0.0, TorusGrid::new(8, 8)).unwrap();
    let (gamma, check) = default_gamma(&c, 64).unwrap();
    assert!(gamma.encloses_real(-1.0) && !gamma.encloses_real(1.0));
    assert!(check.min_distance > 0.5);
    let rightmost = gamma.nodes.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    assert!((rightmost - 0.0).abs() < 1e-2);
}

#[test]
fn default_contour_for_hofstadter_encloses_lowest_band() {
    let (s, mu) = first_gap(3);
    let (cert, gamma) = prepare(&s, mu, TorusGrid::new(24, 24), 64).unwrap();
    for ev in &cert.eigenvalues {
        for &e in ev {
            assert_eq!(gamma.encloses_real(e), e < mu);
        }
    }
    let grid = TorusGrid::new(24, 24);
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        let h = s.at_grid(grid, i, j);
        for z in &gamma.nodes {
            let mut a = h.clone();
            for d in 0..3 {
                a[(d, d)] -= z;
            }
            let sv = a.singular_values();
            assert!(sv.min() > 0.1);
        }
    }
}

#[test]
fn riesz_of_diagonal_is_lower_projector() {
    let h = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]));
    let gamma = Contour::circle(C64::new(-1.0, 0.0), 1.0, 64);
    let p = riesz_quadrature(&h, &gamma).unwrap();
    let mut expect = CMat::zeros(2, 2);
    expect[(0, 0)] = C64::new(1.0, 0.0);
    assert!(max_abs_diff(&p, &expect) < 1e-10);
    assert!(max_abs_diff(&fermi_from_matrix(&h, 0.0).unwrap(), &expect) < 1e-15);
}

#[test]
fn fermi_above_all_bands_is_identity() {
    let s = BlochSymbol::new(qwz(1.0));
    let p = fermi_projection(&s, unit(3, 8), unit(5, 8), 100.0).unwrap();
    assert!(max_abs_diff(&p, &identity(2)) < 1e-12);
}

#[test]
fn fermi_rejects_mu_on_an_eigenvalue() {
    let h = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]));
    assert!(matches!(fermi_from_matrix(&h, 1.0), Err(Error::Gap(_))));
}

#[test]
fn riesz_matches_fermi_on_hofstadter_grid() {
    let (s, mu) = first_gap(3);
    let (_, gamma) = prepare(&s, mu, TorusGrid::new(24, 24), 64).unwrap();
    let grid = TorusGrid::new(24, 24);
    for k in 0..grid.len() {
        let (i, j) = grid.coords(k);
        let (eta, t) = (unit(i, 24), unit(j, 24));
        let p = riesz_projection(&s, eta, t, &gamma).unwrap();
        let f = fermi_projection(&s, eta, t, mu).unwrap();
        projector_laws(&p);
        assert!(max_abs_diff(&p, &f) < 1e-8);
        let below = hermitian_eigenvalues(&s.at_grid(grid, i, j)).iter().filter(|&&e| e < mu).count();
        assert!((p.trace().re - below as f64).abs() < 1e-6);
    }
}

fn max_quadrature_change(s: &BlochSymbol, gamma: &Contour, n: usize) -> f64 {
    let (a, b) = (gamma.resampled(n).unwrap(), gamma.resampled(2 * n).unwrap());
    let grid = TorusGrid::new(12, 12);
    (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            let h = s.at_grid(grid, i, j);
            max_abs_diff(&riesz_quadrature(&h, &a).unwrap(), &riesz_quadrature(&h, &b).unwrap())
        })
        .fold(0.0, f64::max)
}

#[test]
fn quadrature_error_follows_the_geometric_rate() {
    // The trapezoid error on a circle decays like (R / d)^n, d the distance
    // from the centre to the nearest eigenvalue outside.
    let hof = first_gap(3);
    for (s, mu) in [hof, (BlochSymbol::new(qwz(1.0)), 0.0), (BlochSymbol::new(atomic(-1.0, 1.0)), 0.0)] {
        let (cert, gamma) = prepare(&s, mu, TorusGrid::new(24, 24), 64).unwrap();
        let bulkedge_core::spectral::ContourKind::Circle { center, radius } = gamma.kind else { unreachable!() };
        let d = cert.eigenvalues.iter().flatten().filter(|&&e| e > cert.mu).map(|e| (e - center.re).abs()).fold(f64::INFINITY, f64::min);
        let rate = radius / d;
        assert!(max_quadrature_change(&s, &gamma, 32) < 4.0 * rate.powi(32));
        assert!(max_quadrature_change(&s, &gamma, 128) < 1e-8);
    }
}

#[test]
fn node_on_spectrum_is_a_contour_error() {
    let h = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]));
    let gamma = Contour::polyline(vec![C64::new(-1.0, 0.0), C64::new(0.0, -1.0), C64::new(0.5, 0.0), C64::new(0.0, 1.0)]).unwrap();
    assert!(matches!(riesz_from_matrix(&h, &gamma, &Tolerances::default()), Err(Error::Contour(_))));
}

#[test]
fn kernel_frame_examples() {
    let k = kernel_frame(&CMat::zeros(2, 2), None, 1e-7).unwrap();
    assert_eq!(k.frame.ncols(), 2);
    let mut d = CMat::zeros(2, 2);
    d[(0, 0)] = C64::new(1.0, 0.0);
    let k = kernel_frame(&d, None, 1e-7).unwrap();
    assert_eq!(k.frame.ncols(), 1);
    assert!((k.frame[(1, 0)].norm() - 1.0).abs() < 1e-14);
    let a = seeded_matrix(6, 6, 17);
    assert_eq!(kernel_frame(&a, None, 1e-7).unwrap().frame.ncols(), 0);
}

#[test]
fn kernel_frame_rejects_ambiguous_dimension() {
    let mut d = CMat::identity(3, 3);
    d[(2, 2)] = C64::new(1e-3, 0.0);
    let err = kernel_frame(&d, Some(1), 1e-7).unwrap_err();
    assert!(matches!(err, Error::Conditioning { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_frame_contract(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..9, rank_cut in 0usize..4) {
        // A random matrix with a planted kernel: a = b * c with c of reduced rank.
        let r = cols.saturating_sub(rank_cut).min(rows).max(1);
        let a = seeded_matrix(rows, r, seed) * seeded_matrix(r, cols, seed ^ 0x9e37);
        let k = kernel_frame(&a, None, 1e-7).unwrap();
        let f = &k.frame;
        prop_assert_eq!(f.ncols(), cols - r);
        if f.ncols() > 0 {
            let smax = spectral_norm(&a);
            prop_assert!((&a * f).norm() <= 2.0 * 1e-7 * smax * (f.ncols() as f64).sqrt());
            prop_assert!(max_abs_diff(&(f.adjoint() * f), &identity(f.ncols())) < 1e-12);
        }
    }

    #[test]
    fn projections_obey_projector_laws(m in prop_oneof![-1.8f64..-0.2, 0.2f64..1.8, 2.3f64..4.0], i in 0usize..16, j in 0usize..16) {
        let s = BlochSymbol::new(qwz(m));
        let (_, gamma) = prepare(&s, 0.0, TorusGrid::new(24, 24), 64).unwrap();
        let (eta, t) = (unit(i, 16), unit(j, 16));
        let p = riesz_projection(&s, eta, t, &gamma).unwrap();
        let f = fermi_projection(&s, eta, t, 0.0).unwrap();
        prop_assert!(max_abs_diff(&(&p * &p), &p) < 1e-8);
        prop_assert!(max_abs_diff(&p.adjoint(), &p) < 1e-10);
        prop_assert!(max_abs_diff(&p, &f) < 1e-8);
    }
}
