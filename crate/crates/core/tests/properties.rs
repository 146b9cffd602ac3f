use std::f64::consts::PI;

use proptest::prelude::*;
use quermass_core::flows::{self, FlowConfig, FlowKind};
use quermass_core::geometry::{self, curvature_bundle, normalize_quermass, quermass_integrals};
use quermass_core::harmonics::{self, HarmonicSpectrum};
use quermass_core::oracle::{brute_sigma, spheroid_reference, SpheroidSpec};
use quermass_core::spheregrid::{self, integrate};
use quermass_core::symfun::{self, newton_tensor, polarized_sigma, sigma_all, sigma_k_matrix, SquareMatrix};
use quermass_core::{build_grid, Hypersurface, ScalarField};

fn spectrum(n: usize, lmax: usize, coeffs: &[f64]) -> HarmonicSpectrum {
    let mut s = HarmonicSpectrum::zeros(n, lmax);
    for (c, v) in s.coeffs.iter_mut().zip(coeffs.iter().cycle()) {
        *c = *v;
    }
    s
}

fn band_surface(lmax: usize, coeffs: &[f64], c2: f64) -> Hypersurface {
    let g = build_grid(2, 32, 64).unwrap();
    let mut s = spectrum(2, lmax, coeffs);
    s.coeffs[0] = 0.0;
    let u = harmonics::synthesize(&s, &g).unwrap();
    let scale = c2 / spheregrid::sup_norms(&u).unwrap().c2.max(1e-300);
    Hypersurface::new(u.map(|v| v * scale)).unwrap()
}

fn matrix(n: usize, vals: &[f64]) -> SquareMatrix {
    SquareMatrix::from_fn(n, n, |i, j| vals[(i * n + j) % vals.len()] * if i <= j { 1.0 } else { 0.7 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_matches_subset_sums(lambda in prop::collection::vec(-3.0f64..3.0, 1..=8)) {
        let s = sigma_all(&lambda);
        let abs: Vec<f64> = lambda.iter().map(|v| v.abs()).collect();
        for k in 0..=lambda.len() {
            let scale = brute_sigma(&abs, k).max(1e-300);
            prop_assert!((s[k] - brute_sigma(&lambda, k)).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn newton_tensor_trace_identities(n in 1usize..=6, vals in prop::collection::vec(-1.0f64..1.0, 36)) {
        let a = matrix(n, &vals);
        for m in 0..=n {
            let t = newton_tensor(&a, m).unwrap();
            let sm = sigma_k_matrix(&a, m).unwrap();
            let scale = 1.0 + (a.norm() + 1.0).powi(m as i32 + 1);
            prop_assert!((t.trace() - (n - m) as f64 * sm).abs() <= 1e-11 * scale);
            if m < n {
                let next = sigma_k_matrix(&a, m + 1).unwrap();
                prop_assert!(((&a * &t).trace() - (m as f64 + 1.0) * next).abs() <= 1e-11 * scale);
            } else {
                prop_assert!(t.norm() <= 1e-11 * scale);
            }
        }
    }

    #[test]
    fn polarization_on_the_diagonal(n in 1usize..=4, vals in prop::collection::vec(-1.0f64..1.0, 16), m in 1usize..=4) {
        prop_assume!(m <= n);
        let a = matrix(n, &vals);
        let copies = vec![a.clone(); m];
        let p = polarized_sigma(&copies).unwrap();
        // with this normalization the diagonal value is m sigma_m
        let s = m as f64 * sigma_k_matrix(&a, m).unwrap();
        prop_assert!((p - s).abs() <= 1e-10 * (1.0 + s.abs()));
    }

    #[test]
    fn maclaurin_gap_is_nonnegative_in_the_cone(lambda in prop::collection::vec(-0.5f64..2.0, 2..=6), k in 1usize..5) {
        prop_assume!(k < lambda.len());
        let gap = symfun::newton_maclaurin_gap(&lambda, k).unwrap();
        if gap.in_cone {
            let s = sigma_all(&lambda);
            prop_assert!(gap.value >= -1e-12 * s[k] * s[k]);
        }
    }

    #[test]
    fn integration_by_parts(coeffs in prop::collection::vec(-1.0f64..1.0, 80), lmax in 1usize..=8) {
        let g = build_grid(2, 24, 48).unwrap();
        let u = harmonics::synthesize(&spectrum(2, lmax, &coeffs), &g).unwrap();
        let v = harmonics::synthesize(&spectrum(2, lmax, &coeffs[7..]), &g).unwrap();
        let lhs = integrate(&u.zip_map(&spheregrid::laplacian(&v).unwrap(), |a, b| a * b));
        let rhs = -integrate(&spheregrid::gradient(&u).unwrap().dot(&spheregrid::gradient(&v).unwrap()));
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0));
    }

    #[test]
    fn hessian_trace_is_laplacian(coeffs in prop::collection::vec(-1.0f64..1.0, 80), lmax in 1usize..=8) {
        let g = build_grid(2, 24, 48).unwrap();
        let u = harmonics::synthesize(&spectrum(2, lmax, &coeffs), &g).unwrap();
        let tr = spheregrid::hessian(&u).unwrap().trace();
        let lap = spheregrid::laplacian(&u).unwrap();
        let d = tr.zip_map(&lap, |a, b| a - b).max_abs();
        prop_assert!(d <= 1e-10 * (1.0 + lap.max_abs()));
    }

    #[test]
    fn parseval_and_round_trip(coeffs in prop::collection::vec(-1.0f64..1.0, 121), lmax in 0usize..=10) {
        let g = build_grid(2, 24, 48).unwrap();
        let s = spectrum(2, lmax, &coeffs);
        let f = harmonics::synthesize(&s, &g).unwrap();
        let l2 = integrate(&f.map(|v| v * v));
        prop_assert!((l2 - s.sobolev_norms().0).abs() <= 1e-11 * (1.0 + l2));
        let back = harmonics::analyze(&f, lmax).unwrap();
        for (a, b) in back.coeffs.iter().zip(&s.coeffs) {
            prop_assert!((a - b).abs() <= 1e-11);
        }
    }

    #[test]
    fn spectral_gap_without_degree_one(coeffs in prop::collection::vec(-1.0f64..1.0, 169), lmax in 1usize..=12, n in 1usize..=2) {
        let s = spectrum(n, lmax, &coeffs).strip_low_modes(1).unwrap();
        let (_, g, _) = s.sobolev_norms();
        prop_assert!(s.poincare_margin() >= -1e-10 * (1.0 + g));
    }

    #[test]
    fn sphere_limit_of_spheroid_reference(r in 0.3f64..3.0) {
        let s = SpheroidSpec::new(r, r).unwrap();
        for k in 0..=2 {
            let expect = symfun::binomial(2, k as i64) * r.powi(2 - k) * 4.0 * PI;
            prop_assert!((spheroid_reference(&s, k).unwrap() - expect).abs() <= 1e-10 * expect);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gauss_bonnet_on_random_surfaces(coeffs in prop::collection::vec(-1.0f64..1.0, 64), lmax in 2usize..=7, c2 in 0.01f64..0.3) {
        let m = band_surface(lmax, &coeffs, c2);
        let i2 = geometry::quermass_integral(&m, 2).unwrap();
        prop_assert!((i2 - 4.0 * PI).abs() <= 1e-6 * 4.0 * PI);
    }

    #[test]
    fn dilation_scales_quermassintegrals(coeffs in prop::collection::vec(-1.0f64..1.0, 64), lambda in 0.5f64..2.0) {
        let m = band_surface(5, &coeffs, 0.1);
        let q = quermass_integrals(&m).unwrap();
        let d = quermass_integrals(&m.dilate(lambda).unwrap()).unwrap();
        for k in -1..=2i64 {
            let expect = q.get(k) * lambda.powi(2 - k as i32);
            prop_assert!((d.get(k) - expect).abs() <= 1e-10 * expect.abs());
        }
    }

    #[test]
    fn normalization_is_idempotent(coeffs in prop::collection::vec(-1.0f64..1.0, 64), j in -1i64..=1) {
        let m = band_surface(5, &coeffs, 0.1);
        let once = normalize_quermass(&m, j).unwrap();
        let twice = normalize_quermass(&once, j).unwrap();
        let d = once.u().zip_map(twice.u(), |a, b| a - b).max_abs();
        prop_assert!(d <= 1e-12);
        let ij = geometry::quermass_integral(&once, j).unwrap();
        prop_assert!((ij - geometry::unit_ball_quermass(2, j)).abs() <= 1e-12 * ij);
    }

    #[test]
    fn nearly_round_deficits_are_nonnegative(coeffs in prop::collection::vec(-1.0f64..1.0, 64), c2 in 0.005f64..0.05) {
        let m = band_surface(6, &coeffs, c2);
        let q = quermass_integrals(&m).unwrap();
        for (k, j) in [(0, -1), (1, -1), (1, 0), (2, 1)] {
            let d = q.deficit(k, j).unwrap();
            prop_assert!(d >= -1e-12, "delta_{k}_{j} = {d}");
        }
    }

    #[test]
    fn volume_preserving_speed_integrates_to_zero(coeffs in prop::collection::vec(-1.0f64..1.0, 64), alpha in 1.0f64..3.0) {
        let m = band_surface(6, &coeffs, 0.1);
        let b = curvature_bundle(&m).unwrap();
        let (g, _) = flows::speed_volume_preserving(&m, &b, 1, alpha).unwrap();
        let vals: Vec<f64> = g.iter().zip(b.nodes()).map(|(g, c)| g * c.area_element).collect();
        let total = spheregrid::integrate_values(m.u().grid(), &vals);
        prop_assert!(total.abs() <= 1e-10);
    }

    #[test]
    fn round_spheres_stay_round(r in 0.5f64..2.0, kind in prop::sample::select(vec![FlowKind::Inverse, FlowKind::VolumePreserving])) {
        let g = build_grid(2, 16, 32).unwrap();
        let m = Hypersurface::new(ScalarField::constant(&g, r - 1.0)).unwrap();
        let cfg = FlowConfig { kind, t_end: 0.05, compute_alpha: false, ..Default::default() };
        let out = flows::run(&cfg, &m).unwrap();
        prop_assert!(out.abort.is_none());
        for row in &out.rows {
            prop_assert!(row.c0 <= 1e-10 && row.s.is_none());
        }
    }
}
