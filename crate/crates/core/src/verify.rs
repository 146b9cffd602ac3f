//! Self-checks: per-module invariant suites and the twelve end-to-end
//! acceptance criteria. Both the `verify` subcommand and the acceptance
//! test target run these.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::flows::{self, DerivativeTarget, DiagnosticsRow, FlowConfig, FlowKind};
use crate::geometry::{
    self, curvature_bundle, linearization_residual_inverse, linearization_residual_sigma, normalize_quermass,
    quermass_integrals, unit_ball_quermass, Hypersurface,
};
use crate::harmonics::{self, harmonic_field, HarmonicSpectrum};
use crate::oracle::{self, brute_sigma, spheroid_reference, SpheroidSpec};
use crate::shapes;
use crate::spheregrid::{self, build_grid, integrate, DerivativeScheme, GridSpec, ScalarField};
use crate::symfun::{self, binomial, newton_tensor, sigma_all, sigma_k_matrix, SquareMatrix};

/// Outcome of one check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<44} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult { name: name.to_string(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub const SUITES: [&str; 6] = ["symfun", "spheregrid", "harmonics", "oracle", "geometry", "flows"];

/// Runs one named suite, or every suite for `None`.
pub fn run_suite(name: Option<&str>) -> std::result::Result<Vec<CheckResult>, String> {
    let names: Vec<&str> = match name {
        None => SUITES.to_vec(),
        Some(s) if SUITES.contains(&s) => vec![s],
        Some(s) => return Err(format!("unknown suite {s:?}; expected one of {}", SUITES.join(", "))),
    };
    let mut out = Vec::new();
    for s in names {
        match s {
            "symfun" => {
                out.push(criterion(1));
                out.push(maclaurin_check());
            }
            "spheregrid" => {
                out.push(criterion(2));
                out.push(integration_by_parts_check());
                out.push(divergence_identity_check());
                out.push(criterion(4));
            }
            "harmonics" => {
                out.push(parseval_check());
                out.push(criterion(5));
            }
            "oracle" => out.push(oracle_check()),
            "geometry" => {
                out.push(criterion(3));
                out.push(criterion(9));
                out.push(criterion(11));
            }
            _ => out.extend(criteria(&[6, 7, 8, 10, 12])),
        }
    }
    Ok(out)
}

/// Runs the listed acceptance criteria (1-based), sharing flow runs between
/// criteria that need the same one.
pub fn criteria(which: &[usize]) -> Vec<CheckResult> {
    let mut inverse: Option<(Result<Vec<DiagnosticsRow>>, f64)> = None;
    let mut out = Vec::new();
    for &i in which {
        match i {
            6 | 7 => {
                let (rows, secs) = inverse.get_or_insert_with(|| {
                    let start = Instant::now();
                    let r = inverse_acceptance_run();
                    (r, start.elapsed().as_secs_f64())
                });
                let mut res = match rows {
                    Ok(rows) if i == 6 => timed("6 inverse flow conservation", || Ok(judge_inverse_conservation(rows, *secs))),
                    Ok(rows) => timed("7 stability ratio", || Ok(judge_stability_ratio(rows))),
                    Err(e) => CheckResult {
                        name: format!("{i} inverse flow run"),
                        passed: false,
                        detail: format!("error: {e}"),
                        seconds: 0.0,
                    },
                };
                if i == 6 {
                    res.seconds += *secs;
                }
                out.push(res);
            }
            _ => out.push(criterion(i)),
        }
    }
    out
}

pub fn all_criteria() -> Vec<CheckResult> {
    criteria(&(1..=12).collect::<Vec<_>>())
}

pub fn criterion(i: usize) -> CheckResult {
    match i {
        1 => timed("1 symmetric-function oracle", criterion_symfun),
        2 => timed("2 sphere exactness", criterion_spheres),
        3 => timed("3 spheroid cross-validation", criterion_spheroid),
        4 => timed("4 Gauss-Bonnet on random surfaces", criterion_gauss_bonnet),
        5 => timed("5 Poincare spectral gap", criterion_poincare),
        6 | 7 => criteria(&[i]).remove(0),
        8 => timed("8 Sobolev-norm derivative checks", criterion_derivative_checks),
        9 => timed("9 expansion order", criterion_expansion_order),
        10 => timed("10 volume-preserving flow", criterion_volume_preserving),
        11 => timed("11 static deficit bound", criterion_static_bound),
        12 => timed("12 exact sphere solution", criterion_sphere_flow),
        _ => CheckResult { name: format!("{i}"), passed: false, detail: "no such criterion".into(), seconds: 0.0 },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_symmetric(n: usize, rng: &mut impl Rng) -> SquareMatrix {
    let mut a = SquareMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

fn criterion_symfun() -> Result<(bool, String)> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_sigma = 0.0f64;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=8);
        let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let abs: Vec<f64> = lambda.iter().map(|v| v.abs()).collect();
        let s = sigma_all(&lambda);
        for k in 0..=n {
            // relative to the cancellation-free magnitude sigma_k(|lambda|)
            let scale = brute_sigma(&abs, k).max(f64::MIN_POSITIVE);
            worst_sigma = worst_sigma.max((s[k] - brute_sigma(&lambda, k)).abs() / scale);
        }
    }
    let mut worst_tensor = 0.0f64;
    let mut worst_deriv = 0.0f64;
    for trial in 0..2_000 {
        let n = rng.random_range(1..=8);
        let a = random_symmetric(n, &mut rng);
        let eig = SymmetricEigen::new(a.clone()).eigenvalues;
        let lam: Vec<f64> = eig.iter().copied().collect();
        let abs: Vec<f64> = lam.iter().map(|v| v.abs()).collect();
        let id = SquareMatrix::identity(n, n);
        let mut prev = id.clone();
        for m in 0..=n {
            let scale = (0..=m).map(|j| brute_sigma(&abs, j)).sum::<f64>().max(1.0);
            let t = newton_tensor(&a, m)?;
            let sm = sigma_k_matrix(&a, m)?;
            worst_tensor = worst_tensor.max((sm - brute_sigma(&lam, m)).abs() / scale);
            if m > 0 {
                let cascade = &id * sm - &a * &prev;
                worst_tensor = worst_tensor.max((&t - cascade).norm() / scale);
            }
            worst_tensor = worst_tensor.max((t.trace() - (n - m) as f64 * sm).abs() / scale);
            if m < n {
                let next = sigma_k_matrix(&a, m + 1)?;
                worst_tensor = worst_tensor.max(((&a * &t).trace() - (m as f64 + 1.0) * next).abs() / scale);
            } else {
                worst_tensor = worst_tensor.max(t.norm() / scale);
            }
            prev = t;
        }
        if trial < 200 {
            let h = 1e-5;
            for k in 1..=n {
                let t = newton_tensor(&a, k - 1)?;
                for i in 0..n {
                    for j in 0..n {
                        let mut ap = a.clone();
                        let mut am = a.clone();
                        ap[(i, j)] += h;
                        am[(i, j)] -= h;
                        let fd = (sigma_k_matrix(&ap, k)? - sigma_k_matrix(&am, k)?) / (2.0 * h);
                        let scale = t.amax().max(1.0);
                        worst_deriv = worst_deriv.max((fd - t[(j, i)]).abs() / scale);
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst_sigma <= 1e-12 && worst_tensor <= 1e-12 && worst_deriv <= 1e-6 && secs < 5.0;
    Ok((
        ok,
        format!(
            "sigma vs brute {worst_sigma:.1e}, tensor identities {worst_tensor:.1e}, derivative vs FD {worst_deriv:.1e}, {secs:.2}s"
        ),
    ))
}

fn maclaurin_check() -> CheckResult {
    timed("symfun Newton-Maclaurin in the cone", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut checked = 0;
        let mut worst = f64::INFINITY;
        for _ in 0..5_000 {
            let n = rng.random_range(2..=6);
            let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..2.0)).collect();
            let k = rng.random_range(1..n);
            let gap = symfun::newton_maclaurin_gap(&lambda, k)?;
            if gap.in_cone {
                checked += 1;
                let s = sigma_all(&lambda);
                worst = worst.min(gap.value / (s[k] * s[k]).max(1e-300));
            }
        }
        let umbilic = symfun::newton_maclaurin_gap(&[1.3; 4], 2)?.value.abs();
        Ok((checked > 100 && worst >= -1e-12 && umbilic < 1e-12, format!("{checked} cone samples, min scaled gap {worst:.1e}, umbilic gap {umbilic:.1e}")))
    })
}

fn criterion_spheres() -> Result<(bool, String)> {
    let start = Instant::now();
    let g = build_grid(2, 64, 128)?;
    let mut worst = 0.0f64;
    for c in [0.0, 0.2] {
        let m = Hypersurface::new(ScalarField::constant(&g, c))?;
        let r = 1.0 + c;
        let b = curvature_bundle(&m)?;
        for node in 0..g.len() {
            for &k in b.kappa(node) {
                worst = worst.max((k - 1.0 / r).abs());
            }
        }
        let q = quermass_integrals(&m)?;
        worst = worst.max(rel(q.get(-1), 4.0 / 3.0 * PI * r.powi(3)));
        for k in 0..=2i64 {
            worst = worst.max(rel(q.get(k), binomial(2, k) * r.powi(2 - k as i32) * 4.0 * PI));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst <= 1e-6 && secs < 1.0, format!("max error {worst:.1e}, {secs:.2}s")))
}

fn spheroid_errors(grid: &Arc<GridSpec>, s: &SpheroidSpec) -> Result<[f64; 2]> {
    let m = shapes::ShapeSpec::spheroid(s.a, s.c).build(grid, 0)?;
    let q = quermass_integrals(&m)?;
    Ok([rel(q.get(0), spheroid_reference(s, 0)?), rel(q.get(1), spheroid_reference(s, 1)?)])
}

fn criterion_spheroid() -> Result<(bool, String)> {
    let s = SpheroidSpec::new(1.0, 1.1)?;
    let coarse = build_grid(2, 64, 128)?;
    let fine = build_grid(2, 128, 256)?;
    let e1 = spheroid_errors(&coarse, &s)?;
    let e2 = spheroid_errors(&fine, &s)?;
    let f1 = spheroid_errors(&coarse.with_scheme(DerivativeScheme::FourthOrder), &s)?;
    let f2 = spheroid_errors(&fine.with_scheme(DerivativeScheme::FourthOrder), &s)?;
    let order = (f1[1] / f2[1]).log2();
    let ok = e1[0].max(e1[1]) <= 1e-4 && e2[0].max(e2[1]) <= 1e-6;
    Ok((
        ok,
        format!(
            "I0/I1 rel err 64x128 {:.1e}/{:.1e}, 128x256 {:.1e}/{:.1e}; fourth-order scheme I1 {:.1e} -> {:.1e} (order {order:.2})",
            e1[0], e1[1], e2[0], e2[1], f1[1], f2[1]
        ),
    ))
}

fn criterion_gauss_bonnet() -> Result<(bool, String)> {
    let g = build_grid(2, 64, 128)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let l_max = rng.random_range(4..=16);
        let c2 = rng.random_range(0.05..0.3);
        let u = shapes::random_band(&g, 1, l_max, c2, false, &mut rng)?;
        let m = Hypersurface::new(u)?;
        worst = worst.max(rel(geometry::quermass_integral(&m, 2)?, 4.0 * PI));
    }
    Ok((worst <= 1e-6, format!("20 surfaces, max relative error {worst:.1e}")))
}

fn random_spectrum(n: usize, lmax: usize, rng: &mut impl Rng) -> Result<HarmonicSpectrum> {
    let mut s = HarmonicSpectrum::zeros(n, lmax);
    for c in s.coeffs.iter_mut() {
        *c = rng.random_range(-1.0..1.0);
    }
    Ok(s)
}

fn criterion_poincare() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min_stripped = f64::INFINITY;
    let mut max_dominant = f64::NEG_INFINITY;
    for trial in 0..100 {
        let n = if trial % 4 == 3 { 1 } else { 2 };
        let lmax = rng.random_range(2..=12);
        let s = random_spectrum(n, lmax, &mut rng)?;
        let stripped = s.strip_low_modes(1)?;
        let (_, g, _) = stripped.sobolev_norms();
        min_stripped = min_stripped.min(stripped.poincare_margin() / g.max(1e-300));
        // a unit degree-one component whose negative contribution outweighs
        // twice the positive one of the higher modes
        let m = if n == 1 { 1 } else { rng.random_range(-1..=1) };
        let mut one = HarmonicSpectrum::zeros(n, lmax);
        one.set(1, m, 1.0)?;
        let deficit = -one.poincare_margin();
        let scale = (0.5 * deficit / stripped.poincare_margin().max(1e-300)).sqrt().min(1.0);
        let mut d = stripped.clone();
        for c in d.coeffs.iter_mut() {
            *c *= scale;
        }
        d.set(1, m, 1.0)?;
        max_dominant = max_dominant.max(d.poincare_margin());
    }
    Ok((
        min_stripped >= -1e-10 && max_dominant < 0.0,
        format!("min margin without l = 1: {min_stripped:.2e} (relative); max margin with l = 1 dominant: {max_dominant:.2e}"),
    ))
}

fn parseval_check() -> CheckResult {
    timed("harmonics Parseval and round trip", || {
        let g = build_grid(2, 32, 64)?;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let s = random_spectrum(2, 12, &mut rng)?;
            let f = harmonics::synthesize(&s, &g)?;
            let l2 = integrate(&f.map(|v| v * v));
            worst = worst.max(rel(l2, s.sobolev_norms().0));
            let back = harmonics::analyze(&f, 12)?;
            let diff = back.coeffs.iter().zip(&s.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(diff);
        }
        Ok((worst < 1e-11, format!("max deviation {worst:.1e}")))
    })
}

fn integration_by_parts_check() -> CheckResult {
    timed("spheregrid integration by parts", || {
        let mut worst = 0.0f64;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, lat, lon) in [(2, 32, 64), (2, 64, 128), (1, 0, 64)] {
            let g = build_grid(n, lat, lon)?;
            let u = shapes::random_band(&g, 0, 8, 1.0, false, &mut rng)?;
            let v = shapes::random_band(&g, 0, 8, 1.0, false, &mut rng)?;
            let lap = spheregrid::laplacian(&v)?;
            let lhs = integrate(&u.zip_map(&lap, |a, b| a * b));
            let rhs = -integrate(&spheregrid::gradient(&u)?.dot(&spheregrid::gradient(&v)?));
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1e-3));
        }
        Ok((worst <= 1e-8, format!("max relative mismatch {worst:.1e}")))
    })
}

/// Weak form of `div T_1(D^2 u) = -(n-1) grad u` on S^2, paired with the
/// gradient of a test function.
fn divergence_residual(grid: &Arc<GridSpec>, u: &ScalarField, phi: &ScalarField) -> Result<f64> {
    let u = u.with_grid(grid.clone())?;
    let phi = phi.with_grid(grid.clone())?;
    let ju = spheregrid::jet(&u)?;
    let jp = spheregrid::jet(&phi)?;
    let n = grid.n() as f64;
    let mut lhs = vec![0.0; grid.len()];
    let mut rhs = vec![0.0; grid.len()];
    for node in 0..grid.len() {
        let a = ju.local(node);
        let b = jp.local(node);
        let lap = a.hess[0][0] + a.hess[1][1];
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let t = if i == j { lap } else { 0.0 } - a.hess[i][j];
                s += b.hess[i][j] * t;
            }
        }
        lhs[node] = s;
        rhs[node] = (n - 1.0) * (a.grad[0] * b.grad[0] + a.grad[1] * b.grad[1]);
    }
    let l = spheregrid::integrate_values(grid, &lhs);
    let r = spheregrid::integrate_values(grid, &rhs);
    Ok((l - r).abs() / r.abs())
}

fn divergence_identity_check() -> CheckResult {
    timed("spheregrid Newton-tensor divergence identity", || {
        let coarse = build_grid(2, 32, 64)?;
        let fine = build_grid(2, 64, 128)?;
        let u = ScalarField::from_fn(&coarse, |x| (1.5 * x[0] + 0.3).sin() * x[2] + x[1] * x[1]);
        let phi = ScalarField::from_fn(&coarse, |x| (x[0] - 0.7 * x[2]).exp());
        let resample = |f: &dyn Fn([f64; 3]) -> f64, g: &Arc<GridSpec>| ScalarField::from_fn(g, f);
        let uf = |x: [f64; 3]| (1.5 * x[0] + 0.3).sin() * x[2] + x[1] * x[1];
        let pf = |x: [f64; 3]| (x[0] - 0.7 * x[2]).exp();
        let spectral = divergence_residual(&fine, &resample(&uf, &fine), &resample(&pf, &fine))?;
        let c4 = coarse.with_scheme(DerivativeScheme::FourthOrder);
        let f4 = fine.with_scheme(DerivativeScheme::FourthOrder);
        let e1 = divergence_residual(&c4, &u.with_grid(c4.clone())?, &phi.with_grid(c4.clone())?)?;
        let e2 = divergence_residual(&f4, &resample(&uf, &f4), &resample(&pf, &f4))?;
        let order = (e1 / e2).log2();
        Ok((
            spectral < 1e-10 && order > 3.5,
            format!("spectral {spectral:.1e}; fourth-order scheme {e1:.1e} -> {e2:.1e} (order {order:.2})"),
        ))
    })
}

fn oracle_check() -> CheckResult {
    timed("oracle self-consistency", || {
        let mut worst = 0.0f64;
        for r in [0.7, 1.0, 1.6] {
            let s = SpheroidSpec::new(r, r)?;
            for k in -1..=2 {
                worst = worst.max(rel(spheroid_reference(&s, k)?, unit_ball_quermass(2, k as i64) * r.powi(2 - k)));
            }
        }
        let s = SpheroidSpec::new(1.0, 1.1)?;
        worst = worst.max(rel(spheroid_reference(&s, 0)?, s.area()));
        let samples: Vec<(f64, f64)> = (0..3).map(|i| {
            let t = 1.0 + (i as f64 - 1.0) * 1e-3;
            (t, (0.5 * t).exp())
        }).collect();
        let d = oracle::fd_time_derivative(&samples, 1.0)?;
        let fd_err = (d - 0.5 * 0.5f64.exp()).abs();
        Ok((worst <= 1e-10 && fd_err <= 1e-6, format!("spheroid references {worst:.1e}, time derivative {fd_err:.1e}")))
    })
}

fn y20_surface(grid: &Arc<GridSpec>, eps: f64) -> Result<Hypersurface> {
    Hypersurface::new(harmonic_field(grid, 2, 0)?.map(|v| eps * v))
}

fn criterion_expansion_order() -> Result<(bool, String)> {
    let g = build_grid(2, 64, 128)?;
    let eps = 0.02;
    let a = y20_surface(&g, eps)?;
    let b = y20_surface(&g, eps / 2.0)?;
    let rs = linearization_residual_sigma(&b, 2)? / linearization_residual_sigma(&a, 2)?;
    let ri = linearization_residual_inverse(&b, 2)? / linearization_residual_inverse(&a, 2)?;
    let inside = |r: f64| (0.15..=0.35).contains(&r);
    Ok((inside(rs) && inside(ri), format!("k = 2, n = 2: sigma_1 ratio {rs:.4}, 1/sigma_2 ratio {ri:.4}")))
}

fn criterion_static_bound() -> Result<(bool, String)> {
    let g = build_grid(2, 64, 128)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bound = 1.0 / 18.0 - 0.01;
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let l_max = rng.random_range(2..=10);
        let c2 = rng.random_range(0.01..0.05);
        let u = shapes::random_band(&g, 2, l_max, c2, true, &mut rng)?;
        let m = normalize_quermass(&Hypersurface::new(u)?, 0)?;
        let alpha = geometry::fraenkel_asymmetry(&m)?.alpha;
        let delta = geometry::deficit(&m, 1, 0)?;
        worst = worst.min(delta / (alpha * alpha));
    }
    Ok((worst >= bound, format!("min delta_1_0 / alpha^2 = {worst:.4} (bound {bound:.4})")))
}

fn criterion_sphere_flow() -> Result<(bool, String)> {
    let g = build_grid(2, 64, 128)?;
    let cfg = FlowConfig { t_end: 1.0, compute_alpha: false, ..Default::default() };
    let mut s = flows::prepare_initial(&cfg, &Hypersurface::new(ScalarField::constant(&g, 0.0))?)?;
    for _ in 0..1000 {
        s = flows::step_fixed(&s, &cfg, 1e-3)?;
    }
    let expect = 0.5f64.exp();
    let worst = s.w.values().iter().map(|w| rel(*w, expect)).fold(0.0, f64::max);
    Ok((worst <= 1e-6 && (s.t - 1.0).abs() < 1e-12, format!("t = {:.6}, max |w/e^(t/2) - 1| = {worst:.1e}", s.t)))
}

/// The inverse-flow run shared by criteria 6 and 7.
pub fn inverse_acceptance_config() -> FlowConfig {
    FlowConfig {
        kind: FlowKind::Inverse,
        n: 2,
        k: 1,
        t_end: 8.0,
        symmetrize: true,
        diag_stride: 1,
        compute_alpha: false,
        // the prescribed initial surface has C2 = 0.43 (Frobenius Hessian)
        c2_gate: 0.5,
        ..Default::default()
    }
}

pub fn inverse_acceptance_shape() -> shapes::ShapeSpec {
    shapes::ShapeSpec::harmonic(vec![(2, 0, 0.05), (4, 0, 0.025)]).symmetrized(true)
}

fn inverse_acceptance_run() -> Result<Vec<DiagnosticsRow>> {
    let g = build_grid(2, 64, 128)?;
    let m = inverse_acceptance_shape().build(&g, 0)?;
    let out = flows::run(&inverse_acceptance_config(), &m)?;
    if let Some(e) = out.abort {
        return Err(e);
    }
    Ok(out.rows)
}

fn judge_inverse_conservation(rows: &[DiagnosticsRow], secs: f64) -> (bool, String) {
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let drift = rows.iter().map(|r| rel(r.i_km1, first.i_km1)).fold(0.0, f64::max);
    let rise = rows.windows(2).map(|w| w[1].i_k - w[0].i_k).fold(f64::NEG_INFINITY, f64::max);
    let decay = last.c0 / first.c0;
    let ok = drift <= 1e-4 && rise <= 1e-8 && decay <= 0.1 && (last.t - 8.0).abs() < 1e-12 && secs < 300.0;
    (
        ok,
        format!(
            "{} steps; I_0 drift {drift:.1e}; max I_1 step increase {rise:.1e}; C0 {:.2e} -> {:.2e}",
            last.steps, first.c0, last.c0
        ),
    )
}

fn last_in_window(rows: &[DiagnosticsRow]) -> Option<&DiagnosticsRow> {
    rows.iter().rev().find(|r| (0.005..=0.01).contains(&r.c2))
}

fn judge_stability_ratio(rows: &[DiagnosticsRow]) -> (bool, String) {
    let Some(row) = last_in_window(rows) else {
        return (false, "C2 never entered [0.005, 0.01]".into());
    };
    let s_window = row.s.unwrap_or(f64::NAN);
    let t_end = rows[rows.len() - 1].t;
    let tail: Vec<f64> = rows.iter().filter(|r| r.t >= 0.75 * t_end).filter_map(|r| r.s).collect();
    let drop = tail.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    let ok = s_window >= 0.9 && drop <= 1e-3 && tail.len() > 1;
    (
        ok,
        format!(
            "S = {s_window:.5} at t = {:.3} (C2 = {:.2e}); final S = {:.6}; largest decrease over final quarter {drop:.1e}",
            row.t,
            row.c2,
            tail.last().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_derivative_checks() -> Result<(bool, String)> {
    let g = build_grid(2, 64, 128)?;
    let cfg = FlowConfig { compute_alpha: false, ..Default::default() };
    let y2 = harmonic_field(&g, 2, 0)?;
    let y3 = harmonic_field(&g, 3, 2)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (eps, tol) in [(0.04, 0.4), (0.02, 0.2), (0.01, 0.1)] {
        let u = y2.zip_map(&y3, |a, b| eps * (a + 0.3 * b));
        let s0 = flows::prepare_initial(&cfg, &Hypersurface::new(u)?)?;
        let mut errs = Vec::new();
        for target in [DerivativeTarget::L2Norm, DerivativeTarget::GradNorm] {
            let (measured, predicted) = flows::flow_derivative_check(&s0, &cfg, target)?;
            let e = rel(measured, predicted);
            ok &= e <= tol;
            errs.push(e);
        }
        parts.push(format!("eps {eps}: {:.1e}/{:.1e}", errs[0], errs[1]));
    }
    Ok((ok, format!("relative error d|u|^2/dt / d|grad u|^2/dt: {}", parts.join(", "))))
}

pub fn volume_preserving_acceptance_config() -> FlowConfig {
    FlowConfig {
        kind: FlowKind::VolumePreserving,
        n: 2,
        k: 1,
        alpha: 1.0,
        t_end: 5.0,
        diag_stride: 1,
        compute_alpha: false,
        ..Default::default()
    }
}

fn criterion_volume_preserving() -> Result<(bool, String)> {
    let g = build_grid(2, 64, 128)?;
    let m = y20_surface(&g, 0.05)?;
    let out = flows::run(&volume_preserving_acceptance_config(), &m)?;
    if let Some(e) = out.abort {
        return Err(e);
    }
    let rows = out.rows;
    let v0 = rows[0].vol;
    let t_end = rows[rows.len() - 1].t;
    let drift = rows.iter().map(|r| rel(r.vol, v0)).fold(0.0, f64::max) / t_end;
    let rise = rows.windows(2).map(|w| w[1].i_km1 - w[0].i_km1).fold(f64::NEG_INFINITY, f64::max);
    let ratio = last_in_window(&rows).and_then(|r| r.vp_ratio);
    let ok = drift <= 1e-6 && rise <= 1e-8 && ratio.is_some_and(|r| r >= 0.45);
    Ok((
        ok,
        format!(
            "volume drift {drift:.1e}/unit time; max I_0 step increase {rise:.1e}; vp_ratio in window {}",
            ratio.map_or("missing".to_string(), |r| format!("{r:.4}"))
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite(Some("nope")).is_err());
    }

    #[test]
    fn fast_criteria_pass() {
        for i in [1, 2, 5, 9] {
            let r = criterion(i);
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn stability_judgement_uses_window_and_tail() {
        let row = |t: f64, c2: f64, s: f64| DiagnosticsRow {
            t,
            i_k: 0.0,
            i_km1: 0.0,
            vol: 0.0,
            a: 1.0,
            s: Some(s),
            alpha: None,
            vp_ratio: None,
            bar: [0.0; 3],
            c0: 0.0,
            c1: 0.0,
            c2,
            cone_margin: 1.0,
            i_n: 0.0,
            bar_ok: true,
            pinching: 1.0,
            steps: 0,
            dt: 0.0,
        };
        let good = vec![row(0.0, 0.1, 1.3), row(1.0, 0.008, 1.01), row(3.0, 0.001, 1.0), row(4.0, 0.0005, 1.0)];
        assert!(judge_stability_ratio(&good).0);
        let bad = vec![row(0.0, 0.1, 1.3), row(1.0, 0.008, 0.8), row(3.0, 0.001, 1.0), row(4.0, 0.0005, 1.0)];
        assert!(!judge_stability_ratio(&bad).0);
        let noisy = vec![row(0.0, 0.1, 1.3), row(1.0, 0.008, 1.0), row(3.0, 0.001, 1.0), row(4.0, 0.0005, 0.99)];
        assert!(!judge_stability_ratio(&noisy).0);
    }
}
