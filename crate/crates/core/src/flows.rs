//! The inverse curvature flow `X_t = (sigma_{k-1}/sigma_k) nu` and the
//! volume-preserving flow `X_t = (-sigma_k^alpha + h) nu`, integrated as
//! radial PDEs `w_t = G sqrt(1 + |grad w|^2 / w^2)` with classical RK4.
//!
//! The state is kept band-limited: the right-hand side of every stage and
//! the state after every step are projected onto harmonics of degree at most
//! the band limit (half the number of latitude rings by default). This
//! removes the grid modes the harmonic basis cannot represent, which would
//! otherwise grow without damping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    self, curvature_bundle, functional_a_from_norms, CurvatureBundle, Hypersurface, Quermass,
};
use crate::harmonics;
use crate::oracle::fd_time_derivative;
use crate::spheregrid::{self, integrate_values, neumaier_sum, ScalarField};
use crate::symfun::{binomial, sigma_k_without};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Inverse,
    VolumePreserving,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub kind: FlowKind,
    pub n: usize,
    pub k: usize,
    /// Exponent of the volume-preserving speed.
    pub alpha: f64,
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_max: f64,
    pub cfl_safety: f64,
    /// Average the state over coordinate reflections after every step.
    pub symmetrize: bool,
    /// Emit a diagnostics row every this many steps.
    pub diag_stride: usize,
    /// Constant `K` of the barycenter monitor.
    pub barycenter_k: f64,
    /// Pinching constant; defaults to 0.9 times the initial minimum of
    /// `sigma_n / sigma_1^n`.
    pub pinching: Option<f64>,
    /// Harmonic band limit of the state; defaults to `n_lat / 2`.
    pub band_limit: Option<usize>,
    /// Largest admissible initial C^2 norm.
    pub c2_gate: f64,
    /// Compute the Fraenkel asymmetry in every row (the costliest column).
    pub compute_alpha: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            kind: FlowKind::Inverse,
            n: 2,
            k: 1,
            alpha: 1.0,
            t_end: 8.0,
            dt_init: 1e-3,
            dt_max: 1e-2,
            cfl_safety: 0.5,
            symmetrize: false,
            diag_stride: 10,
            barycenter_k: 10.0,
            pinching: None,
            band_limit: None,
            c2_gate: 0.3,
            compute_alpha: true,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::domain(msg));
        if !(self.n == 1 || self.n == 2) {
            return bad(format!("flows run on S^1 or S^2, got n = {}", self.n));
        }
        if self.k < 1 || self.k > self.n {
            return bad(format!("curvature order k = {} must lie in 1..={}", self.k, self.n));
        }
        if self.kind == FlowKind::VolumePreserving && !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return bad(format!("volume-preserving flow needs alpha >= 1, got {}", self.alpha));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be a finite non-negative time, got {}", self.t_end));
        }
        for (name, v) in [("dt_init", self.dt_init), ("dt_max", self.dt_max), ("cfl_safety", self.cfl_safety)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.diag_stride == 0 {
            return bad("diag_stride must be at least 1".into());
        }
        if let Some(p) = self.pinching {
            if !(p >= 0.0 && p.is_finite()) {
                return bad(format!("pinching constant must be non-negative, got {p}"));
            }
        }
        Ok(())
    }

    /// Rescaling rate `C(n,k-1)/C(n,k)` of the inverse flow.
    pub fn rate(&self) -> f64 {
        rescaling_rate(self.n, self.k)
    }
}

pub fn rescaling_rate(n: usize, k: usize) -> f64 {
    binomial(n, k as i64 - 1) / binomial(n, k as i64)
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    /// Unrescaled radial function.
    pub w: ScalarField,
    /// Last accepted step.
    pub dt: f64,
    pub steps: usize,
    pub band_limit: usize,
}

impl FlowState {
    pub fn new(w: ScalarField, config: &FlowConfig) -> Self {
        let band_limit = config.band_limit.unwrap_or_else(|| harmonics::default_lmax(w.grid()));
        FlowState { t: 0.0, w, dt: config.dt_init, steps: 0, band_limit }
    }
}

fn cone_check(m: &Hypersurface, bundle: &CurvatureBundle, k: usize) -> Result<()> {
    for (node, c) in bundle.nodes().iter().enumerate() {
        for j in 1..=k {
            if c.sigma[j] <= 0.0 {
                let (theta, phi) = m.u().grid().coords(node);
                return Err(Error::ConeExit { order: j, value: c.sigma[j], node, theta, phi });
            }
        }
    }
    Ok(())
}

/// `G = sigma_{k-1} / sigma_k`; fails at the first node outside the cone.
pub fn speed_inverse(m: &Hypersurface, bundle: &CurvatureBundle, k: usize) -> Result<Vec<f64>> {
    cone_check(m, bundle, k)?;
    Ok(bundle.nodes().iter().map(|c| c.sigma[k - 1] / c.sigma[k]).collect())
}

/// `G = -sigma_k^alpha + h` with `h` the area average of `sigma_k^alpha`.
pub fn speed_volume_preserving(
    m: &Hypersurface,
    bundle: &CurvatureBundle,
    k: usize,
    alpha: f64,
) -> Result<(Vec<f64>, f64)> {
    let integer = alpha.fract() == 0.0;
    let mut powered = Vec::with_capacity(bundle.nodes().len());
    for (node, c) in bundle.nodes().iter().enumerate() {
        let s = c.sigma[k];
        if s < 0.0 && !integer {
            let (theta, phi) = m.u().grid().coords(node);
            return Err(Error::domain(format!(
                "sigma_{k} = {s:e} < 0 with non-integer alpha = {alpha} at node {node} (theta = {theta:.6}, phi = {phi:.6})"
            )));
        }
        powered.push(if integer { s.powi(alpha as i32) } else { s.powf(alpha) });
    }
    let wts = m.u().grid().weights();
    let area = neumaier_sum(wts.iter().zip(bundle.nodes()).map(|(wt, c)| wt * c.area_element));
    let total = neumaier_sum(wts.iter().zip(bundle.nodes()).zip(&powered).map(|((wt, c), p)| wt * c.area_element * p));
    let h = total / area;
    Ok((powered.iter().map(|p| h - p).collect(), h))
}

/// `w_t = G sqrt(1 + |grad w|^2 / w^2) = G D / w`.
pub fn radial_rhs(g: &[f64], m: &Hypersurface, bundle: &CurvatureBundle) -> Result<ScalarField> {
    let vals = g
        .iter()
        .zip(bundle.nodes())
        .zip(m.u().values())
        .map(|((g, c), u)| g * c.d / (1.0 + u))
        .collect();
    ScalarField::new(m.u().grid_arc().clone(), vals)
}

/// Speed and the largest `|dG/dkappa_i|` at every node.
fn speed_with_sensitivity(m: &Hypersurface, bundle: &CurvatureBundle, cfg: &FlowConfig) -> Result<(Vec<f64>, f64)> {
    let k = cfg.k;
    let g = match cfg.kind {
        FlowKind::Inverse => speed_inverse(m, bundle, k)?,
        FlowKind::VolumePreserving => speed_volume_preserving(m, bundle, k, cfg.alpha)?.0,
    };
    let mut deff = 0.0f64;
    for (node, c) in bundle.nodes().iter().enumerate() {
        let kap = bundle.kappa(node);
        let w = 1.0 + m.u().values()[node];
        for i in 0..kap.len() {
            let dk = sigma_k_without(kap, i, k - 1);
            let dkm1 = if k >= 2 { sigma_k_without(kap, i, k - 2) } else { 0.0 };
            let dg = match cfg.kind {
                FlowKind::Inverse => (dkm1 * c.sigma[k] - c.sigma[k - 1] * dk) / (c.sigma[k] * c.sigma[k]),
                FlowKind::VolumePreserving => -cfg.alpha * c.sigma[k].abs().powf(cfg.alpha - 1.0) * dk,
            };
            deff = deff.max(dg.abs() / (w * w));
        }
    }
    Ok((g, deff))
}

/// Band-limited `w_t` and the effective diffusion coefficient.
fn evaluate(w: &ScalarField, cfg: &FlowConfig, band: usize) -> Result<(ScalarField, f64)> {
    let m = Hypersurface::from_radius(w)?;
    let bundle = curvature_bundle(&m)?;
    let (g, deff) = speed_with_sensitivity(&m, &bundle, cfg)?;
    let rhs = radial_rhs(&g, &m, &bundle)?;
    Ok((harmonics::project(&rhs, band)?, deff))
}

/// Largest stable RK4 step for the band-limited parabolic problem: the
/// stiffest mode has eigenvalue about `deff * L(L+n-1)` and RK4 is stable
/// on the negative real axis up to 2.78.
fn cfl_limit(cfg: &FlowConfig, band: usize, deff: f64) -> f64 {
    let lf = band as f64;
    let lambda = lf * (lf + cfg.n as f64 - 1.0);
    if deff * lambda <= 0.0 {
        f64::INFINITY
    } else {
        cfg.cfl_safety * 2.78 / (deff * lambda)
    }
}

fn axpy(a: &ScalarField, s: f64, b: &ScalarField) -> Result<ScalarField> {
    ScalarField::new(a.grid_arc().clone(), a.values().iter().zip(b.values()).map(|(x, y)| x + s * y).collect())
}

fn rk4(state: &FlowState, cfg: &FlowConfig, k1: &ScalarField, dt: f64) -> Result<ScalarField> {
    let band = state.band_limit;
    let k2 = evaluate(&axpy(&state.w, 0.5 * dt, k1)?, cfg, band)?.0;
    let k3 = evaluate(&axpy(&state.w, 0.5 * dt, &k2)?, cfg, band)?.0;
    let k4 = evaluate(&axpy(&state.w, dt, &k3)?, cfg, band)?.0;
    let vals = state
        .w
        .values()
        .iter()
        .enumerate()
        .map(|(i, w)| w + dt / 6.0 * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i]))
        .collect();
    let next = ScalarField::new(state.w.grid_arc().clone(), vals)?;
    let mut next = harmonics::project(&next, band)?;
    if cfg.symmetrize {
        next = spheregrid::symmetrize(&next);
    }
    if let Some(node) = next.values().iter().position(|&v| v <= 0.0) {
        let (theta, phi) = next.grid().coords(node);
        return Err(Error::NonFinite { quantity: "radius (non-positive)", node, theta, phi });
    }
    Ok(next)
}

/// One RK4 step of at most `dt_cap`, limited by the CFL bound, by growth of
/// at most a factor 2 over the previous step, and by `t_end`.
pub fn step(state: &FlowState, cfg: &FlowConfig) -> Result<FlowState> {
    let (k1, deff) = evaluate(&state.w, cfg, state.band_limit)?;
    let dt = cfg
        .dt_max
        .min(cfl_limit(cfg, state.band_limit, deff))
        .min(2.0 * state.dt)
        .min(cfg.t_end - state.t);
    if !(dt > 1e-12 * state.t.max(1.0)) {
        return Err(Error::StepUnderflow { t: state.t, dt });
    }
    let w = rk4(state, cfg, &k1, dt)?;
    Ok(FlowState { t: state.t + dt, w, dt, steps: state.steps + 1, band_limit: state.band_limit })
}

/// Step of exactly `dt` (still refused beyond the stability bound).
pub fn step_fixed(state: &FlowState, cfg: &FlowConfig, dt: f64) -> Result<FlowState> {
    let (k1, deff) = evaluate(&state.w, cfg, state.band_limit)?;
    if dt > cfl_limit(cfg, state.band_limit, deff) / cfg.cfl_safety {
        return Err(Error::domain(format!("fixed step {dt} exceeds the RK4 stability bound")));
    }
    let w = rk4(state, cfg, &k1, dt)?;
    Ok(FlowState { t: state.t + dt, w, dt, steps: state.steps + 1, band_limit: state.band_limit })
}

/// The surface whose diagnostics are reported: `e^{-rt} w` for the inverse
/// flow, `w` itself for the volume-preserving flow.
pub fn rescale(state: &FlowState, cfg: &FlowConfig) -> Result<Hypersurface> {
    match cfg.kind {
        FlowKind::Inverse => {
            let s = (-cfg.rate() * state.t).exp();
            Hypersurface::new(state.w.map(|w| s * w - 1.0))
        }
        FlowKind::VolumePreserving => Hypersurface::from_radius(&state.w),
    }
}

/// One time sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub i_k: f64,
    pub i_km1: f64,
    pub vol: f64,
    pub a: f64,
    /// Stability ratio; missing when `A` vanishes.
    pub s: Option<f64>,
    pub alpha: Option<f64>,
    pub vp_ratio: Option<f64>,
    pub bar: [f64; 3],
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub cone_margin: f64,
    /// `I_2` (Gauss-Bonnet monitor on S^2).
    pub i_n: f64,
    /// Whether `|bar| <= K C2 ||u||_{W^{2,2}}^2`.
    pub bar_ok: bool,
    /// Minimum over nodes of `sigma_n / sigma_1^n`.
    pub pinching: f64,
    pub steps: usize,
    pub dt: f64,
}

/// Everything a run produced, including rows emitted before an abort.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<DiagnosticsRow>,
    pub abort: Option<Error>,
    pub warnings: Vec<String>,
    pub final_state: FlowState,
}

fn pinching_ratio(bundle: &CurvatureBundle) -> f64 {
    let n = bundle.n() as i32;
    bundle
        .nodes()
        .iter()
        .map(|c| c.sigma[n as usize] / c.sigma[1].powi(n))
        .fold(f64::INFINITY, f64::min)
}

pub fn diagnostics(state: &FlowState, cfg: &FlowConfig) -> Result<DiagnosticsRow> {
    let m = rescale(state, cfg)?;
    let bundle = curvature_bundle(&m)?;
    let q = Quermass::compute(&m, &bundle);
    let n = cfg.n;
    let k = cfg.k as i64;
    let (l2, grad, lap) = m.sobolev_quadrature();
    let norms = m.sup_norms();
    let a = functional_a_from_norms(n, cfg.k, l2, grad);
    let s = if a > 1e-20 { Some(q.deficit_parts(k, k - 1)?.0 / a) } else { None };
    let vp_ratio = match cfg.kind {
        FlowKind::VolumePreserving if l2 > 1e-24 => Some(q.deficit_parts(k - 1, -1)?.0 / l2),
        _ => None,
    };
    let hess_sq = spheregrid::integrate(&m.jet().hessian().norm_sq());
    let bar = geometry::barycenter(&m);
    let bar_norm = bar.iter().map(|b| b * b).sum::<f64>().sqrt();
    let alpha = if cfg.compute_alpha { Some(geometry::fraenkel_asymmetry(&m)?.alpha) } else { None };
    let _ = lap;
    Ok(DiagnosticsRow {
        t: state.t,
        i_k: q.get(k),
        i_km1: q.get(k - 1),
        vol: q.get(-1),
        a,
        s,
        alpha,
        vp_ratio,
        bar,
        c0: norms.c0,
        c1: norms.c1,
        c2: norms.c2,
        cone_margin: bundle.cone_margin(cfg.k),
        i_n: q.get(n as i64),
        bar_ok: bar_norm <= cfg.barycenter_k * norms.c2 * (l2 + grad + hess_sq) + 1e-14,
        pinching: pinching_ratio(&bundle),
        steps: state.steps,
        dt: state.dt,
    })
}

/// Band-limits, optionally symmetrizes, and normalizes an initial surface
/// (`I_{k-1}` for the inverse flow, the volume otherwise).
pub fn prepare_initial(cfg: &FlowConfig, initial: &Hypersurface) -> Result<FlowState> {
    cfg.validate()?;
    if initial.n() != cfg.n {
        return Err(Error::domain(format!("surface lives on S^{} but the flow is configured for n = {}", initial.n(), cfg.n)));
    }
    let w = initial.radius();
    let band = cfg.band_limit.unwrap_or_else(|| harmonics::default_lmax(w.grid()));
    if band > harmonics::max_lmax(w.grid()) {
        return Err(Error::domain(format!("band limit {band} exceeds grid capacity {}", harmonics::max_lmax(w.grid()))));
    }
    let mut w = harmonics::project(&w, band)?;
    if cfg.symmetrize {
        w = spheregrid::symmetrize(&w);
    }
    let m = Hypersurface::from_radius(&w)?;
    let j = match cfg.kind {
        FlowKind::Inverse => cfg.k as i64 - 1,
        FlowKind::VolumePreserving => -1,
    };
    let m = geometry::normalize_quermass(&m, j)?;
    let c2 = m.sup_norms().c2;
    if c2 > cfg.c2_gate {
        return Err(Error::domain(format!(
            "initial surface is not nearly spherical: C2 = {c2:.4} exceeds the gate {}",
            cfg.c2_gate
        )));
    }
    let bundle = curvature_bundle(&m)?;
    if cfg.kind == FlowKind::Inverse {
        cone_check(&m, &bundle, cfg.k)?;
    }
    let mut state = FlowState::new(m.radius(), cfg);
    state.band_limit = band;
    Ok(state)
}

/// Integrates from `initial` to `t_end`. Errors before the first step are
/// returned directly; numerical failures later end the run with the rows
/// gathered so far and the error in `abort`.
pub fn run(cfg: &FlowConfig, initial: &Hypersurface) -> Result<RunOutput> {
    let mut state = prepare_initial(cfg, initial)?;
    let mut warnings = Vec::new();
    let first = diagnostics(&state, cfg)?;
    let pinch = match cfg.kind {
        FlowKind::VolumePreserving => Some(cfg.pinching.unwrap_or(0.9 * first.pinching)),
        FlowKind::Inverse => None,
    };
    let mut rows = vec![first];
    let mut abort = None;
    let mut pinch_warned = false;
    let mut bar_warned = false;
    while state.t < cfg.t_end {
        match step(&state, cfg) {
            Ok(next) => state = next,
            Err(e) => {
                abort = Some(e);
                break;
            }
        }
        let last = state.t >= cfg.t_end;
        if state.steps % cfg.diag_stride == 0 || last {
            match diagnostics(&state, cfg) {
                Ok(row) => {
                    if let Some(cp) = pinch {
                        if !pinch_warned && !(row.pinching > cp) {
                            warnings.push(format!("pinching condition violated at t = {:.6}: {:.6} <= {cp:.6}", row.t, row.pinching));
                            pinch_warned = true;
                        }
                    }
                    if !bar_warned && !row.bar_ok {
                        warnings.push(format!("barycenter condition violated at t = {:.6}", row.t));
                        bar_warned = true;
                    }
                    rows.push(row);
                }
                Err(e) => {
                    abort = Some(e);
                    break;
                }
            }
        }
    }
    Ok(RunOutput { rows, abort, warnings, final_state: state })
}

/// Quantity whose time derivative is compared with its closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeTarget {
    /// `int sigma_m dmu` of the unrescaled surface; predicted
    /// `(m+1) int sigma_{m+1} G dmu`.
    Quermass(usize),
    /// `int sigma_m dmu` of the rescaled surface (inverse flow).
    RescaledQuermass(usize),
    /// `||u||^2`: `-(2/n) r ||grad u||^2` (inverse) or
    /// `2 (k/n) C(n,k) int (n u^2 - |grad u|^2)` (volume preserving).
    L2Norm,
    /// `||grad u||^2`: `-(2/n) r ||Lap u||^2` (inverse flow only).
    GradNorm,
    /// `I_{k-1}` along the volume-preserving flow:
    /// `-k int (sigma_k - h^{1/alpha})(sigma_k^alpha - h) dmu`.
    VpQuermass,
}

fn target_value(state: &FlowState, cfg: &FlowConfig, target: DerivativeTarget) -> Result<f64> {
    Ok(match target {
        DerivativeTarget::Quermass(m) => {
            let s = Hypersurface::from_radius(&state.w)?;
            geometry::quermass_integral(&s, m as i64)?
        }
        DerivativeTarget::RescaledQuermass(m) => geometry::quermass_integral(&rescale(state, cfg)?, m as i64)?,
        DerivativeTarget::L2Norm => rescale(state, cfg)?.sobolev_quadrature().0,
        DerivativeTarget::GradNorm => rescale(state, cfg)?.sobolev_quadrature().1,
        DerivativeTarget::VpQuermass => {
            let s = Hypersurface::from_radius(&state.w)?;
            geometry::quermass_integral(&s, cfg.k as i64 - 1)?
        }
    })
}

fn target_prediction(state: &FlowState, cfg: &FlowConfig, target: DerivativeTarget) -> Result<f64> {
    let n = cfg.n;
    let k = cfg.k;
    let phys = Hypersurface::from_radius(&state.w)?;
    let bundle = curvature_bundle(&phys)?;
    let (g, _) = speed_with_sensitivity(&phys, &bundle, cfg)?;
    let grid = phys.u().grid();
    let dmu: Vec<f64> = bundle.area_element();
    let sig = |m: usize| -> Vec<f64> { bundle.sigma(m) };
    let int_with = |vals: Vec<f64>| -> f64 {
        integrate_values(grid, &vals.iter().zip(&dmu).map(|(v, a)| v * a).collect::<Vec<_>>())
    };
    let r = cfg.rate();
    match target {
        DerivativeTarget::Quermass(m) => {
            let s1 = sig(m + 1);
            Ok((m as f64 + 1.0) * int_with(s1.iter().zip(&g).map(|(s, g)| s * g).collect()))
        }
        DerivativeTarget::RescaledQuermass(m) => {
            if cfg.kind != FlowKind::Inverse {
                return Err(Error::domain("rescaled quermassintegrals belong to the inverse flow"));
            }
            let s1 = sig(m + 1);
            let raw = (m as f64 + 1.0) * int_with(s1.iter().zip(&g).map(|(s, g)| s * g).collect())
                - (n as f64 - m as f64) * r * int_with(sig(m));
            Ok((-(n as f64 - m as f64) * r * state.t).exp() * raw)
        }
        DerivativeTarget::L2Norm => {
            let (l2, grad, _) = rescale(state, cfg)?.sobolev_quadrature();
            Ok(match cfg.kind {
                FlowKind::Inverse => -2.0 / n as f64 * r * grad,
                FlowKind::VolumePreserving => {
                    2.0 * (k as f64 / n as f64) * binomial(n, k as i64) * (n as f64 * l2 - grad)
                }
            })
        }
        DerivativeTarget::GradNorm => {
            if cfg.kind != FlowKind::Inverse {
                return Err(Error::domain("the gradient-norm rate is only stated for the inverse flow"));
            }
            let (_, _, lap) = rescale(state, cfg)?.sobolev_quadrature();
            Ok(-2.0 / n as f64 * r * lap)
        }
        DerivativeTarget::VpQuermass => {
            if cfg.kind != FlowKind::VolumePreserving {
                return Err(Error::domain("this rate belongs to the volume-preserving flow"));
            }
            let (_, h) = speed_volume_preserving(&phys, &bundle, k, cfg.alpha)?;
            let hroot = h.powf(1.0 / cfg.alpha);
            let sk = sig(k);
            Ok(-(k as f64)
                * int_with(sk.iter().map(|s| (s - hroot) * (s.powf(cfg.alpha) - h)).collect()))
        }
    }
}

/// Centered time difference of a target quantity around `t + dt_init`,
/// from two fixed steps of `config.dt_init`, and the closed-form rate
/// evaluated at that time.
pub fn flow_derivative_check(state: &FlowState, cfg: &FlowConfig, target: DerivativeTarget) -> Result<(f64, f64)> {
    let d = cfg.dt_init;
    let s1 = step_fixed(state, cfg, d)?;
    let s2 = step_fixed(&s1, cfg, d)?;
    let samples = [
        (state.t, target_value(state, cfg, target)?),
        (s1.t, target_value(&s1, cfg, target)?),
        (s2.t, target_value(&s2, cfg, target)?),
    ];
    let measured = fd_time_derivative(&samples, s1.t)?;
    let predicted = target_prediction(&s1, cfg, target)?;
    Ok((measured, predicted))
}
