//! Extrinsic geometry of radial graphs `M = {(1 + u(x)) x : x in S^n}` and
//! the integral quantities built from it.
//!
//! Tensors at a node are expressed in the orthonormal frame of the round
//! sphere, so the round metric is the identity there. With `w = 1 + u`,
//! `p = grad u` and `D = sqrt(|p|^2 + w^2)`:
//!
//! * induced metric `g = w^2 I + p p^T`, inverse `(I - p p^T / D^2) / w^2`;
//! * shape operator
//!   `h = I/D - Hu/(w D) + p (p^T Hu)/(w D^3) + p p^T / D^3`;
//! * area element `w^(n-1) D`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spheregrid::{self, integrate_values, neumaier_sum, sphere_area, Jet, ScalarField, SupNorms};
use crate::symfun::binomial;

/// A starshaped radial graph over the unit sphere.
#[derive(Debug, Clone)]
pub struct Hypersurface {
    u: ScalarField,
    jet: Jet,
}

impl Hypersurface {
    /// Fails unless `1 + u > 0` at every node.
    pub fn new(u: ScalarField) -> Result<Self> {
        if let Some(node) = u.values().iter().position(|&v| v <= -1.0) {
            let (theta, phi) = u.grid().coords(node);
            return Err(Error::domain(format!(
                "surface is not starshaped: 1 + u = {:e} at node {node} (theta = {theta:.6}, phi = {phi:.6})",
                1.0 + u.values()[node]
            )));
        }
        let jet = spheregrid::jet(&u)?;
        Ok(Hypersurface { u, jet })
    }

    /// Surface with radial function `w` (so `u = w - 1`).
    pub fn from_radius(w: &ScalarField) -> Result<Self> {
        Hypersurface::new(w.map(|v| v - 1.0))
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn radius(&self) -> ScalarField {
        self.u.map(|v| 1.0 + v)
    }

    pub fn jet(&self) -> &Jet {
        &self.jet
    }

    pub fn n(&self) -> usize {
        self.u.grid().n()
    }

    /// `lambda * M`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("dilation factor must be positive, got {lambda}")));
        }
        Hypersurface::new(self.u.map(|v| lambda * (1.0 + v) - 1.0))
    }

    pub fn sup_norms(&self) -> SupNorms {
        spheregrid::sup_norms_from_jet(&self.jet)
    }

    /// `(||u||^2, ||grad u||^2, ||Lap u||^2)` in L^2 of the round sphere.
    pub fn sobolev_quadrature(&self) -> (f64, f64, f64) {
        let g = self.u.grid();
        let u = self.u.values();
        let l2 = integrate_values(g, &u.iter().map(|v| v * v).collect::<Vec<_>>());
        let grad = spheregrid::integrate(&self.jet.gradient().norm_sq());
        let lap = spheregrid::integrate(&self.jet.laplacian().map(|v| v * v));
        (l2, grad, lap)
    }
}

/// Curvature data at one node. Unused slots are zero when `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCurvature {
    pub d: f64,
    pub metric: [[f64; 2]; 2],
    pub metric_inv: [[f64; 2]; 2],
    pub shape: [[f64; 2]; 2],
    /// Principal curvatures, descending.
    pub kappa: [f64; 2],
    /// `sigma_0..sigma_2` of the principal curvatures.
    pub sigma: [f64; 3],
    pub area_element: f64,
    /// `sigma_k * area_element - C(n,k)`, expanded so that nearly round
    /// surfaces lose no digits to cancellation.
    pub excess: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    n: usize,
    nodes: Vec<NodeCurvature>,
}

impl CurvatureBundle {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn nodes(&self) -> &[NodeCurvature] {
        &self.nodes
    }
    /// `sigma_k` per node (zero for `k > n`).
    pub fn sigma(&self, k: usize) -> Vec<f64> {
        self.nodes.iter().map(|c| if k <= self.n { c.sigma[k] } else { 0.0 }).collect()
    }
    pub fn area_element(&self) -> Vec<f64> {
        self.nodes.iter().map(|c| c.area_element).collect()
    }
    /// Principal curvatures of a node as a slice of length `n`.
    pub fn kappa(&self, node: usize) -> &[f64] {
        &self.nodes[node].kappa[..self.n]
    }
    /// `min over nodes, 1 <= j <= k` of `sigma_j`.
    pub fn cone_margin(&self, k: usize) -> f64 {
        self.nodes
            .iter()
            .flat_map(|c| (1..=k.min(self.n)).map(move |j| c.sigma[j]))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn curvature_bundle(m: &Hypersurface) -> Result<CurvatureBundle> {
    let n = m.n();
    let grid = m.u().grid();
    let mut nodes = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let j = m.jet().local(node);
        let c = node_curvature(n, j.value, j.grad, j.hess);
        if !(c.d.is_finite() && c.sigma.iter().all(|v| v.is_finite()) && c.area_element.is_finite()) {
            let (theta, phi) = grid.coords(node);
            return Err(Error::NonFinite { quantity: "curvature", node, theta, phi });
        }
        nodes.push(c);
    }
    Ok(CurvatureBundle { n, nodes })
}

/// Curvature of the radial graph from the orthonormal-frame jet of `u`.
pub fn node_curvature(n: usize, u: f64, p: [f64; 2], hu: [[f64; 2]; 2]) -> NodeCurvature {
    let w = 1.0 + u;
    if n == 1 {
        let pp = p[0];
        let d = (pp * pp + w * w).sqrt();
        let d3 = d * d * d;
        let h = 1.0 / d - hu[0][0] / (w * d) + pp * pp * hu[0][0] / (w * d3) + pp * pp / d3;
        return NodeCurvature {
            d,
            metric: [[w * w + pp * pp, 0.0], [0.0, 0.0]],
            metric_inv: [[(1.0 - pp * pp / (d * d)) / (w * w), 0.0], [0.0, 0.0]],
            shape: [[h, 0.0], [0.0, 0.0]],
            kappa: [h, 0.0],
            sigma: [1.0, h, 0.0],
            area_element: d,
            excess: [pp * pp / (d + w) + u, (pp * pp - w * hu[0][0]) / (d * d), 0.0],
        };
    }
    let psq = p[0] * p[0] + p[1] * p[1];
    let d = (psq + w * w).sqrt();
    let d2 = d * d;
    let d3 = d2 * d;
    let ph = [p[0] * hu[0][0] + p[1] * hu[1][0], p[0] * hu[0][1] + p[1] * hu[1][1]];
    let mut shape = [[0.0; 2]; 2];
    let mut metric = [[0.0; 2]; 2];
    let mut metric_inv = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let delta = if i == j { 1.0 } else { 0.0 };
            shape[i][j] = delta / d - hu[i][j] / (w * d) + p[i] * ph[j] / (w * d3) + p[i] * p[j] / d3;
            metric[i][j] = w * w * delta + p[i] * p[j];
            metric_inv[i][j] = (delta - p[i] * p[j] / d2) / (w * w);
        }
    }
    let tr = shape[0][0] + shape[1][1];
    let det = shape[0][0] * shape[1][1] - shape[0][1] * shape[1][0];
    let half = 0.5 * tr;
    // stable at umbilic points, unlike (tr/2)^2 - det
    let skew = 0.5 * (shape[0][0] - shape[1][1]);
    let disc = (skew * skew + shape[0][1] * shape[1][0]).max(0.0).sqrt();
    NodeCurvature {
        d,
        metric,
        metric_inv,
        shape,
        kappa: [half + disc, half - disc],
        sigma: [1.0, tr, det],
        area_element: w * d,
        excess: [
            w * psq / (d + w) + u * (2.0 + u),
            2.0 * u - (hu[0][0] + hu[1][1]) + (p[0] * ph[0] + p[1] * ph[1] + w * psq) / d2,
            det * w * d - 1.0,
        ],
    }
}

/// `I_k` of the unit ball: `C(n,k)|S^n|` for `k >= 0`, the volume for `k = -1`.
pub fn unit_ball_quermass(n: usize, k: i64) -> f64 {
    if k < 0 {
        sphere_area(n) / (n as f64 + 1.0)
    } else {
        binomial(n, k) * sphere_area(n)
    }
}

fn check_order(n: usize, k: i64) -> Result<()> {
    if k < -1 || k > n as i64 {
        return Err(Error::domain(format!("quermassintegral order {k} outside -1..={n}")));
    }
    Ok(())
}

/// All quermassintegrals of a surface, with their excess over the unit
/// ball computed without cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct Quermass {
    n: usize,
    /// `I_{-1}..I_n`.
    pub values: Vec<f64>,
    /// `I_k - I_k(B)` for `k = -1..n`.
    pub excess: Vec<f64>,
}

impl Quermass {
    pub fn compute(m: &Hypersurface, bundle: &CurvatureBundle) -> Self {
        let n = m.n();
        let grid = m.u().grid();
        let wts = grid.weights();
        let u = m.u().values();
        let np1 = n as f64 + 1.0;
        let mut values = Vec::with_capacity(n + 2);
        let mut excess = Vec::with_capacity(n + 2);
        let vol_ex = neumaier_sum(wts.iter().zip(u).map(|(wt, &v)| wt * (np1 * v.ln_1p()).exp_m1())) / np1;
        excess.push(vol_ex);
        values.push(unit_ball_quermass(n, -1) + vol_ex);
        for k in 0..=n {
            let ex = neumaier_sum(
                wts.iter().zip(bundle.nodes()).map(|(wt, c)| wt * c.excess[k]),
            );
            excess.push(ex);
            values.push(unit_ball_quermass(n, k as i64) + ex);
        }
        Quermass { n, values, excess }
    }

    pub fn get(&self, k: i64) -> f64 {
        self.values[(k + 1) as usize]
    }

    pub fn excess(&self, k: i64) -> f64 {
        self.excess[(k + 1) as usize]
    }

    /// `ln R` of the centered ball `B_R` with `I_m(B_R) = I_m`.
    pub fn matched_log_radius(&self, m: i64) -> Result<f64> {
        let n = self.n as i64;
        if m < -1 || m >= n {
            return Err(Error::domain(format!("reference order m = {m} must satisfy -1 <= m < {n}")));
        }
        let ratio = self.excess(m) / unit_ball_quermass(self.n, m);
        if !(ratio > -1.0) || !ratio.is_finite() {
            return Err(Error::domain(format!("I_{m} = {:e} is not positive", self.get(m))));
        }
        Ok(ratio.ln_1p() / (n - m) as f64)
    }

    /// `I_k - I_k(B_{Omega,m})` and `I_k(B_{Omega,m})`.
    pub fn deficit_parts(&self, k: i64, m: i64) -> Result<(f64, f64)> {
        let n = self.n as i64;
        if !(m >= -1 && m < k && k <= n && k > -1) {
            return Err(Error::domain(format!("deficit needs -1 <= m < k <= n, got k = {k}, m = {m}")));
        }
        let rho = self.matched_log_radius(m)?;
        let ik_b = unit_ball_quermass(self.n, k);
        let p = (n - k) as f64 * rho;
        Ok((self.excess(k) - ik_b * p.exp_m1(), ik_b * p.exp()))
    }

    /// `delta_{k,m}`.
    pub fn deficit(&self, k: i64, m: i64) -> Result<f64> {
        let (num, den) = self.deficit_parts(k, m)?;
        Ok(num / den)
    }
}

/// `I_k(Omega)`; `k = -1` is the volume.
pub fn quermass_integral(m: &Hypersurface, k: i64) -> Result<f64> {
    check_order(m.n(), k)?;
    if k == -1 {
        return Ok(volume(m));
    }
    let bundle = curvature_bundle(m)?;
    Ok(Quermass::compute(m, &bundle).get(k))
}

/// `I_{-1}..I_n` in one pass.
pub fn quermass_integrals(m: &Hypersurface) -> Result<Quermass> {
    let bundle = curvature_bundle(m)?;
    Ok(Quermass::compute(m, &bundle))
}

/// `(1/(n+1)) int w^(n+1)`.
pub fn volume(m: &Hypersurface) -> f64 {
    let np1 = m.n() as i32 + 1;
    let vals: Vec<f64> = m.u().values().iter().map(|v| (1.0 + v).powi(np1) / np1 as f64).collect();
    integrate_values(m.u().grid(), &vals)
}

/// `(1/|S^n|) int w^(n+2) x`.
pub fn barycenter(m: &Hypersurface) -> [f64; 3] {
    let grid = m.u().grid();
    // the sphere itself contributes int x = 0; dropping it keeps nearly
    // symmetric surfaces from picking up roundoff of order one
    let e = m.n() as f64 + 2.0;
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        *o = neumaier_sum(
            grid.weights()
                .iter()
                .zip(m.u().values())
                .zip(grid.positions())
                .map(|((wt, v), x)| wt * (e * v.ln_1p()).exp_m1() * x[c]),
        ) / grid.sphere_area();
    }
    out
}

/// `|Omega symmetric-difference B|` for the centered unit ball, integrated
/// exactly along rays: `(1/(n+1)) int |w^(n+1) - 1|`.
pub fn symmetric_difference_centered(m: &Hypersurface) -> f64 {
    let np1 = m.n() as f64 + 1.0;
    let vals: Vec<f64> = m.u().values().iter().map(|&v| (np1 * v.ln_1p()).exp_m1().abs() / np1).collect();
    integrate_values(m.u().grid(), &vals)
}

/// `sum_k C(n+1,k)/(n+1) int |u|^k`. Equals the centered symmetric
/// difference when `u >= 0` and bounds it from above otherwise.
pub fn symmetric_difference_series(m: &Hypersurface) -> f64 {
    let n = m.n();
    let np1 = n as f64 + 1.0;
    let vals: Vec<f64> = m
        .u()
        .values()
        .iter()
        .map(|v| (1..=n + 1).map(|k| binomial(n + 1, k as i64) * v.abs().powi(k as i32)).sum::<f64>() / np1)
        .collect();
    integrate_values(m.u().grid(), &vals)
}

/// Result of the Fraenkel minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub alpha: f64,
    pub center: [f64; 3],
    /// False when the simplex search hit its iteration cap.
    pub converged: bool,
}

/// Per-node data for the overlap `|Omega cap (x + B_Omega)|`.
///
/// Along each ray the overlap integrand is `min(w, t)^(n+1)` with `t` the
/// distance to the translated sphere. The kink where `w = t` is averaged
/// over the quadrature cell using the local slope of `w - t`; otherwise the
/// objective is blind to the crossing curve below grid scale.
struct OverlapProblem<'a> {
    n: usize,
    w: Vec<f64>,
    grad: Vec<[f64; 2]>,
    frame: Vec<[[f64; 3]; 2]>,
    cell: Vec<[f64; 2]>,
    weights: &'a [f64],
    positions: &'a [[f64; 3]],
    vol: f64,
    radius: f64,
    limit: f64,
}

impl<'a> OverlapProblem<'a> {
    fn new(m: &'a Hypersurface) -> Self {
        let n = m.n();
        let grid = m.u().grid();
        let vol = volume(m);
        let radius = ((n as f64 + 1.0) * vol / grid.sphere_area()).powf(1.0 / (n as f64 + 1.0));
        let w: Vec<f64> = m.u().values().iter().map(|v| 1.0 + v).collect();
        let wmin = w.iter().copied().fold(f64::INFINITY, f64::min);
        let grad = (0..grid.len()).map(|i| m.jet().local(i).grad).collect();
        let nl = grid.n_lon();
        let dphi = 2.0 * std::f64::consts::PI / nl as f64;
        let mut frame = Vec::with_capacity(grid.len());
        let mut cell = Vec::with_capacity(grid.len());
        for node in 0..grid.len() {
            let (t, p) = grid.coords(node);
            let (sp, cp) = p.sin_cos();
            if n == 1 {
                frame.push([[-sp, cp, 0.0], [0.0; 3]]);
                cell.push([dphi, 0.0]);
            } else {
                let (st, ct) = t.sin_cos();
                frame.push([[ct * cp, ct * sp, -st], [-sp, cp, 0.0]]);
                cell.push([grid.lat_weights()[node / nl] / st, st * dphi]);
            }
        }
        OverlapProblem {
            n,
            w,
            grad,
            frame,
            cell,
            weights: grid.weights(),
            positions: grid.positions(),
            vol,
            radius,
            limit: wmin.min(radius),
        }
    }

    /// `|Omega sym-diff (x + B_Omega)| / |B_Omega|`.
    fn alpha(&self, x: &[f64]) -> f64 {
        let mut c = [0.0; 3];
        c[..x.len()].copy_from_slice(x);
        let c2: f64 = c.iter().map(|v| v * v).sum();
        if c2.sqrt() >= self.limit {
            return 2.0 + c2.sqrt();
        }
        let np1 = self.n as i32 + 1;
        let r2 = self.radius * self.radius;
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let overlap = neumaier_sum((0..self.w.len()).map(|i| {
            let p = &self.positions[i];
            let w = self.w[i];
            let b = dot(p, &c);
            let root = (b * b - c2 + r2).sqrt();
            let t = b + root;
            let factor = 1.0 + b / root;
            let mut spread = 0.0;
            for a in 0..self.n {
                let slope = self.grad[i][a] - factor * dot(&self.frame[i][a], &c);
                spread += slope.abs() * self.cell[i][a];
            }
            let tp = t.powi(np1);
            let e0 = w.powi(np1) - tp;
            let se = np1 as f64 * w.max(t).powi(np1 - 1) * spread;
            self.weights[i] * (tp + smoothed_negative_part(e0, se))
        })) / np1 as f64;
        (2.0 * (self.vol - overlap) / self.vol).max(0.0)
    }
}

/// Mean of `min(0, e)` for `e` uniform on `[e0 - s/2, e0 + s/2]`.
fn smoothed_negative_part(e0: f64, s: f64) -> f64 {
    if e0 >= 0.5 * s {
        0.0
    } else if e0 <= -0.5 * s {
        e0
    } else {
        let d = e0 - 0.5 * s;
        -d * d / (2.0 * s)
    }
}

/// Nelder-Mead simplex minimization. Returns `(x, f(x), converged)`.
pub fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
    xtol: f64,
) -> (Vec<f64>, f64, bool) {
    let d = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut converged = false;
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fv = order.iter().map(|&i| fv[i]).collect();
        let spread = fv[d] - fv[0];
        let diam = simplex[1..]
            .iter()
            .map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= ftol && diam <= xtol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..d).map(|j| simplex[..d].iter().map(|x| x[j]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|j| centroid[j] + t * (simplex[d][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < fv[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[d] = xe;
                fv[d] = fe;
            } else {
                simplex[d] = xr;
                fv[d] = fr;
            }
        } else if fr < fv[d - 1] {
            simplex[d] = xr;
            fv[d] = fr;
        } else {
            let (xc, fc) = if fr < fv[d] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < fv[d].min(fr) {
                simplex[d] = xc;
                fv[d] = fc;
            } else {
                for i in 1..=d {
                    let xi: Vec<f64> = (0..d).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
                    fv[i] = f(&xi);
                    simplex[i] = xi;
                }
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| fv[a].total_cmp(&fv[b])).unwrap_or(0);
    (simplex[best].clone(), fv[best], converged)
}

/// Fraenkel asymmetry: minimum over centers `x` of
/// `|Omega sym-diff (x + B_Omega)| / |B_Omega|`, with `B_Omega` the ball
/// of equal volume.
pub fn fraenkel_asymmetry(m: &Hypersurface) -> Result<Asymmetry> {
    let n = m.n();
    let grid = m.u().grid();
    let dim = n + 1;
    let prob = OverlapProblem::new(m);
    let vol = prob.vol;
    let wmin = prob.w.iter().copied().fold(f64::INFINITY, f64::min);
    let f = |x: &[f64]| prob.alpha(x);

    let origin = vec![0.0; dim];
    let mut best_x = origin.clone();
    let mut best_f = f(&origin);
    // centroid of the enclosed region
    let bar = barycenter(m);
    let centroid: Vec<f64> =
        bar[..dim].iter().map(|b| b * grid.sphere_area() / ((n as f64 + 2.0) * vol)).collect();
    let fc = f(&centroid);
    if fc < best_f {
        best_f = fc;
        best_x = centroid;
    }
    let h = 0.5 * wmin;
    let ticks: Vec<f64> = (0..5).map(|i| -h + 0.5 * h * i as f64).collect();
    let total = 5usize.pow(dim as u32);
    for idx in 0..total {
        let mut x = vec![0.0; dim];
        let mut r = idx;
        for xi in x.iter_mut() {
            *xi = ticks[r % 5];
            r /= 5;
        }
        if x.iter().map(|v| v * v).sum::<f64>().sqrt() > h {
            continue;
        }
        let v = f(&x);
        if v < best_f {
            best_f = v;
            best_x = x;
        }
    }

    let mut step = 0.25 * h;
    let mut converged = false;
    for _ in 0..6 {
        let (x, v, ok) = nelder_mead(&f, &best_x, step, 200, 1e-8, 1e-9);
        converged = ok;
        let gain = best_f - v;
        if v <= best_f {
            best_f = v;
            best_x = x;
        }
        if ok && gain <= 1e-14 {
            break;
        }
        step = (step * 0.1).max(1e-6);
    }
    let mut center = [0.0; 3];
    center[..dim].copy_from_slice(&best_x);
    Ok(Asymmetry { alpha: best_f, center, converged })
}

#[cfg(test)]
pub(crate) fn alpha_at(m: &Hypersurface, x: [f64; 3]) -> f64 {
    OverlapProblem::new(m).alpha(&x[..m.n() + 1])
}

/// `delta_{k,m}`.
pub fn deficit(m: &Hypersurface, k: i64, mref: i64) -> Result<f64> {
    quermass_integrals(m)?.deficit(k, mref)
}

/// Dilation of `m` with `I_j` equal to that of the unit ball.
pub fn normalize_quermass(m: &Hypersurface, j: i64) -> Result<Hypersurface> {
    let q = quermass_integrals(m)?;
    let rho = q.matched_log_radius(j)?;
    m.dilate((-rho).exp())
}

/// `C(n,k) (n-k)/(2n) (||u||^2 + ||grad u||^2 / 2)`.
pub fn stability_functional_a(m: &Hypersurface, k: usize) -> Result<f64> {
    let n = m.n();
    if k < 1 || k + 1 > n {
        return Err(Error::domain(format!("stability functional needs 1 <= k <= n - 1, got k = {k}, n = {n}")));
    }
    let (l2, grad, _) = m.sobolev_quadrature();
    Ok(functional_a_from_norms(n, k, l2, grad))
}

pub(crate) fn functional_a_from_norms(n: usize, k: usize, l2: f64, grad: f64) -> f64 {
    binomial(n, k as i64) * (n as f64 - k as f64) / (2.0 * n as f64) * (l2 + 0.5 * grad)
}

/// Max over nodes of `|sigma_{k-1} - C(n,k-1)(1 - (k-1)u - ((k-1)/n) Lap u)|`.
pub fn linearization_residual_sigma(m: &Hypersurface, k: usize) -> Result<f64> {
    let n = m.n();
    if k < 1 || k > n {
        return Err(Error::domain(format!("linearization needs 1 <= k <= n, got k = {k}")));
    }
    let bundle = curvature_bundle(m)?;
    let lap = m.jet().laplacian();
    let c = binomial(n, k as i64 - 1);
    let km1 = k as f64 - 1.0;
    Ok(bundle
        .nodes()
        .iter()
        .zip(m.u().values())
        .zip(lap.values())
        .map(|((nc, &u), &l)| (nc.sigma[k - 1] - c * (1.0 - km1 * u - km1 / n as f64 * l)).abs())
        .fold(0.0, f64::max))
}

/// Max over nodes of `|1/sigma_k - (1 + k u + (k/n) Lap u)/C(n,k)|`.
pub fn linearization_residual_inverse(m: &Hypersurface, k: usize) -> Result<f64> {
    let n = m.n();
    if k < 1 || k > n {
        return Err(Error::domain(format!("linearization needs 1 <= k <= n, got k = {k}")));
    }
    let bundle = curvature_bundle(m)?;
    let lap = m.jet().laplacian();
    let c = binomial(n, k as i64);
    let kf = k as f64;
    let mut worst = 0.0f64;
    for (node, ((nc, &u), &l)) in bundle.nodes().iter().zip(m.u().values()).zip(lap.values()).enumerate() {
        if nc.sigma[k] <= 0.0 {
            let (theta, phi) = m.u().grid().coords(node);
            return Err(Error::ConeExit { order: k, value: nc.sigma[k], node, theta, phi });
        }
        worst = worst.max((1.0 / nc.sigma[k] - (1.0 + kf * u + kf / n as f64 * l) / c).abs());
    }
    Ok(worst)
}

/// Flat summary of a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    /// `I_{-1}..I_n`.
    #[serde(rename = "Ik")]
    pub ik: Vec<f64>,
    pub bar: [f64; 3],
    pub alpha: f64,
    /// `delta_k_m` for every `-1 <= m < k <= n`, keyed `delta_{k}_{m}`.
    #[serde(flatten)]
    pub deficits: BTreeMap<String, f64>,
    /// Stability functional with `k = 1`; absent on S^1.
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

impl ShapeReport {
    pub fn deficit(&self, k: i64, m: i64) -> Option<f64> {
        self.deficits.get(&format!("delta_{k}_{m}")).copied()
    }
}

pub fn shape_report(m: &Hypersurface) -> Result<ShapeReport> {
    let n = m.n() as i64;
    let q = quermass_integrals(m)?;
    let mut deficits = BTreeMap::new();
    for k in 0..=n {
        for j in -1..k {
            deficits.insert(format!("delta_{k}_{j}"), q.deficit(k, j)?);
        }
    }
    let asym = fraenkel_asymmetry(m)?;
    let norms = m.sup_norms();
    let a = if n >= 2 { Some(stability_functional_a(m, 1)?) } else { None };
    Ok(ShapeReport {
        ik: q.values.clone(),
        bar: barycenter(m),
        alpha: asym.alpha,
        deficits,
        a,
        c0: norms.c0,
        c1: norms.c1,
        c2: norms.c2,
    })
}
