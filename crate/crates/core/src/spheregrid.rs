//! Grids on S^1 and S^2, quadrature, and covariant derivatives with respect
//! to the round metric.
//!
//! On S^2 the chart is colatitude `t` in `(0, pi)` and longitude `p`, with
//! round metric `diag(1, sin^2 t)`. Latitude rings sit on Gauss-Legendre
//! nodes in `cos t`, longitudes are uniform, so no node lies on a pole.
//! On S^1 the single coordinate is the angle `p` with uniform nodes.
//!
//! Two derivative backends are available:
//!
//! * [`DerivativeScheme::Spectral`] differentiates the harmonic expansion
//!   and is exact for band-limited fields.
//! * [`DerivativeScheme::FourthOrder`] uses FFT derivatives along rings and
//!   five-point finite differences along meridians, continued across the
//!   poles through `(t, p) -> (-t, p + pi)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{self, LegendreTable};

/// How a [`Jet`] is computed from nodal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    #[default]
    Spectral,
    FourthOrder,
}

#[derive(Clone)]
pub(crate) struct RingFft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl RingFft {
    fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        RingFft { len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Unnormalized inverse transform.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }
}

impl fmt::Debug for RingFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingFft({})", self.len)
    }
}

/// One meridian stencil point: source ring, whether the point sits on the
/// antipodal longitude, and its weight.
#[derive(Debug, Clone, Copy)]
struct StencilPoint {
    ring: usize,
    flipped: bool,
    d1: f64,
    d2: f64,
}

/// Discretization of S^n for `n` in `{1, 2}`.
#[derive(Debug, Clone)]
pub struct GridSpec {
    n: usize,
    n_lat: usize,
    n_lon: usize,
    scheme: DerivativeScheme,
    theta: Vec<f64>,
    phi: Vec<f64>,
    lat_weights: Vec<f64>,
    weights: Vec<f64>,
    positions: Vec<[f64; 3]>,
    stencils: Vec<[StencilPoint; 5]>,
    fft: RingFft,
    legendre: Option<LegendreTable>,
}

/// Builds a grid with the default (spectral) derivative scheme.
///
/// For `n = 2`, `n_lat >= 8` and `n_lon >= 16` must be even. For `n = 1`
/// `n_lat` is ignored and `n_lon >= 8` must be even.
pub fn build_grid(n: usize, n_lat: usize, n_lon: usize) -> Result<Arc<GridSpec>> {
    GridSpec::build(n, n_lat, n_lon, DerivativeScheme::default()).map(Arc::new)
}

/// Gauss-Legendre nodes (descending) and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; count];
    let mut w = vec![0.0; count];
    let nf = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=count {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if count == 1 { z } else { p1 };
            let pm1 = if count == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        // one more derivative evaluation at the converged root
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=count {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        if count > 1 {
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
        }
        x[i] = z;
        x[count - 1 - i] = -z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[count - 1 - i] = wi;
    }
    (x, w)
}

/// Finite-difference weights for derivatives `0..=order` at `x0` on the
/// nodes `xs` (Fornberg's recursion). Returns `c[k][j]`.
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let np = xs.len();
    let mut c = vec![vec![0.0; np]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..np {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

impl GridSpec {
    pub fn build(n: usize, n_lat: usize, n_lon: usize, scheme: DerivativeScheme) -> Result<Self> {
        match n {
            1 => {
                if n_lon < 8 || n_lon % 2 != 0 {
                    return Err(Error::domain(format!("circle grid needs an even node count >= 8, got {n_lon}")));
                }
            }
            2 => {
                if n_lat < 8 || n_lat % 2 != 0 || n_lon < 16 || n_lon % 2 != 0 {
                    return Err(Error::domain(format!(
                        "sphere grid needs even n_lat >= 8 and even n_lon >= 16, got {n_lat}x{n_lon}"
                    )));
                }
            }
            _ => return Err(Error::domain(format!("unsupported sphere dimension {n}"))),
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let dphi = two_pi / n_lon as f64;
        let phi: Vec<f64> = (0..n_lon).map(|j| j as f64 * dphi).collect();
        let (theta, lat_weights) = if n == 2 {
            let (x, w) = gauss_legendre(n_lat);
            (x.iter().map(|v| v.acos()).collect::<Vec<_>>(), w)
        } else {
            (vec![std::f64::consts::FRAC_PI_2], vec![1.0])
        };
        let rings = theta.len();
        let mut weights = Vec::with_capacity(rings * n_lon);
        let mut positions = Vec::with_capacity(rings * n_lon);
        for (r, &t) in theta.iter().enumerate() {
            let (st, ct) = t.sin_cos();
            for &p in &phi {
                weights.push(lat_weights[r] * dphi);
                if n == 2 {
                    positions.push([st * p.cos(), st * p.sin(), ct]);
                } else {
                    positions.push([p.cos(), p.sin(), 0.0]);
                }
            }
        }
        let stencils = if n == 2 { meridian_stencils(&theta) } else { ring_stencils(n_lon) };
        let legendre = if n == 2 {
            Some(LegendreTable::new(&theta, (n_lat - 1).min(n_lon / 2 - 1)))
        } else {
            None
        };
        Ok(GridSpec {
            n,
            n_lat: if n == 2 { n_lat } else { 0 },
            n_lon,
            scheme,
            theta,
            phi,
            lat_weights,
            weights,
            positions,
            stencils,
            fft: RingFft::new(n_lon),
            legendre,
        })
    }

    /// Same grid with a different derivative scheme.
    pub fn with_scheme(&self, scheme: DerivativeScheme) -> Arc<GridSpec> {
        let mut g = self.clone();
        g.scheme = scheme;
        Arc::new(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn n_lat(&self) -> usize {
        self.n_lat
    }
    pub fn n_lon(&self) -> usize {
        self.n_lon
    }
    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }
    /// Number of latitude rings (1 on the circle).
    pub fn rings(&self) -> usize {
        self.theta.len()
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    /// Ring colatitudes (`pi/2` on the circle).
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }
    pub fn lat_weights(&self) -> &[f64] {
        &self.lat_weights
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }
    /// `|S^n|`.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.n)
    }
    /// `(t, p)` of a node.
    pub fn coords(&self, node: usize) -> (f64, f64) {
        (self.theta[node / self.n_lon], self.phi[node % self.n_lon])
    }
    pub(crate) fn fft(&self) -> &RingFft {
        &self.fft
    }
    pub(crate) fn legendre(&self) -> &LegendreTable {
        self.legendre.as_ref().expect("Legendre table exists on S^2 grids")
    }

    /// Smallest nodal spacing along meridians (or the ring on S^1).
    pub fn spacing(&self) -> f64 {
        if self.n == 1 {
            return 2.0 * std::f64::consts::PI / self.n_lon as f64;
        }
        let mut h = 2.0 * self.theta[0];
        for w in self.theta.windows(2) {
            h = h.min(w[1] - w[0]);
        }
        h
    }

    /// Node index of the image of `node` under the reflection `x_axis -> -x_axis`.
    pub fn reflect(&self, node: usize, axis: usize) -> usize {
        let nl = self.n_lon;
        let (r, j) = (node / nl, node % nl);
        match axis {
            // p -> pi - p
            0 => r * nl + (nl / 2 + nl - j) % nl,
            // p -> -p
            1 => r * nl + (nl - j) % nl,
            // t -> pi - t
            _ => {
                if self.n == 2 {
                    (self.rings() - 1 - r) * nl + j
                } else {
                    node
                }
            }
        }
    }
}

/// `|S^n|` for `n = 1, 2`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

fn meridian_stencils(theta: &[f64]) -> Vec<[StencilPoint; 5]> {
    let nr = theta.len() as i64;
    let two_pi = 2.0 * std::f64::consts::PI;
    (0..nr)
        .map(|i| {
            let mut pts = [(0usize, false, 0.0f64); 5];
            for (s, pt) in pts.iter_mut().enumerate() {
                let p = i + s as i64 - 2;
                *pt = if p < 0 {
                    let q = (-p - 1) as usize;
                    (q, true, -theta[q])
                } else if p >= nr {
                    let q = (2 * nr - 1 - p) as usize;
                    (q, true, two_pi - theta[q])
                } else {
                    (p as usize, false, theta[p as usize])
                };
            }
            let xs: Vec<f64> = pts.iter().map(|p| p.2).collect();
            let c = fornberg_weights(theta[i as usize], &xs, 2);
            let mut out = [StencilPoint { ring: 0, flipped: false, d1: 0.0, d2: 0.0 }; 5];
            for s in 0..5 {
                out[s] = StencilPoint { ring: pts[s].0, flipped: pts[s].1, d1: c[1][s], d2: c[2][s] };
            }
            out
        })
        .collect()
}

fn ring_stencils(n_lon: usize) -> Vec<[StencilPoint; 5]> {
    let h = 2.0 * std::f64::consts::PI / n_lon as f64;
    let xs: Vec<f64> = (-2..=2).map(|k| k as f64 * h).collect();
    let c = fornberg_weights(0.0, &xs, 2);
    let mut out = [StencilPoint { ring: 0, flipped: false, d1: 0.0, d2: 0.0 }; 5];
    for s in 0..5 {
        out[s] = StencilPoint { ring: 0, flipped: false, d1: c[1][s], d2: c[2][s] };
    }
    vec![out]
}

/// Scalar samples on the nodes of a grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            let (theta, phi) = grid.coords(node);
            return Err(Error::NonFinite { quantity: "field value", node, theta, phi });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: &Arc<GridSpec>, c: f64) -> Self {
        ScalarField { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples `f` at the unit vectors of the nodes.
    pub fn from_fn(grid: &Arc<GridSpec>, f: impl Fn([f64; 3]) -> f64) -> Self {
        ScalarField { grid: grid.clone(), values: grid.positions().iter().map(|&x| f(x)).collect() }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn grid_arc(&self) -> &Arc<GridSpec> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Same values on a grid with a different derivative scheme.
    pub fn with_grid(&self, grid: Arc<GridSpec>) -> Result<Self> {
        ScalarField::new(grid, self.values.clone())
    }
}

/// Compensated sum.
pub fn neumaier_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Quadrature `sum_i w_i f_i`.
pub fn integrate(f: &ScalarField) -> f64 {
    integrate_values(f.grid(), f.values())
}

/// Quadrature of raw nodal values.
pub fn integrate_values(grid: &GridSpec, values: &[f64]) -> f64 {
    neumaier_sum(grid.weights().iter().zip(values).map(|(w, v)| w * v))
}

/// Coordinate-frame covector components `u_i` per node.
#[derive(Debug, Clone)]
pub struct CovectorField {
    grid: Arc<GridSpec>,
    comps: Vec<[f64; 2]>,
}

/// Coordinate-frame symmetric tensor components `[u_00, u_01, u_11]`.
#[derive(Debug, Clone)]
pub struct SymTensorField {
    grid: Arc<GridSpec>,
    comps: Vec<[f64; 3]>,
}

/// Inverse round metric `(s^00, s^11)` at a node.
fn inverse_metric(grid: &GridSpec, node: usize) -> (f64, f64) {
    if grid.n() == 1 {
        (1.0, 0.0)
    } else {
        let s = grid.theta()[node / grid.n_lon()].sin();
        (1.0, 1.0 / (s * s))
    }
}

impl CovectorField {
    pub fn comps(&self) -> &[[f64; 2]] {
        &self.comps
    }
    /// `s^{ij} u_i u_j` per node.
    pub fn norm_sq(&self) -> ScalarField {
        let values = self
            .comps
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (a, b) = inverse_metric(&self.grid, i);
                a * c[0] * c[0] + b * c[1] * c[1]
            })
            .collect();
        ScalarField { grid: self.grid.clone(), values }
    }
    /// `s^{ij} u_i v_j` per node.
    pub fn dot(&self, other: &CovectorField) -> ScalarField {
        let values = self
            .comps
            .iter()
            .zip(&other.comps)
            .enumerate()
            .map(|(i, (c, d))| {
                let (a, b) = inverse_metric(&self.grid, i);
                a * c[0] * d[0] + b * c[1] * d[1]
            })
            .collect();
        ScalarField { grid: self.grid.clone(), values }
    }
}

impl SymTensorField {
    pub fn comps(&self) -> &[[f64; 3]] {
        &self.comps
    }
    /// Trace `s^{ij} u_ij`.
    pub fn trace(&self) -> ScalarField {
        let values = self
            .comps
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (a, b) = inverse_metric(&self.grid, i);
                a * c[0] + b * c[2]
            })
            .collect();
        ScalarField { grid: self.grid.clone(), values }
    }
    /// Frobenius norm squared `s^{ik} s^{jl} u_ij u_kl`.
    pub fn norm_sq(&self) -> ScalarField {
        let values = self
            .comps
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (a, b) = inverse_metric(&self.grid, i);
                a * a * c[0] * c[0] + 2.0 * a * b * c[1] * c[1] + b * b * c[2] * c[2]
            })
            .collect();
        ScalarField { grid: self.grid.clone(), values }
    }
    /// Mixed components `u^i_j` in the orthonormal frame `(e_t, e_p / sin t)`.
    pub fn orthonormal(&self, node: usize) -> [[f64; 2]; 2] {
        let c = self.comps[node];
        if self.grid.n() == 1 {
            return [[c[0], 0.0], [0.0, 0.0]];
        }
        let s = self.grid.theta()[node / self.grid.n_lon()].sin();
        [[c[0], c[1] / s], [c[1] / s, c[2] / (s * s)]]
    }
}

/// Value, gradient and Hessian of a field in orthonormal-frame components
/// at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

/// Raw coordinate partial derivatives of a field at every node.
///
/// `d1 = [u_0, u_1]`, `d2 = [u_00, u_01, u_11]`, where coordinate 0 is the
/// colatitude on S^2 and the angle on S^1.
#[derive(Debug, Clone)]
pub struct Jet {
    grid: Arc<GridSpec>,
    value: Vec<f64>,
    d1: Vec<[f64; 2]>,
    d2: Vec<[f64; 3]>,
}

impl Jet {
    pub(crate) fn from_parts(grid: Arc<GridSpec>, value: Vec<f64>, d1: Vec<[f64; 2]>, d2: Vec<[f64; 3]>) -> Self {
        Jet { grid, value, d1, d2 }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.value
    }

    pub fn gradient(&self) -> CovectorField {
        CovectorField { grid: self.grid.clone(), comps: self.d1.clone() }
    }

    /// Covariant Hessian with the round-metric Christoffel symbols
    /// `Gamma^t_pp = -sin t cos t`, `Gamma^p_tp = cot t`.
    pub fn hessian(&self) -> SymTensorField {
        let nl = self.grid.n_lon();
        let comps = if self.grid.n() == 1 {
            self.d2.iter().map(|d| [d[0], 0.0, 0.0]).collect()
        } else {
            self.d2
                .iter()
                .zip(&self.d1)
                .enumerate()
                .map(|(i, (d2, d1))| {
                    let (s, c) = self.grid.theta()[i / nl].sin_cos();
                    [d2[0], d2[1] - c / s * d1[1], d2[2] + s * c * d1[0]]
                })
                .collect()
        };
        SymTensorField { grid: self.grid.clone(), comps }
    }

    pub fn laplacian(&self) -> ScalarField {
        self.hessian().trace()
    }

    /// Orthonormal-frame jet at `node`.
    pub fn local(&self, node: usize) -> LocalJet {
        let d1 = self.d1[node];
        let d2 = self.d2[node];
        if self.grid.n() == 1 {
            return LocalJet { value: self.value[node], grad: [d1[0], 0.0], hess: [[d2[0], 0.0], [0.0, 0.0]] };
        }
        let (s, c) = self.grid.theta()[node / self.grid.n_lon()].sin_cos();
        let h01 = (d2[1] - c / s * d1[1]) / s;
        let h11 = (d2[2] + s * c * d1[0]) / (s * s);
        LocalJet { value: self.value[node], grad: [d1[0], d1[1] / s], hess: [[d2[0], h01], [h01, h11]] }
    }
}

/// Derivatives of `f` with the grid's scheme.
pub fn jet(f: &ScalarField) -> Result<Jet> {
    match f.grid().scheme() {
        DerivativeScheme::Spectral => harmonics::spectral_jet(f, harmonics::max_lmax(f.grid())),
        DerivativeScheme::FourthOrder => Ok(fd_jet(f)),
    }
}

fn fd_jet(f: &ScalarField) -> Jet {
    let grid = f.grid_arc().clone();
    let nl = grid.n_lon();
    let v = f.values();
    if grid.n() == 1 {
        let st = &grid.stencils[0];
        let mut d1 = vec![[0.0; 2]; nl];
        let mut d2 = vec![[0.0; 3]; nl];
        for j in 0..nl {
            let (mut a, mut b) = (0.0, 0.0);
            for (s, pt) in st.iter().enumerate() {
                let src = (j + nl + s - 2) % nl;
                a += pt.d1 * v[src];
                b += pt.d2 * v[src];
            }
            d1[j] = [a, 0.0];
            d2[j] = [b, 0.0, 0.0];
        }
        return Jet::from_parts(grid, v.to_vec(), d1, d2);
    }
    let (vp, vpp) = harmonics::longitude_derivatives(&grid, v);
    let len = grid.len();
    let mut d1 = vec![[0.0; 2]; len];
    let mut d2 = vec![[0.0; 3]; len];
    for r in 0..grid.rings() {
        let st = &grid.stencils[r];
        for j in 0..nl {
            let node = r * nl + j;
            let (mut t, mut tt, mut tp) = (0.0, 0.0, 0.0);
            for pt in st {
                let col = if pt.flipped { (j + nl / 2) % nl } else { j };
                let src = pt.ring * nl + col;
                t += pt.d1 * v[src];
                tt += pt.d2 * v[src];
                tp += pt.d1 * vp[src];
            }
            d1[node] = [t, vp[node]];
            d2[node] = [tt, tp, vpp[node]];
        }
    }
    Jet::from_parts(grid, v.to_vec(), d1, d2)
}

pub fn gradient(f: &ScalarField) -> Result<CovectorField> {
    Ok(jet(f)?.gradient())
}

pub fn hessian(f: &ScalarField) -> Result<SymTensorField> {
    Ok(jet(f)?.hessian())
}

pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    Ok(jet(f)?.laplacian())
}

/// Discrete sup norms of a field and its first two covariant derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNorms {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

pub fn sup_norms(f: &ScalarField) -> Result<SupNorms> {
    Ok(sup_norms_from_jet(&jet(f)?))
}

pub fn sup_norms_from_jet(j: &Jet) -> SupNorms {
    let c0 = j.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c1 = j.gradient().norm_sq().max_abs().sqrt();
    let c2 = j.hessian().norm_sq().max_abs().sqrt();
    SupNorms { c0, c1, c2 }
}

/// Average of `f` over the reflections `x_i -> -x_i` of every coordinate
/// axis; the result is invariant under each of them.
pub fn symmetrize(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let axes: &[usize] = if grid.n() == 2 { &[0, 1, 2] } else { &[0, 1] };
    let mut out = f.values().to_vec();
    for &axis in axes {
        let prev = out.clone();
        for (node, o) in out.iter_mut().enumerate() {
            *o = 0.5 * (prev[node] + prev[grid.reflect(node, axis)]);
        }
    }
    ScalarField { grid: f.grid_arc().clone(), values: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::harmonic_field;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn grid_weights_sum_to_sphere_area() {
        let g = build_grid(2, 32, 64).unwrap();
        assert_relative_eq!(g.weights().iter().sum::<f64>(), 4.0 * PI, max_relative = 1e-12);
        let c = build_grid(1, 0, 128).unwrap();
        assert_relative_eq!(c.weights().iter().sum::<f64>(), 2.0 * PI, max_relative = 1e-12);
        assert!(build_grid(3, 16, 32).is_err());
        assert!(build_grid(2, 7, 32).is_err());
        assert!(build_grid(2, 16, 12).is_err());
        assert!(g.theta().iter().all(|&t| t > 0.0 && t < PI));
    }

    #[test]
    fn gauss_legendre_small_cases() {
        let (x, w) = gauss_legendre(2);
        assert_relative_eq!(x[0], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-14);
        let (x, w) = gauss_legendre(5);
        // integrates x^8 exactly
        let q: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(8)).sum();
        assert_relative_eq!(q, 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn integrate_examples() {
        let g = build_grid(2, 32, 64).unwrap();
        assert_relative_eq!(integrate(&ScalarField::constant(&g, 1.0)), 4.0 * PI, max_relative = 1e-12);
        let f = ScalarField::from_fn(&g, |x| x[2] * x[2]);
        assert_relative_eq!(integrate(&f), 4.0 * PI / 3.0, max_relative = 1e-12);
        for (l, m) in [(1, 0), (3, -2), (7, 5)] {
            assert!(integrate(&harmonic_field(&g, l, m).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn constants_have_zero_derivatives() {
        for scheme in [DerivativeScheme::Spectral, DerivativeScheme::FourthOrder] {
            let g = GridSpec::build(2, 16, 32, scheme).map(Arc::new).unwrap();
            let f = ScalarField::constant(&g, 2.5);
            let j = jet(&f).unwrap();
            let norms = sup_norms_from_jet(&j);
            assert!(norms.c1 < 1e-12 && norms.c2 < 1e-11, "{scheme:?}: {norms:?}");
        }
    }

    #[test]
    fn laplacian_eigenfunctions() {
        let g = build_grid(2, 48, 96).unwrap();
        let y = harmonic_field(&g, 2, 0).unwrap();
        let lap = laplacian(&y).unwrap();
        for (a, b) in lap.values().iter().zip(y.values()) {
            assert!((a + 6.0 * b).abs() < 1e-6);
        }
        let z = ScalarField::from_fn(&g, |x| x[2]);
        let lap = laplacian(&z).unwrap();
        for (a, b) in lap.values().iter().zip(z.values()) {
            assert!((a + 2.0 * b).abs() < 1e-10);
        }
        let c = build_grid(1, 0, 64).unwrap();
        let f = ScalarField::from_fn(&c, |x| (3.0 * x[1].atan2(x[0])).cos());
        let lap = laplacian(&f).unwrap();
        for (a, b) in lap.values().iter().zip(f.values()) {
            assert!((a + 9.0 * b).abs() < 1e-10);
        }
    }

    #[test]
    fn fourth_order_laplacian_is_close() {
        let g = GridSpec::build(2, 64, 128, DerivativeScheme::FourthOrder).map(Arc::new).unwrap();
        let y = harmonic_field(&g, 2, 1).unwrap();
        let lap = laplacian(&y).unwrap();
        let err = lap.zip_map(&y, |a, b| a + 6.0 * b).max_abs();
        assert!(err < 1e-4, "err = {err}");
    }

    #[test]
    fn hessian_trace_is_laplacian() {
        let g = build_grid(2, 24, 48).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] * x[1] + 0.3 * x[2].powi(3) - x[0]);
        let j = jet(&f).unwrap();
        let tr = j.hessian().trace();
        let lap = j.laplacian();
        for (a, b) in tr.values().iter().zip(lap.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sup_norm_examples() {
        let g = build_grid(2, 32, 64).unwrap();
        let zero = sup_norms(&ScalarField::constant(&g, 0.0)).unwrap();
        assert_eq!(zero, SupNorms { c0: 0.0, c1: 0.0, c2: 0.0 });
        let eps = 0.05;
        let f = harmonic_field(&g, 2, 0).unwrap().map(|v| eps * v);
        let n = sup_norms(&f).unwrap();
        let analytic = eps * (5.0 / (16.0 * PI)).sqrt() * 2.0;
        assert!(n.c0 <= analytic + 1e-15 && analytic - n.c0 < 1e-2 * analytic);
        let coarse = sup_norms(&ScalarField::from_fn(&build_grid(2, 16, 32).unwrap(), |x| x[2])).unwrap();
        let fine = sup_norms(&ScalarField::from_fn(&build_grid(2, 64, 128).unwrap(), |x| x[2])).unwrap();
        assert!(fine.c0 > coarse.c0 && fine.c0 < 1.0 && 1.0 - fine.c0 < 1e-3);
        // |grad x_3| = sin t, maximal on the equator
        assert!((fine.c1 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fornberg_reproduces_standard_stencil() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let c = fornberg_weights(0.0, &xs, 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for s in 0..5 {
            assert_relative_eq!(c[1][s], d1[s], epsilon = 1e-14);
            assert_relative_eq!(c[2][s], d2[s], epsilon = 1e-14);
        }
    }

    #[test]
    fn symmetrize_projects_onto_reflection_invariant_fields() {
        let g = build_grid(2, 16, 32).unwrap();
        let f = ScalarField::from_fn(&g, |x| 1.0 + x[0] + x[1] * x[2] + x[2] * x[2] + x[0] * x[0]);
        let s = symmetrize(&f);
        for node in 0..g.len() {
            for axis in 0..3 {
                assert!((s.values()[node] - s.values()[g.reflect(node, axis)]).abs() < 1e-14);
            }
        }
        let expect = ScalarField::from_fn(&g, |x| 1.0 + x[2] * x[2] + x[0] * x[0]);
        for (a, b) in s.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
