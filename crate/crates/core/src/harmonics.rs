//! Real spherical-harmonic analysis and synthesis on S^2 (Fourier series on
//! S^1), Sobolev norms from spectra, and spectral derivatives.
//!
//! Basis convention on S^2, without the Condon-Shortley phase:
//!
//! * `Y_{l,0}  = P_l^0(cos t)`
//! * `Y_{l,m}  = sqrt(2) P_l^m(cos t) cos(m p)` for `m > 0`
//! * `Y_{l,-m} = sqrt(2) P_l^m(cos t) sin(m p)` for `m > 0`
//!
//! where `P_l^m` are the associated Legendre functions normalized so that
//! every `Y_{l,m}` has unit L^2 norm on the sphere. On S^1 the basis is
//! `1/sqrt(2 pi)`, `cos(l p)/sqrt(pi)` (stored as `m = l`) and
//! `sin(l p)/sqrt(pi)` (stored as `m = -l`).
//!
//! Coefficients are ordered by `l` ascending, then `m` ascending.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spheregrid::{GridSpec, Jet, ScalarField};

const SCALE_BIG: f64 = 1.0e280;
const SCALE_SMALL: f64 = 1.0e-280;

/// Normalized associated Legendre values and their colatitude derivatives
/// on a set of colatitudes, for `0 <= m <= l <= lmax`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    lmax: usize,
    nrows: usize,
    per_row: usize,
    p: Vec<f64>,
    dp: Vec<f64>,
}

impl LegendreTable {
    pub fn new(theta: &[f64], lmax: usize) -> Self {
        let per_row = (lmax + 1) * (lmax + 2) / 2;
        let mut p = vec![0.0; theta.len() * per_row];
        let mut dp = vec![0.0; theta.len() * per_row];
        let mut col = vec![0.0; lmax + 1];
        let mut dcol = vec![0.0; lmax + 1];
        for (row, &t) in theta.iter().enumerate() {
            let base = row * per_row;
            for m in 0..=lmax {
                legendre_column(t, m, lmax, &mut col, &mut dcol);
                let off = base + tri_offset(m, lmax);
                p[off..off + lmax + 1 - m].copy_from_slice(&col[m..=lmax]);
                dp[off..off + lmax + 1 - m].copy_from_slice(&dcol[m..=lmax]);
            }
        }
        LegendreTable { lmax, nrows: theta.len(), per_row, p, dp }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn rows(&self) -> usize {
        self.nrows
    }

    /// Values `P_l^m` for `l = m..=lmax` on row `row`.
    fn column(&self, row: usize, m: usize) -> (&[f64], &[f64]) {
        let off = row * self.per_row + tri_offset(m, self.lmax);
        let len = self.lmax + 1 - m;
        (&self.p[off..off + len], &self.dp[off..off + len])
    }
}

fn tri_offset(m: usize, lmax: usize) -> usize {
    // columns m' < m hold (lmax + 1 - m') entries each
    m * (2 * lmax + 3 - m) / 2
}

/// Fills `col[l]` and `dcol[l]` (for `l >= m`) with `P_l^m(cos t)` and its
/// derivative in `t`. The sectoral seed is carried with a separate scale
/// counter so that high orders near the poles do not underflow early.
fn legendre_column(t: f64, m: usize, lmax: usize, col: &mut [f64], dcol: &mut [f64]) {
    let (s, c) = t.sin_cos();
    let mut pmm = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    let mut scale = 0i32;
    for j in 1..=m {
        pmm *= ((2 * j + 1) as f64 / (2 * j) as f64).sqrt() * s;
        if pmm.abs() < SCALE_SMALL {
            pmm *= SCALE_BIG;
            scale += 1;
        }
    }
    let mut prev2 = 0.0;
    let mut prev = pmm;
    let unscale = |v: f64, sc: i32| -> f64 {
        if sc == 0 {
            v
        } else {
            let mut out = v;
            for _ in 0..sc {
                out *= SCALE_SMALL;
            }
            out
        }
    };
    col[m] = unscale(pmm, scale);
    let mf = m as f64;
    for l in (m + 1)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = if l >= m + 2 {
            (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut cur = a * (c * prev - b * prev2);
        if scale > 0 && cur.abs() > 1.0 {
            cur *= SCALE_SMALL;
            prev *= SCALE_SMALL;
            scale -= 1;
        }
        prev2 = prev;
        prev = cur;
        col[l] = unscale(cur, scale);
    }
    for l in m..=lmax {
        let lf = l as f64;
        let lower = if l > m {
            ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt() * col[l - 1]
        } else {
            0.0
        };
        dcol[l] = (lf * c * col[l] - lower) / s;
    }
}

/// Real harmonic coefficients of a field on S^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpectrum {
    pub n: usize,
    pub lmax: usize,
    pub coeffs: Vec<f64>,
}

/// Number of coefficients for band limit `lmax` on S^n.
pub fn coeff_count(n: usize, lmax: usize) -> usize {
    if n == 1 {
        2 * lmax + 1
    } else {
        (lmax + 1) * (lmax + 1)
    }
}

/// Position of `(l, m)` in the coefficient vector. On S^1 only `m = 0`
/// (for `l = 0`) and `m = +-l` exist.
pub fn coeff_index(n: usize, l: usize, m: i64) -> Option<usize> {
    let li = l as i64;
    if m.abs() > li {
        return None;
    }
    if n == 1 {
        return match (l, m) {
            (0, 0) => Some(0),
            (0, _) => None,
            _ if m == li => Some(2 * l),
            _ if m == -li => Some(2 * l - 1),
            _ => None,
        };
    }
    Some((li * li + li + m) as usize)
}

impl HarmonicSpectrum {
    pub fn zeros(n: usize, lmax: usize) -> Self {
        HarmonicSpectrum { n, lmax, coeffs: vec![0.0; coeff_count(n, lmax)] }
    }

    /// Laplacian eigenvalue magnitude `l (l + n - 1)`.
    pub fn eigenvalue(&self, l: usize) -> f64 {
        (l * (l + self.n - 1)) as f64
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.lmax {
            return 0.0;
        }
        coeff_index(self.n, l, m).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set(&mut self, l: usize, m: i64, value: f64) -> Result<()> {
        if l > self.lmax {
            return Err(Error::domain(format!("degree {l} above band limit {}", self.lmax)));
        }
        let i = coeff_index(self.n, l, m)
            .ok_or_else(|| Error::domain(format!("no harmonic (l, m) = ({l}, {m}) on S^{}", self.n)))?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Iterates `(l, m, coefficient)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        let n = self.n;
        (0..=self.lmax).flat_map(move |l| {
            let ms: Vec<i64> = if n == 1 {
                if l == 0 { vec![0] } else { vec![-(l as i64), l as i64] }
            } else {
                (-(l as i64)..=l as i64).collect()
            };
            ms.into_iter()
                .map(move |m| (l, m, self.coeffs[coeff_index(n, l, m).unwrap()]))
        })
    }

    /// Sum of squared coefficients of degree `l`.
    pub fn degree_power(&self, l: usize) -> f64 {
        self.iter().filter(|&(dl, _, _)| dl == l).map(|(_, _, a)| a * a).sum()
    }

    /// `(||u||^2, ||grad u||^2, ||Lap u||^2)` from the spectrum.
    pub fn sobolev_norms(&self) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for (l, _, a) in self.iter() {
            let lam = self.eigenvalue(l);
            out.0 += a * a;
            out.1 += lam * a * a;
            out.2 += lam * lam * a * a;
        }
        out
    }

    /// Zeroes every coefficient of degree `l <= up_to`.
    pub fn strip_low_modes(&self, up_to: usize) -> Result<Self> {
        if up_to > self.lmax {
            return Err(Error::domain(format!(
                "strip_low_modes: {up_to} exceeds band limit {}",
                self.lmax
            )));
        }
        let mut out = self.clone();
        for (i, (l, _, _)) in self.iter().enumerate() {
            if l <= up_to {
                out.coeffs[i] = 0.0;
            }
        }
        Ok(out)
    }

    /// `||Lap u||^2 - 2(n+1) ||grad u||^2`, nonnegative when the degree-one
    /// modes vanish.
    pub fn poincare_margin(&self) -> f64 {
        let (_, g, l) = self.sobolev_norms();
        l - 2.0 * (self.n as f64 + 1.0) * g
    }

    /// JSON array of coefficients in storage order.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(self.coeffs.clone())
    }
}

/// Default band limit for a grid: half the latitude count.
pub fn default_lmax(grid: &GridSpec) -> usize {
    if grid.n() == 1 {
        grid.n_lon() / 4
    } else {
        grid.n_lat() / 2
    }
}

/// Largest band limit the grid resolves exactly.
pub fn max_lmax(grid: &GridSpec) -> usize {
    if grid.n() == 1 {
        grid.n_lon() / 2 - 1
    } else {
        (grid.n_lat() - 1).min(grid.n_lon() / 2 - 1)
    }
}

/// Fourier cosine/sine sums per latitude ring for `m = 0..=mmax`.
/// Returns `(cos_sums, sin_sums)` indexed `[ring][m]`.
fn ring_analysis(grid: &GridSpec, values: &[f64], mmax: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let nl = grid.n_lon();
    let rings = grid.rings();
    let fft = grid.fft();
    let mut buf = vec![Complex64::new(0.0, 0.0); nl];
    let mut cs = Vec::with_capacity(rings);
    let mut ss = Vec::with_capacity(rings);
    for r in 0..rings {
        for (b, &v) in buf.iter_mut().zip(&values[r * nl..(r + 1) * nl]) {
            *b = Complex64::new(v, 0.0);
        }
        fft.forward(&mut buf);
        cs.push((0..=mmax).map(|m| buf[m].re).collect());
        ss.push((0..=mmax).map(|m| -buf[m].im).collect());
    }
    (cs, ss)
}

/// Inverse of [`ring_analysis`] for band-limited Fourier data: writes
/// `c_0 + sum_m (c_m cos m p + s_m sin m p)` into `out`.
fn ring_synthesis(grid: &GridSpec, cos_c: &[Vec<f64>], sin_c: &[Vec<f64>], out: &mut [f64]) {
    let nl = grid.n_lon();
    let fft = grid.fft();
    let mut buf = vec![Complex64::new(0.0, 0.0); nl];
    for (r, (cr, sr)) in cos_c.iter().zip(sin_c).enumerate() {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        buf[0] = Complex64::new(cr[0], 0.0);
        for m in 1..cr.len() {
            buf[m] = Complex64::new(0.5 * cr[m], -0.5 * sr[m]);
            buf[nl - m] = Complex64::new(0.5 * cr[m], 0.5 * sr[m]);
        }
        fft.inverse(&mut buf);
        for (o, b) in out[r * nl..(r + 1) * nl].iter_mut().zip(&buf) {
            *o = b.re;
        }
    }
}

fn check_lmax(grid: &GridSpec, lmax: usize) -> Result<()> {
    let cap = max_lmax(grid);
    if lmax > cap {
        return Err(Error::domain(format!(
            "band limit {lmax} exceeds grid capacity {cap} ({}x{})",
            grid.n_lat(),
            grid.n_lon()
        )));
    }
    Ok(())
}

/// Quadrature projection of `f` onto harmonics of degree `<= lmax`.
pub fn analyze(f: &ScalarField, lmax: usize) -> Result<HarmonicSpectrum> {
    let grid = f.grid();
    check_lmax(grid, lmax)?;
    let n = grid.n();
    let mut spec = HarmonicSpectrum::zeros(n, lmax);
    let dphi = 2.0 * std::f64::consts::PI / grid.n_lon() as f64;
    let (cs, ss) = ring_analysis(grid, f.values(), lmax);
    if n == 1 {
        let pi = std::f64::consts::PI;
        spec.coeffs[0] = dphi * cs[0][0] / (2.0 * pi).sqrt();
        for l in 1..=lmax {
            spec.coeffs[2 * l] = dphi * cs[0][l] / pi.sqrt();
            spec.coeffs[2 * l - 1] = dphi * ss[0][l] / pi.sqrt();
        }
        return Ok(spec);
    }
    let table = grid.legendre();
    let sqrt2 = std::f64::consts::SQRT_2;
    for (r, &wlat) in grid.lat_weights().iter().enumerate() {
        let w = wlat * dphi;
        for m in 0..=lmax {
            let (p, _) = table.column(r, m);
            let (c, s) = (cs[r][m] * w, ss[r][m] * w);
            for (j, &pv) in p[..=lmax - m].iter().enumerate() {
                let l = m + j;
                let base = l * l + l;
                if m == 0 {
                    spec.coeffs[base] += c * pv;
                } else {
                    spec.coeffs[base + m] += sqrt2 * c * pv;
                    spec.coeffs[base - m] += sqrt2 * s * pv;
                }
            }
        }
    }
    Ok(spec)
}

/// Evaluates a spectrum on the nodes of `grid`.
pub fn synthesize(spec: &HarmonicSpectrum, grid: &Arc<GridSpec>) -> Result<ScalarField> {
    if spec.n != grid.n() {
        return Err(Error::domain("spectrum and grid dimensions differ"));
    }
    check_lmax(grid, spec.lmax)?;
    let terms = fourier_terms(spec, grid, Component::Value);
    let mut out = vec![0.0; grid.len()];
    ring_synthesis(grid, &terms.0, &terms.1, &mut out);
    Ok(ScalarField::new(grid.clone(), out)?)
}

/// `synthesize(analyze(f, lmax))`.
pub fn project(f: &ScalarField, lmax: usize) -> Result<ScalarField> {
    let spec = analyze(f, lmax)?;
    synthesize(&spec, f.grid_arc())
}

#[derive(Clone, Copy, PartialEq)]
enum Component {
    Value,
    DTheta,
    /// `sum l(l+1) a P`, used for the second colatitude derivative.
    Eigen,
}

/// Per-ring Fourier coefficients of a derived quantity of the spectrum.
fn fourier_terms(spec: &HarmonicSpectrum, grid: &GridSpec, comp: Component) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let lmax = spec.lmax;
    let rings = grid.rings();
    let mut cos_c = vec![vec![0.0; lmax + 1]; rings];
    let mut sin_c = vec![vec![0.0; lmax + 1]; rings];
    if spec.n == 1 {
        let pi = std::f64::consts::PI;
        let eig = |l: usize| if comp == Component::Eigen { (l * l) as f64 } else { 1.0 };
        if comp != Component::DTheta {
            cos_c[0][0] = spec.coeffs[0] / (2.0 * pi).sqrt() * eig(0);
            for l in 1..=lmax {
                cos_c[0][l] = spec.coeffs[2 * l] / pi.sqrt() * eig(l);
                sin_c[0][l] = spec.coeffs[2 * l - 1] / pi.sqrt() * eig(l);
            }
        }
        return (cos_c, sin_c);
    }
    let table = grid.legendre();
    let sqrt2 = std::f64::consts::SQRT_2;
    for r in 0..rings {
        for m in 0..=lmax {
            let (p, dp) = table.column(r, m);
            let vals = if comp == Component::DTheta { dp } else { p };
            let (mut c, mut s) = (0.0, 0.0);
            for (j, &pv) in vals[..=lmax - m].iter().enumerate() {
                let l = m + j;
                let base = l * l + l;
                let f = if comp == Component::Eigen { (l * (l + 1)) as f64 * pv } else { pv };
                c += spec.coeffs[base + m] * f;
                if m > 0 {
                    s += spec.coeffs[base - m] * f;
                }
            }
            if m > 0 {
                c *= sqrt2;
                s *= sqrt2;
            }
            cos_c[r][m] = c;
            sin_c[r][m] = s;
        }
    }
    (cos_c, sin_c)
}

/// First and second partial derivatives of a band-limited field, exact for
/// fields of degree `<= lmax`.
pub fn spectral_jet(f: &ScalarField, lmax: usize) -> Result<Jet> {
    let grid = f.grid_arc().clone();
    let spec = analyze(f, lmax)?;
    let len = grid.len();
    let rings = grid.rings();
    let (vc, vs) = fourier_terms(&spec, &grid, Component::Value);
    let mut value = vec![0.0; len];
    ring_synthesis(&grid, &vc, &vs, &mut value);
    let scale_m = |c: &[Vec<f64>], s: &[Vec<f64>], k: fn(f64) -> (f64, f64, f64, f64)| {
        let mut oc = c.to_vec();
        let mut os = s.to_vec();
        for r in 0..rings {
            for m in 0..c[r].len() {
                let (a, b, cc, d) = k(m as f64);
                oc[r][m] = a * c[r][m] + b * s[r][m];
                os[r][m] = cc * c[r][m] + d * s[r][m];
            }
        }
        (oc, os)
    };
    // d/dp: (c, s) -> (m s, -m c); d2/dp2: (c, s) -> (-m^2 c, -m^2 s)
    let (pc, ps) = scale_m(&vc, &vs, |m| (0.0, m, -m, 0.0));
    let (ppc, pps) = scale_m(&vc, &vs, |m| (-m * m, 0.0, 0.0, -m * m));
    let mut d_p = vec![0.0; len];
    let mut d_pp = vec![0.0; len];
    ring_synthesis(&grid, &pc, &ps, &mut d_p);
    ring_synthesis(&grid, &ppc, &pps, &mut d_pp);
    if grid.n() == 1 {
        let d1 = d_p.iter().map(|&a| [a, 0.0]).collect();
        let d2 = d_pp.iter().map(|&a| [a, 0.0, 0.0]).collect();
        return Ok(Jet::from_parts(grid, value, d1, d2));
    }
    let (tc, ts) = fourier_terms(&spec, &grid, Component::DTheta);
    let (ec, es) = fourier_terms(&spec, &grid, Component::Eigen);
    let (tpc, tps) = scale_m(&tc, &ts, |m| (0.0, m, -m, 0.0));
    // Legendre equation: P'' = -cot t P' - (l(l+1) - m^2 / sin^2 t) P
    let mut ttc = vec![vec![0.0; spec.lmax + 1]; rings];
    let mut tts = ttc.clone();
    for r in 0..rings {
        let t = grid.theta()[r];
        let (s, c) = t.sin_cos();
        for m in 0..=spec.lmax {
            let mm = (m * m) as f64 / (s * s);
            ttc[r][m] = -c / s * tc[r][m] - ec[r][m] + mm * vc[r][m];
            tts[r][m] = -c / s * ts[r][m] - es[r][m] + mm * vs[r][m];
        }
    }
    let mut d_t = vec![0.0; len];
    let mut d_tt = vec![0.0; len];
    let mut d_tp = vec![0.0; len];
    ring_synthesis(&grid, &tc, &ts, &mut d_t);
    ring_synthesis(&grid, &ttc, &tts, &mut d_tt);
    ring_synthesis(&grid, &tpc, &tps, &mut d_tp);
    let d1 = d_t.iter().zip(&d_p).map(|(&a, &b)| [a, b]).collect();
    let d2 = (0..len).map(|i| [d_tt[i], d_tp[i], d_pp[i]]).collect();
    Ok(Jet::from_parts(grid, value, d1, d2))
}

/// Longitude derivatives `(d/dp, d2/dp2)` of every ring by FFT.
pub(crate) fn longitude_derivatives(grid: &GridSpec, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nl = grid.n_lon();
    let fft = grid.fft();
    let mut d1 = vec![0.0; values.len()];
    let mut d2 = vec![0.0; values.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); nl];
    let mut b1 = buf.clone();
    let inv_n = 1.0 / nl as f64;
    for r in 0..grid.rings() {
        for (b, &v) in buf.iter_mut().zip(&values[r * nl..(r + 1) * nl]) {
            *b = Complex64::new(v, 0.0);
        }
        fft.forward(&mut buf);
        for k in 0..nl {
            let m = if k <= nl / 2 { k as f64 } else { k as f64 - nl as f64 };
            let ik = if 2 * k == nl { 0.0 } else { m };
            b1[k] = buf[k] * Complex64::new(0.0, ik) * inv_n;
            buf[k] *= -m * m * inv_n;
        }
        fft.inverse(&mut b1);
        fft.inverse(&mut buf);
        for j in 0..nl {
            d1[r * nl + j] = b1[j].re;
            d2[r * nl + j] = buf[j].re;
        }
    }
    (d1, d2)
}

/// Value of the real harmonic `Y_{l,m}` at a unit vector `x`.
pub fn real_harmonic(n: usize, l: usize, m: i64, x: [f64; 3]) -> Result<f64> {
    let ma = m.unsigned_abs() as usize;
    if ma > l {
        return Err(Error::domain(format!("|m| = {ma} exceeds l = {l}")));
    }
    let pi = std::f64::consts::PI;
    let phi = x[1].atan2(x[0]);
    if n == 1 {
        return match m {
            0 if l == 0 => Ok(1.0 / (2.0 * pi).sqrt()),
            _ if m == l as i64 && l > 0 => Ok((l as f64 * phi).cos() / pi.sqrt()),
            _ if m == -(l as i64) && l > 0 => Ok((l as f64 * phi).sin() / pi.sqrt()),
            _ => Err(Error::domain(format!("no harmonic (l, m) = ({l}, {m}) on S^1"))),
        };
    }
    if n != 2 {
        return Err(Error::domain(format!("harmonics on S^{n} are not supported")));
    }
    let theta = x[2].clamp(-1.0, 1.0).acos();
    let mut col = vec![0.0; l + 1];
    let mut dcol = vec![0.0; l + 1];
    // dcol is unused here; keep the pole safe
    legendre_column(theta.max(1e-300), ma, l, &mut col, &mut dcol);
    let p = col[l];
    Ok(match m {
        0 => p,
        _ if m > 0 => std::f64::consts::SQRT_2 * p * (ma as f64 * phi).cos(),
        _ => std::f64::consts::SQRT_2 * p * (ma as f64 * phi).sin(),
    })
}

/// Field of the single harmonic `Y_{l,m}` on `grid`.
pub fn harmonic_field(grid: &Arc<GridSpec>, l: usize, m: i64) -> Result<ScalarField> {
    let vals = grid
        .positions()
        .iter()
        .map(|&x| real_harmonic(grid.n(), l, m, x))
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(grid.clone(), vals)
}
