//! Independent reference values: subset-sum symmetric functions, closed-form
//! spheroid geometry and finite differences in time.
//!
//! Nothing here calls into the geometry or flow code, so these functions
//! can be used to check it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Literal sum over all `k`-subsets. Exponential; keep `n` small.
pub fn brute_sigma(lambda: &[f64], k: usize) -> f64 {
    fn rec(lambda: &[f64], start: usize, left: usize, prod: f64, acc: &mut f64) {
        if left == 0 {
            *acc += prod;
            return;
        }
        for i in start..=lambda.len() - left {
            rec(lambda, i + 1, left - 1, prod * lambda[i], acc);
        }
    }
    if k > lambda.len() {
        return 0.0;
    }
    let mut acc = 0.0;
    rec(lambda, 0, k, 1.0, &mut acc);
    acc
}

/// Spheroid `x^2/a^2 + y^2/a^2 + z^2/c^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpheroidSpec {
    pub a: f64,
    pub c: f64,
}

impl SpheroidSpec {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && c > 0.0 && a.is_finite() && c.is_finite()) {
            return Err(Error::domain(format!("spheroid semi-axes must be positive, got a = {a}, c = {c}")));
        }
        Ok(SpheroidSpec { a, c })
    }

    /// Distance from the center to the surface along the unit vector `x`.
    pub fn radius(&self, x: [f64; 3]) -> f64 {
        let s2 = x[0] * x[0] + x[1] * x[1];
        1.0 / (s2 / (self.a * self.a) + x[2] * x[2] / (self.c * self.c)).sqrt()
    }

    fn q(&self, beta: f64) -> f64 {
        let (s, c) = beta.sin_cos();
        (self.a * self.a * c * c + self.c * self.c * s * s).sqrt()
    }

    /// Meridian and parallel curvatures at parameter angle `beta`, where the
    /// surface point is `(a sin b cos p, a sin b sin p, c cos b)`.
    pub fn curvatures_at(&self, beta: f64) -> (f64, f64) {
        let q = self.q(beta);
        (self.a * self.c / (q * q * q), self.c / (self.a * q))
    }

    /// Principal curvatures where the ray through the unit vector `x` meets
    /// the surface.
    pub fn curvatures_along(&self, x: [f64; 3]) -> (f64, f64) {
        let s = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let w = self.radius(x);
        let beta = (w * s / self.a).atan2(w * x[2] / self.c);
        self.curvatures_at(beta)
    }

    /// Area from the closed form with the eccentricity term.
    pub fn area(&self) -> f64 {
        let (a, c) = (self.a, self.c);
        if (a - c).abs() <= 1e-14 * a {
            return 4.0 * PI * a * a;
        }
        if c > a {
            let e = (1.0 - a * a / (c * c)).sqrt();
            2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin())
        } else {
            let e = (1.0 - c * c / (a * a)).sqrt();
            2.0 * PI * a * a * (1.0 + (1.0 - e * e) / e * e.atanh())
        }
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.a * self.a * self.c
    }
}

/// `int sigma_k dA` over the spheroid (`k = -1` gives the volume), by
/// adaptive Simpson quadrature in the parameter angle.
pub fn spheroid_reference(s: &SpheroidSpec, k: i32) -> Result<f64> {
    if k == -1 {
        return Ok(s.volume());
    }
    if !(0..=2).contains(&k) {
        return Err(Error::domain(format!("spheroid reference needs k in -1..=2, got {k}")));
    }
    let f = |beta: f64| {
        let (km, kp) = s.curvatures_at(beta);
        let sig = match k {
            0 => 1.0,
            1 => km + kp,
            _ => km * kp,
        };
        sig * 2.0 * PI * s.a * beta.sin() * s.q(beta)
    };
    Ok(adaptive_simpson(&f, 0.0, PI, 1e-13))
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(fa, fm, fb, a, b);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Distance from the origin to the sphere of radius `radius` centered at
/// `center` along the unit vector `x`; the origin must lie inside.
pub fn translated_ball_radius(center: [f64; 3], radius: f64, x: [f64; 3]) -> f64 {
    let b = x[0] * center[0] + x[1] * center[1] + x[2] * center[2];
    let c2 = center.iter().map(|v| v * v).sum::<f64>();
    b + (b * b - c2 + radius * radius).sqrt()
}

/// Derivative at `at` of the quadratic through the three samples nearest to
/// it. Samples need not be uniformly spaced but must be sorted by time.
pub fn fd_time_derivative(samples: &[(f64, f64)], at: f64) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::domain(format!("need at least 3 samples, got {}", samples.len())));
    }
    let first = samples[0].0;
    let last = samples[samples.len() - 1].0;
    if !(first <= at && at <= last) {
        return Err(Error::domain(format!("samples span [{first}, {last}] and do not bracket t = {at}")));
    }
    let nearest = samples
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 .0 - at).abs().total_cmp(&(b.1 .0 - at).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mid = nearest.clamp(1, samples.len() - 2);
    let (t0, f0) = samples[mid - 1];
    let (t1, f1) = samples[mid];
    let (t2, f2) = samples[mid + 1];
    // derivative of the Lagrange interpolant
    let d0 = (2.0 * at - t1 - t2) / ((t0 - t1) * (t0 - t2));
    let d1 = (2.0 * at - t0 - t2) / ((t1 - t0) * (t1 - t2));
    let d2 = (2.0 * at - t0 - t1) / ((t2 - t0) * (t2 - t1));
    Ok(f0 * d0 + f1 * d1 + f2 * d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn brute_sigma_examples() {
        assert_eq!(brute_sigma(&[1.0, 2.0, 3.0], 3), 6.0);
        assert_eq!(brute_sigma(&[1.0; 4], 2), 6.0);
        assert_eq!(brute_sigma(&[1.0, 2.0, 3.0], 0), 1.0);
        assert_eq!(brute_sigma(&[1.0, 2.0, 3.0], 4), 0.0);
    }

    #[test]
    fn spheroid_sphere_limit() {
        for r in [1.0, 1.7] {
            let s = SpheroidSpec::new(r, r).unwrap();
            for k in 0..=2 {
                let expect = crate::symfun::binomial(2, k as i64) * r.powi(2 - k) * 4.0 * PI;
                assert_relative_eq!(spheroid_reference(&s, k).unwrap(), expect, max_relative = 1e-10);
            }
            assert_relative_eq!(spheroid_reference(&s, -1).unwrap(), 4.0 / 3.0 * PI * r.powi(3), max_relative = 1e-14);
        }
    }

    #[test]
    fn spheroid_area_and_gauss_bonnet() {
        for (a, c) in [(1.0, 1.1), (1.0, 0.8), (1.3, 0.9)] {
            let s = SpheroidSpec::new(a, c).unwrap();
            assert_relative_eq!(spheroid_reference(&s, 0).unwrap(), s.area(), max_relative = 1e-10);
            assert_relative_eq!(spheroid_reference(&s, 2).unwrap(), 4.0 * PI, max_relative = 1e-10);
        }
        assert!(SpheroidSpec::new(0.0, 1.0).is_err());
        assert!(spheroid_reference(&SpheroidSpec::new(1.0, 1.0).unwrap(), 3).is_err());
    }

    #[test]
    fn spheroid_curvatures_at_poles_and_equator() {
        let s = SpheroidSpec::new(1.0, 1.1).unwrap();
        // at the pole both curvatures are c / a^2
        let (km, kp) = s.curvatures_along([0.0, 0.0, 1.0]);
        assert_relative_eq!(km, 1.1, epsilon = 1e-14);
        assert_relative_eq!(kp, 1.1, epsilon = 1e-14);
        // on the equator: a / c^2 along the meridian, 1 / a along the parallel
        let (km, kp) = s.curvatures_along([1.0, 0.0, 0.0]);
        assert_relative_eq!(km, 1.0 / 1.21, epsilon = 1e-14);
        assert_relative_eq!(kp, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn translated_ball_radius_hits_sphere() {
        let c = [0.0, 0.1, 0.2];
        for x in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.0, 0.0, -1.0]] {
            let t = translated_ball_radius(c, 1.0, x);
            let p = [t * x[0] - c[0], t * x[1] - c[1], t * x[2] - c[2]];
            assert_relative_eq!(p.iter().map(|v| v * v).sum::<f64>(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn fd_examples() {
        let sq: Vec<(f64, f64)> = (0..5).map(|i| (0.5 * i as f64, (0.5 * i as f64).powi(2))).collect();
        assert_relative_eq!(fd_time_derivative(&sq, 1.0).unwrap(), 2.0, epsilon = 1e-12);
        let flat = vec![(0.0, 3.0), (0.1, 3.0), (0.2, 3.0)];
        assert_eq!(fd_time_derivative(&flat, 0.1).unwrap(), 0.0);
        let h: f64 = 1e-3;
        let ex: Vec<(f64, f64)> = [1.0 - h, 1.0, 1.0 + h].iter().map(|&t: &f64| (t, (t / 2.0).exp())).collect();
        assert!((fd_time_derivative(&ex, 1.0).unwrap() - 0.5 * 0.5f64.exp()).abs() < 1e-6);
        assert!(fd_time_derivative(&flat[..2], 0.1).is_err());
        assert!(fd_time_derivative(&flat, 0.5).is_err());
    }
}
