//! Elementary symmetric polynomials, Newton transformation tensors and the
//! Garding cone.
//!
//! Everything here is generic in the dimension `n`. Matrices are
//! mixed-index tensors `A^i_j` stored row `i`, column `j`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Square matrix type used for mixed tensors.
pub type SquareMatrix = DMatrix<f64>;

/// Largest dimension accepted by the matrix routines.
pub const MAX_DIM: usize = 16;

/// Binomial coefficient as a float. Returns 0 outside `0 <= k <= n`.
pub fn binomial(n: usize, k: i64) -> f64 {
    if k < 0 || k as usize > n {
        return 0.0;
    }
    let k = (k as usize).min(n - k as usize);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// All of `sigma_0 .. sigma_n` of `lambda` by the prefix recurrence
/// `e_k(l_1..l_m) = e_k(l_1..l_{m-1}) + l_m e_{k-1}(l_1..l_{m-1})`.
pub fn sigma_all(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (m, &l) in lambda.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            e[k] += l * e[k - 1];
        }
    }
    e
}

/// `sigma_0 .. sigma_kmax` only; `O(n * kmax)`.
pub fn sigma_upto(lambda: &[f64], kmax: usize) -> Vec<f64> {
    let kmax = kmax.min(lambda.len());
    let mut e = vec![0.0; kmax + 1];
    e[0] = 1.0;
    for (m, &l) in lambda.iter().enumerate() {
        for k in (1..=kmax.min(m + 1)).rev() {
            e[k] += l * e[k - 1];
        }
    }
    e
}

/// The k-th elementary symmetric polynomial of `lambda`.
pub fn sigma_k(lambda: &[f64], k: usize) -> Result<f64> {
    let n = lambda.len();
    if n == 0 {
        return Err(Error::domain("empty eigenvalue list"));
    }
    if k > n {
        return Err(Error::domain(format!("sigma_k: k = {k} exceeds n = {n}")));
    }
    Ok(sigma_upto(lambda, k)[k])
}

/// `sigma_k` of `lambda` with the i-th entry removed.
pub fn sigma_k_without(lambda: &[f64], skip: usize, k: usize) -> f64 {
    let rest: Vec<f64> = lambda
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &l)| l)
        .collect();
    if k > rest.len() {
        return 0.0;
    }
    sigma_upto(&rest, k)[k]
}

fn check_square(a: &SquareMatrix) -> Result<usize> {
    let n = a.nrows();
    if n == 0 || n != a.ncols() {
        return Err(Error::domain(format!(
            "expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n > MAX_DIM {
        return Err(Error::domain(format!("dimension {n} exceeds {MAX_DIM}")));
    }
    Ok(n)
}

/// Runs the Newton trace recursion up to order `m`, returning
/// `(sigma_0..sigma_m, T_m)`.
fn newton_recursion(a: &SquareMatrix, m: usize) -> (Vec<f64>, SquareMatrix) {
    let n = a.nrows();
    let mut sig = Vec::with_capacity(m + 1);
    sig.push(1.0);
    let mut t = SquareMatrix::identity(n, n);
    for j in 1..=m {
        let at = a * &t;
        let s = at.trace() / j as f64;
        sig.push(s);
        t = SquareMatrix::identity(n, n) * s - at;
    }
    (sig, t)
}

/// `sigma_k` of the eigenvalues of `a`, via `sigma_j = tr(A T_{j-1}) / j`.
pub fn sigma_k_matrix(a: &SquareMatrix, k: usize) -> Result<f64> {
    let n = check_square(a)?;
    if k > n {
        return Err(Error::domain(format!("sigma_k_matrix: k = {k} exceeds n = {n}")));
    }
    Ok(newton_recursion(a, k).0[k])
}

/// Newton transformation tensor `T_m(A)`: `T_0 = I`,
/// `T_m = sigma_m(A) I - A T_{m-1}`.
pub fn newton_tensor(a: &SquareMatrix, m: usize) -> Result<SquareMatrix> {
    let n = check_square(a)?;
    if m > n {
        return Err(Error::domain(format!("newton_tensor: m = {m} exceeds n = {n}")));
    }
    Ok(newton_recursion(a, m).1)
}

/// Polarization `Sigma_m(A_1, .., A_m)` of `sigma_m`.
///
/// The coefficient of `t_1 t_2 .. t_m` in `sigma_m(t_1 A_1 + .. + t_m A_m)`
/// is extracted by inclusion-exclusion over the `2^m` corner evaluations,
/// then divided by `(m-1)!`.
pub fn polarized_sigma(mats: &[SquareMatrix]) -> Result<f64> {
    let m = mats.len();
    if m == 0 {
        return Err(Error::domain("polarized_sigma needs at least one matrix"));
    }
    let n = check_square(&mats[0])?;
    if mats.iter().any(|a| a.nrows() != n || a.ncols() != n) {
        return Err(Error::domain("polarized_sigma: mismatched matrix sizes"));
    }
    if m > n {
        return Err(Error::domain(format!("polarized_sigma: m = {m} exceeds n = {n}")));
    }
    let mut coeff = 0.0;
    for mask in 1u32..(1u32 << m) {
        let mut sum = SquareMatrix::zeros(n, n);
        for (i, a) in mats.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum += a;
            }
        }
        let sign = if (m as u32 - mask.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
        coeff += sign * newton_recursion(&sum, m).0[m];
    }
    let fact: f64 = (1..m).map(|i| i as f64).product();
    Ok(coeff / fact)
}

/// Strict membership in the Garding cone: `sigma_j(lambda) > 0` for all
/// `1 <= j <= k`. Orders above `n` are never positive, so `k > n` is false.
pub fn garding_member(lambda: &[f64], k: usize) -> bool {
    if k > lambda.len() {
        return false;
    }
    sigma_upto(lambda, k)[1..].iter().all(|&s| s > 0.0)
}

/// Result of [`newton_maclaurin_gap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaclaurinGap {
    /// `c_k sigma_k^2 - sigma_{k+1} sigma_{k-1}`.
    pub value: f64,
    /// Whether `lambda` lies in the cone `Gamma_k^+`.
    pub in_cone: bool,
}

/// Newton-Maclaurin gap
/// `C(n,k+1) C(n,k-1) / C(n,k)^2 * sigma_k^2 - sigma_{k+1} sigma_{k-1}`.
pub fn newton_maclaurin_gap(lambda: &[f64], k: usize) -> Result<MaclaurinGap> {
    let n = lambda.len();
    if k == 0 || k + 1 > n {
        return Err(Error::domain(format!(
            "newton_maclaurin_gap needs 1 <= k <= n-1 (k = {k}, n = {n})"
        )));
    }
    let s = sigma_upto(lambda, k + 1);
    let ki = k as i64;
    let c = binomial(n, ki + 1) * binomial(n, ki - 1) / (binomial(n, ki) * binomial(n, ki));
    Ok(MaclaurinGap {
        value: c * s[k] * s[k] - s[k + 1] * s[k - 1],
        in_cone: s[1..=k].iter().all(|&v| v > 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(v: &[f64]) -> SquareMatrix {
        SquareMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_k(&[1.0, 1.0, 1.0], 2).unwrap(), 3.0);
        assert_eq!(sigma_k(&[1.0, 2.0, 3.0], 0).unwrap(), 1.0);
        assert_eq!(sigma_k(&[1.0, 2.0, 3.0], 2).unwrap(), 11.0);
        assert!(sigma_k(&[1.0, 2.0], 3).is_err());
        assert!(sigma_k(&[], 0).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(2, -1), 0.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(binomial(16, 8), 12870.0);
    }

    #[test]
    fn matrix_sigma_examples() {
        for n in 1..=5 {
            let id = SquareMatrix::identity(n, n);
            for k in 0..=n {
                assert_relative_eq!(
                    sigma_k_matrix(&id, k).unwrap(),
                    binomial(n, k as i64),
                    epsilon = 1e-12
                );
            }
        }
        let a = diag(&[1.0, 2.0, 3.0]);
        assert_relative_eq!(sigma_k_matrix(&a, 2).unwrap(), 11.0, epsilon = 1e-12);
        assert_eq!(sigma_k_matrix(&a, 0).unwrap(), 1.0);
        assert!(sigma_k_matrix(&SquareMatrix::zeros(2, 3), 1).is_err());
    }

    #[test]
    fn newton_tensor_examples() {
        let a = diag(&[1.0, 2.0, 3.0]);
        assert_eq!(newton_tensor(&a, 0).unwrap(), SquareMatrix::identity(3, 3));
        let id = SquareMatrix::identity(3, 3);
        assert_relative_eq!(newton_tensor(&id, 1).unwrap(), id.clone() * 2.0, epsilon = 1e-14);
        assert_relative_eq!(
            newton_tensor(&a, 1).unwrap(),
            diag(&[5.0, 4.0, 3.0]),
            epsilon = 1e-14
        );
        // Cayley-Hamilton: T_n = 0.
        assert!(newton_tensor(&a, 3).unwrap().norm() < 1e-12);
        assert!(newton_tensor(&a, 4).is_err());
    }

    #[test]
    fn polarization_examples() {
        let i2 = SquareMatrix::identity(2, 2);
        assert_relative_eq!(polarized_sigma(&[i2.clone(), i2]).unwrap(), 2.0, epsilon = 1e-12);
        let a = diag(&[1.0, 2.0, 3.0]);
        assert_relative_eq!(
            polarized_sigma(&[a.clone(), a.clone(), a]).unwrap(),
            18.0,
            epsilon = 1e-10
        );
        let p = polarized_sigma(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap();
        assert_relative_eq!(p, 1.0, epsilon = 1e-12);
        assert!(polarized_sigma(&[diag(&[1.0, 0.0]), diag(&[1.0, 0.0, 0.0])]).is_err());
    }

    #[test]
    fn polarization_two_matrices_closed_form() {
        // Sigma_2(A, B) = tr A tr B - tr(AB).
        let a = SquareMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 0.0, 2.0, 1.0, -0.7]);
        let b = SquareMatrix::from_row_slice(3, 3, &[0.2, -1.0, 1.0, 0.0, 1.5, 0.4, 0.1, 0.9, 2.0]);
        let expect = a.trace() * b.trace() - (&a * &b).trace();
        assert_relative_eq!(polarized_sigma(&[a, b]).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn garding_examples() {
        assert!(garding_member(&[1.0, 1.0, 1.0], 3));
        assert!(!garding_member(&[-1.0, -1.0, -1.0], 1));
        assert!(garding_member(&[3.0, 3.0, -1.0], 2));
        assert!(!garding_member(&[3.0, 3.0, -1.0], 3));
        assert!(!garding_member(&[1.0, 1.0], 3));
        // boundary of the cone is excluded
        assert!(!garding_member(&[1.0, 0.0], 2));
    }

    #[test]
    fn maclaurin_examples() {
        let g = newton_maclaurin_gap(&[1.0, 1.0, 1.0], 2).unwrap();
        assert_relative_eq!(g.value, 0.0, epsilon = 1e-14);
        assert!(g.in_cone);
        let g = newton_maclaurin_gap(&[1.0, 2.0, 3.0], 1).unwrap();
        assert_relative_eq!(g.value, 1.0, epsilon = 1e-12);
        let g = newton_maclaurin_gap(&[2.0, 2.0, 2.0], 2).unwrap();
        assert_relative_eq!(g.value, 0.0, epsilon = 1e-12);
        let g = newton_maclaurin_gap(&[-1.0, -2.0, 0.5], 1).unwrap();
        assert!(!g.in_cone);
        assert!(newton_maclaurin_gap(&[1.0, 2.0], 2).is_err());
        assert!(newton_maclaurin_gap(&[1.0, 2.0], 0).is_err());
    }
}
