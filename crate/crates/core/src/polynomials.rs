//! Jacobi polynomials `P_k^{(0,β)}`, the S-polynomial family and the
//! symmetric-polynomial expansions built on them.
//!
//! `S_k^{(x)}(n)` is the degree-`k` polynomial in the photon number `n` with
//!
//! ```text
//! S_k^{(x)}(n) = Σ_p c_kp n^p,   c_kp = Σ_{m=p}^{k} C(k,m) (x²-1)^m / m! · σ_{m-p}^{(m)}
//! ```
//!
//! where `σ_j^{(m)}` is the elementary symmetric polynomial of degree `j` in
//! the integers `1..m`. At integer `n` it coincides with
//! `P_k^{(0,n-k)}(2x²-1)`.
//!
//! All sums are accumulated in double-double arithmetic. Both the Jacobi sums
//! and the monomial expansion cancel heavily near `x = 0` and at large order,
//! and plain `f64` loses most of its digits there.

use crate::error::{Error, Result};
use crate::numeric::{binomial_dd, binomial_exact, dd, dd_div, dd_int, dd_pow, factorial_dd, sign, to_f64, Dd};

/// Largest order whose σ-table fits in 128-bit integers (`σ_m^{(m)} = m!`).
pub const SIGMA_EXACT_MAX: u32 = 33;

/// Elementary symmetric polynomial `σ_j^{(m)}` of the integers `1..=m`.
pub fn elementary_sigma(m: u32, j: u32) -> Result<i128> {
    if j > m {
        return Err(Error::InvalidArgument(format!(
            "sigma degree {j} exceeds the number of variables {m}"
        )));
    }
    Ok(sigma_row(m)?[j as usize])
}

/// `[σ_0^{(m)}, ..., σ_m^{(m)}]`, the coefficients of `∏_{i=1}^m (n + i)`
/// read from the highest power of `n` down.
pub(crate) fn sigma_row(m: u32) -> Result<Vec<i128>> {
    let mut row = vec![0i128; m as usize + 1];
    row[0] = 1;
    for i in 1..=m as usize {
        for j in (1..=i).rev() {
            row[j] = row[j - 1]
                .checked_mul(i as i128)
                .and_then(|v| v.checked_add(row[j]))
                .ok_or(Error::BinomialOverflow {
                    upper: m as i64,
                    lower: j as i64,
                })?;
        }
    }
    Ok(row)
}

/// `P_k^{(0,β)}` evaluated from `t2 = (1 + x)/2` (which is `|T|²` for the
/// beam-splitter argument `x = 2|T|² - 1`).
///
/// For `t2 >= 1/2` the finite sum in powers of `(x-1)/2 = t2 - 1` is used;
/// below that the mirrored sum from `P_k^{(0,β)}(x) = (-1)^k P_k^{(β,0)}(-x)`
/// in powers of `-(1+x)/2 = -t2`, so the expansion variable never exceeds 1/2.
pub(crate) fn jacobi_t2(k: u32, beta: i64, t2: Dd) -> Dd {
    let k_i = k as i64;
    let upper = k_i + beta;
    let mut acc = dd(0.0);
    if t2 >= 0.5 {
        let y = t2 - 1.0;
        let mut y_pow = dd(1.0);
        for m in 0..=k_i {
            let term = binomial_dd(k_i, m) * binomial_dd(upper + m, m);
            acc += term * y_pow;
            y_pow *= y;
        }
        acc
    } else {
        let y = -t2;
        let mut y_pow = dd(1.0);
        for m in 0..=k_i {
            let term = binomial_dd(upper, k_i - m) * binomial_dd(upper + m, m);
            acc += term * y_pow;
            y_pow *= y;
        }
        acc * sign(k_i)
    }
}

/// Jacobi polynomial `P_k^{(0,β)}(x)` for integer `β` of either sign.
///
/// Equals `Σ_{m=0}^{k} C(k,m) C(k+β+m, m) ((x-1)/2)^m` with binomials of
/// negative upper index taken from the falling-factorial product.
pub fn jacobi(k: u32, beta: i64, x: f64) -> f64 {
    let t2 = (dd(x) + 1.0) / 2.0;
    to_f64(jacobi_t2(k, beta, t2))
}

/// The S-polynomial `S_k^{(x)}` in its monomial representation.
#[derive(Debug, Clone)]
pub struct SPoly {
    order: u32,
    x: f64,
    coeffs: Vec<Dd>,
}

impl SPoly {
    pub fn new(order: u32, x: f64) -> Result<Self> {
        if order > SIGMA_EXACT_MAX {
            return Err(Error::InvalidArgument(format!(
                "S-polynomial order {order} exceeds {SIGMA_EXACT_MAX}"
            )));
        }
        let k = order as i64;
        let y = dd(x) * dd(x) - 1.0;
        let sigmas: Vec<Vec<i128>> = (0..=order).map(sigma_row).collect::<Result<_>>()?;
        let weights: Vec<Dd> = (0..=order)
            .map(|m| dd_div(binomial_dd(k, m as i64) * dd_pow(y, m), factorial_dd(m)))
            .collect();
        let coeffs = (0..=order as usize)
            .map(|p| {
                (p..=order as usize).fold(dd(0.0), |acc, m| acc + weights[m] * dd_int(sigmas[m][m - p]))
            })
            .collect();
        Ok(Self { order, x, coeffs })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// `c_k0, ..., c_kk`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.coeffs.iter().map(|&c| to_f64(c)).collect()
    }

    pub fn leading_coefficient(&self) -> f64 {
        to_f64(self.coeffs[self.order as usize])
    }

    fn horner(&self, n: i64) -> Dd {
        let n = dd_int(n as i128);
        self.coeffs.iter().rev().fold(dd(0.0), |acc, &c| acc * n + c)
    }

    /// `S_k^{(x)}(n)` from the monomial coefficients. Loses accuracy to
    /// cancellation among the `c_kp` for large `k` and small `|x|`.
    pub fn eval_monomial(&self, n: i64) -> f64 {
        to_f64(self.horner(n))
    }

    pub(crate) fn eval_dd(&self, n: i64) -> Dd {
        spoly_eval_dd(self.order, self.x, n)
    }

    /// `S_k^{(x)}(n)`.
    pub fn eval(&self, n: i64) -> f64 {
        to_f64(self.eval_dd(n))
    }
}

/// `Σ_{m=0}^{k} C(k,m) (x²-1)^m (n+1)(n+2)...(n+m)/m!`, the S-polynomial
/// before its rising factorials are expanded into monomials.
fn rising_form(k: u32, x: f64, n: i64) -> Dd {
    let y = dd(x) * dd(x) - 1.0;
    let mut acc = dd(0.0);
    let mut y_pow = dd(1.0);
    for m in 0..=k as i64 {
        acc += binomial_dd(k as i64, m) * binomial_dd(n + m, m) * y_pow;
        y_pow *= y;
    }
    acc
}

pub(crate) fn spoly_eval_dd(k: u32, x: f64, n: i64) -> Dd {
    let k_i = k as i64;
    if (0..k_i).contains(&n) {
        dd_pow(dd(x) * dd(x), (k_i - n) as u32) * rising_form(n as u32, x, k_i)
    } else {
        rising_form(k, x, n)
    }
}

/// `S_k^{(x)}(n)`.
pub fn spoly_eval(k: u32, x: f64, n: i64) -> f64 {
    to_f64(spoly_eval_dd(k, x, n))
}

/// One step of the three-term recursion
/// `k S_k = [(x²-1)(n+k) + 2k - 1] S_{k-1} - (k-1) x² S_{k-2}`.
pub fn spoly_recursion_step(k: u32, x: f64, n: i64, s_km1: f64, s_km2: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "recursion needs k >= 2, got {k}"
        )));
    }
    let x2 = dd(x) * dd(x);
    let kk = dd(k as f64);
    let a = (x2 - 1.0) * dd_int((n + k as i64) as i128) + (kk * 2.0 - 1.0);
    let b = (kk - 1.0) * x2;
    Ok(to_f64((a * dd(s_km1) - b * dd(s_km2)) / k as f64))
}

/// Symmetric polynomial over the S-basis,
/// `s_{N-j}(x; p; N) = C(p,j) x^{2(p-j)} (1-x²)^{N-p}`.
pub fn symmetric_s(x: f64, p: u32, j: u32, n_total: u32) -> Result<f64> {
    Ok(to_f64(symmetric_s_dd(x, p, j, n_total)?))
}

fn symmetric_s_dd(x: f64, p: u32, j: u32, n_total: u32) -> Result<Dd> {
    if p > n_total || j > n_total {
        return Err(Error::InvalidArgument(format!(
            "need p <= N and j <= N, got p = {p}, j = {j}, N = {n_total}"
        )));
    }
    if j > p {
        return Ok(dd(0.0));
    }
    let x2 = dd(x) * dd(x);
    Ok(binomial_dd(p as i64, j as i64) * dd_pow(x2, p - j) * dd_pow(-x2 + 1.0, n_total - p))
}

/// Coefficients of the one-gap expansion of `(x²-1)^N C(l, N+1)/(l-q)` over
/// `S_j^{(x)}(l)`:
/// `s^{(q)}_{N-j}(x;N) = Σ_r (-1)^{N-r} C(r,q) s_{N-j}(x;r;N) / ((N+1) C(N,q))`.
pub fn one_gap_symmetric_s(x: f64, q: u32, j: u32, n_total: u32) -> Result<f64> {
    if q > n_total || j > n_total {
        return Err(Error::InvalidArgument(format!(
            "need q <= N and j <= N, got q = {q}, j = {j}, N = {n_total}"
        )));
    }
    let mut acc = dd(0.0);
    for r in 0..=n_total {
        let c = binomial_dd(r as i64, q as i64);
        if c == 0.0 {
            continue;
        }
        acc += c * symmetric_s_dd(x, r, j, n_total)? * sign((n_total - r) as i64);
    }
    let norm = dd((n_total + 1) as f64) * binomial_dd(n_total as i64, q as i64);
    Ok(to_f64(dd_div(acc, norm)))
}

fn check_gap(p: u32, q: u32) -> Result<()> {
    if p == 0 || q >= p {
        return Err(Error::InvalidArgument(format!(
            "gap q = {q} must lie in [0, p) with p = {p} >= 1"
        )));
    }
    Ok(())
}

/// `C(l,p)/(l-q)` through its expansion in binomials `C(l,r)`, `r < p`:
/// `Σ_{r=0}^{p-1} (-1)^{p-1-r} C(r,q) C(l,r) / (p C(p-1,q))`.
/// Well defined at `l = q`, where the quotient form is not.
pub fn gapped_binomial_expand(p: u32, q: u32, l: i64) -> Result<f64> {
    check_gap(p, q)?;
    let mut numerator: i128 = 0;
    for r in 0..p as i64 {
        let term = binomial_exact(r, q as i64)?
            .checked_mul(binomial_exact(l, r)?)
            .ok_or(Error::BinomialOverflow { upper: l, lower: r })?;
        numerator += term * sign(p as i64 - 1 - r) as i128;
    }
    let denominator = p as i128 * binomial_exact(p as i64 - 1, q as i64)?;
    Ok(to_f64(dd_div(dd_int(numerator), dd_int(denominator))))
}

/// `(1/p!) ∏_{k=0, k≠q}^{p-1} (l-k)`, the product form of `C(l,p)/(l-q)`.
pub fn gapped_binomial_product(p: u32, q: u32, l: i64) -> Result<f64> {
    check_gap(p, q)?;
    let prod = (0..p as i64)
        .filter(|&k| k != q as i64)
        .fold(dd(1.0), |acc, k| acc * dd_int((l - k) as i128));
    Ok(to_f64(dd_div(prod, factorial_dd(p))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn jacobi_order_zero_is_one() {
        for beta in -5..5 {
            for &x in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
                assert_eq!(jacobi(0, beta, x), 1.0);
            }
        }
    }

    #[test]
    fn jacobi_order_one_hand_expansion() {
        for n in 0..10i64 {
            for &t in &[-0.9, -0.4142, 0.1, 0.5, 0.99] {
                let expected = 1.0 + (n + 1) as f64 * (t * t - 1.0);
                assert!(close(jacobi(1, n - 1, 2.0 * t * t - 1.0), expected, 1e-13));
            }
        }
    }

    #[test]
    fn jacobi_legendre_special_case() {
        // beta = 0 gives Legendre polynomials
        let x: f64 = 0.3;
        let p3 = 0.5 * (5.0 * x.powi(3) - 3.0 * x);
        assert!(close(jacobi(3, 0, x), p3, 1e-14));
    }

    #[test]
    fn jacobi_matches_s_polynomial_at_landmark() {
        let x = 1.0 - 2f64.sqrt();
        let lhs = jacobi(2, 0, 2.0 * x * x - 1.0);
        assert!(close(lhs, spoly_eval(2, x, 2), 1e-14));
    }

    #[test]
    fn spoly_special_values() {
        for k in 0..12 {
            for n in -6..15 {
                assert!(close(spoly_eval(k, 1.0, n), 1.0, 1e-14));
                assert!(close(spoly_eval(k, -1.0, n), 1.0, 1e-14));
                // x = 0 gives (-1)^k C(n,k), the Jacobi endpoint value P_k^{(0,β)}(-1)
                let binom = crate::numeric::sign(k as i64) * crate::numeric::binomial(n, k as i64);
                assert!((spoly_eval(k, 0.0, n) - binom).abs() <= 1e-12 * binom.abs().max(1.0));
            }
        }
    }

    #[test]
    fn monomial_form_agrees_at_low_order() {
        for k in 0..7 {
            let poly = SPoly::new(k, 0.45).unwrap();
            for n in -5..12 {
                let v = poly.eval(n);
                assert!((poly.eval_monomial(n) - v).abs() <= 1e-12 * v.abs().max(1.0), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn spoly_cross_evaluates_with_jacobi() {
        assert!(close(spoly_eval(3, 0.5, 7), jacobi(3, 4, -0.5), 1e-14));
    }

    #[test]
    fn spoly_leading_coefficient() {
        for k in 0..10u32 {
            let x = 0.37;
            let poly = SPoly::new(k, x).unwrap();
            let expected = (x * x - 1.0f64).powi(k as i32) / to_f64(factorial_dd(k));
            assert!(close(poly.leading_coefficient(), expected, 1e-14));
            assert_eq!(poly.coefficients().len(), k as usize + 1);
        }
    }

    #[test]
    fn recursion_step_examples() {
        assert_eq!(spoly_recursion_step(2, 1.0, 7, 1.0, 1.0).unwrap(), 1.0);
        // S_1^{(0)}(4) = -4, S_2^{(0)}(4) = C(4,2)
        assert_eq!(spoly_recursion_step(2, 0.0, 4, -4.0, 1.0).unwrap(), 6.0);
        let (x, n) = (0.3, 9);
        let s = spoly_recursion_step(5, x, n, spoly_eval(4, x, n), spoly_eval(3, x, n)).unwrap();
        assert!(close(s, spoly_eval(5, x, n), 1e-12));
        assert!(spoly_recursion_step(1, x, n, 1.0, 1.0).is_err());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(elementary_sigma(0, 0).unwrap(), 1);
        assert_eq!(
            (0..=2).map(|j| elementary_sigma(2, j).unwrap()).collect::<Vec<_>>(),
            vec![1, 3, 2]
        );
        assert_eq!(elementary_sigma(3, 2).unwrap(), 11);
        assert_eq!(elementary_sigma(20, 20).unwrap(), 2432902008176640000);
        assert!(elementary_sigma(3, 4).is_err());
        assert!(elementary_sigma(40, 40).is_err());
    }

    #[test]
    fn symmetric_s_examples() {
        assert!(close(symmetric_s(0.5, 2, 1, 3).unwrap(), 0.375, 1e-15));
        // p = N reduces to C(N,j) x^{2(N-j)}
        for j in 0..=5 {
            let x: f64 = 0.8;
            let expected = crate::numeric::binomial(5, j as i64) * x.powi(2 * (5 - j as i32));
            assert!(close(symmetric_s(x, 5, j, 5).unwrap(), expected, 1e-14));
        }
        // j = p leaves (1-x²)^{N-p}
        assert!(close(symmetric_s(0.6, 2, 2, 4).unwrap(), 0.64f64.powi(2), 1e-14));
        assert_eq!(symmetric_s(0.6, 2, 3, 4).unwrap(), 0.0);
        assert!(symmetric_s(0.6, 5, 1, 4).is_err());
    }

    #[test]
    fn gapped_binomial_examples() {
        assert_eq!(gapped_binomial_expand(1, 0, 5).unwrap(), 1.0);
        assert_eq!(gapped_binomial_expand(2, 0, 3).unwrap(), 1.0);
        assert!(close(gapped_binomial_expand(3, 1, 1).unwrap(), -1.0 / 6.0, 1e-15));
        assert!(close(gapped_binomial_product(3, 1, 1).unwrap(), -1.0 / 6.0, 1e-15));
        assert!(gapped_binomial_expand(3, 3, 1).is_err());
        assert!(gapped_binomial_expand(0, 0, 1).is_err());
    }

    #[test]
    fn gapped_binomial_matches_product_at_singular_point() {
        for p in 1..9u32 {
            for q in 0..p {
                for l in -10..20i64 {
                    let a = gapped_binomial_expand(p, q, l).unwrap();
                    let b = gapped_binomial_product(p, q, l).unwrap();
                    assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "p={p} q={q} l={l}");
                }
            }
        }
    }
}
