//! Closed forms for the minimal photon numbers `n_l = l`, `l = 0..N-1`.

use crate::error::{Error, Result};
use crate::numeric::{binomial_dd, dd, dd_div, dd_pow, to_f64, Dd, DdComplex};

use super::beam_splitter::BeamSplitter;

/// Below this `|2 - (1-T)^N|` the general cofactor form is replaced by its
/// limit at the optimum.
pub const OPTIMUM_SWITCH: f64 = 1e-8;

/// `T = 1 - 2^{1/N}`.
pub fn optimal_transmission(n: usize) -> f64 {
    1.0 - 2f64.powf(1.0 / n as f64)
}

/// `T = 1 - 2^{1/N}` to double-double precision, from Newton steps on
/// `u^N = 2` with `u = 1 - T`.
pub fn optimal_beam_splitter(n: usize) -> Result<BeamSplitter> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let mut u = dd(2f64.powf(1.0 / n as f64));
    for _ in 0..3 {
        let un1 = dd_pow(u, n as u32 - 1);
        u -= dd_div(un1 * u - 2.0, un1 * n as f64);
    }
    BeamSplitter::from_dd(DdComplex::new(-u + 1.0, dd(0.0)))
}

fn pairs(n: usize) -> u32 {
    (n * n.saturating_sub(1) / 2) as u32
}

fn t2m1(t: Dd) -> Dd {
    t * t - 1.0
}

/// `det a = (T²-1)^{N(N-1)/2} [2 - (1-T)^N]` for real `T`.
pub fn det_closed_form(n: usize, t: f64) -> f64 {
    let t = dd(t);
    let bracket = -dd_pow(-t + 1.0, n as u32) + 2.0;
    to_f64(dd_pow(t2m1(t), pairs(n)) * bracket)
}

/// `det a⁽²⁾ = (T²-1)^{N(N-1)/2}`.
pub fn simple_det_closed_form(n: usize, t: f64) -> f64 {
    to_f64(dd_pow(t2m1(dd(t)), pairs(n)))
}

/// Sum over single-column replacements of `a⁽²⁾` by `a⁽¹⁾`:
/// `(T²-1)^{N(N-1)/2} [1 - (1-T)^N]`.
pub fn replacement_sum_closed_form(n: usize, t: f64) -> f64 {
    let t = dd(t);
    let bracket = -dd_pow(-t + 1.0, n as u32) + 1.0;
    to_f64(dd_pow(t2m1(t), pairs(n)) * bracket)
}

/// `s_l = T^{-l} Σ_{p=0}^{N-1} C(p,l) (T/(T+1))^p`.
pub fn alternation_factor(n: usize, l: usize, t: f64) -> Result<f64> {
    check_pole_free(n, t)?;
    Ok(to_f64(alternation_factor_dd(n, l, dd(t))))
}

fn alternation_factor_dd(n: usize, l: usize, t: Dd) -> Dd {
    let ratio = dd_div(t, t + 1.0);
    let mut sum = dd(0.0);
    for p in l..n {
        sum += binomial_dd(p as i64, l as i64) * dd_pow(ratio, p as u32);
    }
    dd_div(sum, dd_pow(t, l as u32))
}

/// Generating-function form of [`alternation_factor`]:
/// `(T+1)^{1-N} Σ_{j=0}^{N-l-1} C(N,j) T^j`.
pub fn alternation_factor_generating(n: usize, l: usize, t: f64) -> Result<f64> {
    check_pole_free(n, t)?;
    let t = dd(t);
    Ok(to_f64(
        dd_div(binomial_partial_sum_dd(n - l - 1, n, t), dd_pow(t + 1.0, (n - 1) as u32)),
    ))
}

fn binomial_partial_sum_dd(j: usize, n: usize, t: Dd) -> Dd {
    (0..=j).fold(dd(0.0), |acc, i| {
        acc + binomial_dd(n as i64, i as i64) * dd_pow(t, i as u32)
    })
}

/// `f_{j,N}(T) = Σ_{i=0}^{j} C(N,i) T^i`; non-negative for `T ≥ -1/N`, `j < N`.
pub fn binomial_partial_sum(j: usize, n: usize, t: f64) -> f64 {
    to_f64(binomial_partial_sum_dd(j, n, dd(t)))
}

fn check_pole_free(n: usize, t: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    if t == 0.0 || (t == -1.0 && n > 1) {
        return Err(Error::Pole(format!("cofactor closed form at T = {t}")));
    }
    Ok(())
}

/// Closed form of the last-row cofactor `A_{N,l+1}` (column index `l` is
/// 0-based) for minimal photon numbers.
///
/// Uses the general-`T` form, switching to its limit at the optimum when
/// `|2 - (1-T)^N| < OPTIMUM_SWITCH`.
pub fn cofactor_closed_form(n: usize, l: usize, t: f64) -> Result<f64> {
    if l >= n {
        return Err(Error::InvalidArgument(format!("column {l} out of range for N = {n}")));
    }
    if n == 1 {
        return Ok(1.0);
    }
    check_pole_free(n, t)?;
    let td = dd(t);
    let gap = -dd_pow(-td + 1.0, n as u32) + 2.0;
    if f64::from(gap).abs() < OPTIMUM_SWITCH {
        Ok(to_f64(cofactor_at_optimum_dd(n, l, td)))
    } else {
        Ok(to_f64(cofactor_general_dd(n, l, td, gap)))
    }
}

/// Optimum term plus `(-1)^{N-l+1} (T²-1)^{(N-1)(N-2)/2} [2-(1-T)^N] C(N-1,l) T^{N-l-1}`.
fn cofactor_general_dd(n: usize, l: usize, t: Dd, gap: Dd) -> Dd {
    let sign = if (n - l + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let second = dd_pow(t2m1(t), ((n - 1) * (n - 2) / 2) as u32)
        * gap
        * binomial_dd((n - 1) as i64, l as i64)
        * dd_pow(t, (n - l - 1) as u32)
        * sign;
    cofactor_at_optimum_dd(n, l, t) + second
}

/// `A_{N,l+1} = N (T²-1)^{N(N-1)/2} (-1)^{1-l} T^{1-l} Σ_p C(p,l)(T/(T+1))^p`.
fn cofactor_at_optimum_dd(n: usize, l: usize, t: Dd) -> Dd {
    let base = dd_pow(t2m1(t), pairs(n));
    let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
    base * t * (n as f64) * alternation_factor_dd(n, l, t) * sign
}

/// `Σ_l a⁽²⁾_{Nl} A_{Nl} = N T (T²-1)^{N(N-1)/2}` at the optimum, in the
/// stated sign convention.
pub fn numerator_closed_form(n: usize, t: f64) -> f64 {
    let t = dd(t);
    to_f64(dd_pow(t2m1(t), pairs(n)) * t * (n as f64))
}

/// `(Σ_m |A_{Nm}|)² = N⁴ T² (T²-1)^{N(N-1)}` at the optimum.
pub fn denominator_closed_form(n: usize, t: f64) -> f64 {
    let t = dd(t);
    let nf = dd(n as f64);
    to_f64(dd_pow(nf, 4) * t * t * dd_pow(t2m1(t), 2 * pairs(n)))
}
