//! Exact integer combinatorics and double-double helpers shared by the
//! polynomial, determinant and solver modules.

use num_complex::Complex;
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Double-double real.
pub type Dd = TwoFloat;
/// Double-double complex.
pub type DdComplex = Complex<TwoFloat>;

pub(crate) fn dd(x: f64) -> Dd {
    TwoFloat::from(x)
}

pub(crate) fn dd_int(x: i128) -> Dd {
    TwoFloat::from(x)
}

pub(crate) fn to_f64(x: Dd) -> f64 {
    f64::from(x)
}

pub(crate) fn c_to_f64(z: DdComplex) -> Complex<f64> {
    Complex::new(to_f64(z.re), to_f64(z.im))
}

pub(crate) fn c_abs(z: DdComplex) -> Dd {
    let n = z.re * z.re + z.im * z.im;
    if n == 0.0 {
        n
    } else {
        n.sqrt()
    }
}

/// `x^e` with `0^0 = 1`.
pub(crate) fn dd_pow(x: Dd, e: u32) -> Dd {
    let mut acc = dd(1.0);
    let mut base = x;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Complex integer power with `0^0 = 1`. Negative exponents of zero yield
/// non-finite values; callers screen for `T = 0` first.
pub(crate) fn c_powi(z: DdComplex, e: i64) -> DdComplex {
    let mut acc = Complex::new(dd(1.0), dd(0.0));
    let mut base = if e < 0 { c_recip(z) } else { z };
    let mut e = e.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// `1 / x` to double-double accuracy. `TwoFloat`'s own reciprocal forms
/// `1 - hi·(1/hi)` in plain `f64`, which leaves an `f64`-sized error.
pub(crate) fn dd_recip(x: Dd) -> Dd {
    let m = dd(1.0 / x.hi());
    let e = dd(1.0) - x * m;
    m + e * m
}

pub(crate) fn dd_div(a: Dd, b: Dd) -> Dd {
    let q = a * dd_recip(b);
    // one correction step recovers the last bits of the product
    q + (a - q * b) * dd_recip(b)
}

pub(crate) fn c_recip(z: DdComplex) -> DdComplex {
    let n = dd_recip(z.re * z.re + z.im * z.im);
    Complex::new(z.re * n, -z.im * n)
}

pub(crate) fn c_div(a: DdComplex, b: DdComplex) -> DdComplex {
    let q = a * c_recip(b);
    q + (a - q * b) * c_recip(b)
}

/// Generalized binomial coefficient `C(a, b)` for integer `a` (any sign) and
/// `b >= 0`, computed from the falling-factorial product `a(a-1)...(a-b+1)/b!`.
/// Zero for `b < 0`.
pub fn binomial_exact(a: i64, b: i64) -> Result<i128> {
    if b < 0 {
        return Ok(0);
    }
    let overflow = || Error::BinomialOverflow { upper: a, lower: b };
    let mut c: i128 = 1;
    for i in 0..b {
        // C(a, i) * (a - i) is always divisible by i + 1.
        c = c
            .checked_mul(a as i128 - i as i128)
            .ok_or_else(overflow)?
            / (i as i128 + 1);
        if c == 0 {
            break;
        }
    }
    Ok(c)
}

/// Same as [`binomial_exact`] but never fails: falls back to a double-double
/// product once the exact value leaves the 128-bit range.
pub(crate) fn binomial_dd(a: i64, b: i64) -> Dd {
    match binomial_exact(a, b) {
        Ok(v) => dd_int(v),
        Err(_) => {
            let mut c = dd(1.0);
            for i in 0..b {
                c = c * dd_int(a as i128 - i as i128) / (i as f64 + 1.0);
            }
            c
        }
    }
}

/// Binomial coefficient as `f64`.
pub fn binomial(a: i64, b: i64) -> f64 {
    to_f64(binomial_dd(a, b))
}

pub(crate) fn factorial_exact(n: u32) -> Result<i128> {
    (1..=n as i128).try_fold(1i128, |acc, k| {
        acc.checked_mul(k).ok_or(Error::BinomialOverflow {
            upper: n as i64,
            lower: n as i64,
        })
    })
}

pub(crate) fn factorial_dd(n: u32) -> Dd {
    match factorial_exact(n) {
        Ok(v) => dd_int(v),
        Err(_) => (1..=n).fold(dd(1.0), |acc, k| acc * dd(k as f64)),
    }
}

/// `(-1)^e` for signed exponents.
pub(crate) fn sign(e: i64) -> f64 {
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Complex variant of [`relative_deviation`].
pub fn relative_deviation_c(a: Complex<f64>, b: Complex<f64>) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}
