//! Exact determinant and adjugate of the coefficient matrix.
//!
//! `T = t + t_low` is a sum of two doubles, hence a dyadic rational, and so is
//! every entry: the Jacobi sums have integer binomial weights and powers of
//! `|T|² - 1`. Scaling by the common denominator gives a Gaussian-integer
//! matrix, eliminated without fractions. Near `|T| = 1` the columns become
//! nearly parallel and double-double elimination loses most of its digits;
//! the cofactor rows with small weight are affected first.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::numeric::{binomial_exact, Dd, DdComplex};

use super::beam_splitter::BeamSplitter;

type GInt = Complex<BigInt>;
type GRat = Complex<BigRational>;

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite transmission")
}

fn rat_to_dd(r: &BigRational) -> Dd {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() || hi == 0.0 {
        return Dd::from(hi);
    }
    let lo = (r - rat(hi)).to_f64().unwrap_or(0.0);
    Dd::new_add(hi, lo)
}

pub(crate) fn grat_to_dd(z: &GRat) -> DdComplex {
    DdComplex::new(rat_to_dd(&z.re), rat_to_dd(&z.im))
}

fn gpow(z: &GRat, e: u32) -> GRat {
    let mut acc = GRat::one();
    for _ in 0..e {
        acc = acc * z;
    }
    acc
}

fn big_binomial(a: i64, b: i64) -> BigRational {
    match binomial_exact(a, b) {
        Ok(v) => BigRational::from_integer(BigInt::from(v)),
        Err(_) => (0..b).fold(BigRational::one(), |c, i| {
            c * BigRational::from_integer(BigInt::from(a - i)) / BigRational::from_integer(BigInt::from(i + 1))
        }),
    }
}

/// `<k,n|U|k,n> = (T*)^{n-k} Σ_m C(k,m) C(n+m,m) (|T|²-1)^m`, exact.
fn diagonal_exact(k: u32, n: u32, t: &GRat, t2: &BigRational) -> GRat {
    let y = t2 - BigRational::one();
    let mut jac = BigRational::zero();
    let mut y_pow = BigRational::one();
    for m in 0..=k as i64 {
        jac += big_binomial(k as i64, m) * big_binomial(n as i64 + m, m) * &y_pow;
        y_pow *= &y;
    }
    let phase = if n >= k {
        gpow(&t.conj(), n - k)
    } else {
        // 1/T* = T/|T|²
        gpow(&(t / t2.clone()), k - n)
    };
    phase * jac
}

/// Exact values of the coefficient matrix at one transmission.
#[derive(Debug, Clone)]
pub(crate) struct ExactSystem {
    part2: Vec<Vec<GRat>>,
    /// `D · a` for the common denominator `D`.
    ints: Vec<Vec<GInt>>,
    denom: BigRational,
}

/// Cofactors of the full matrix.
#[derive(Debug, Clone)]
pub(crate) struct ExactAdjugate {
    /// `adj[l][k]` is the cofactor `A_kl` (both 0-based).
    adj: Vec<Vec<GRat>>,
}

impl ExactSystem {
    pub fn new(nodes: &[u32], bs: &BeamSplitter) -> Self {
        let td = bs.t_dd();
        let t = GRat::new(
            rat(td.re.hi()) + rat(td.re.lo()),
            rat(td.im.hi()) + rat(td.im.lo()),
        );
        let t2 = t.norm_sqr();
        let n = nodes.len();
        let part1: Vec<GRat> = nodes.iter().map(|&nl| diagonal_exact(n as u32, nl, &t, &t2)).collect();
        let part2: Vec<Vec<GRat>> = (0..n as u32)
            .map(|k| nodes.iter().map(|&nl| diagonal_exact(k, nl, &t, &t2)).collect())
            .collect();
        let full: Vec<Vec<GRat>> = part2
            .iter()
            .map(|row| row.iter().zip(&part1).map(|(a, b)| a + b).collect())
            .collect();

        let (ints, denom) = to_gaussian_integers(&full);
        Self { part2, ints, denom: BigRational::from_integer(denom) }
    }

    pub fn det(&self) -> GRat {
        let n = self.ints.len() as i32;
        let d = bareiss_det(self.ints.clone());
        let scale = self.denom.pow(n);
        GRat::new(
            BigRational::from_integer(d.re) / &scale,
            BigRational::from_integer(d.im) / &scale,
        )
    }

    pub fn adjugate(&self) -> ExactAdjugate {
        let n = self.ints.len() as i32;
        let (_, adj_int) = det_and_adjugate(self.ints.clone());
        let adj_scale = self.denom.pow(n - 1);
        let adj = adj_int
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|z| {
                        GRat::new(
                            BigRational::from_integer(z.re) / &adj_scale,
                            BigRational::from_integer(z.im) / &adj_scale,
                        )
                    })
                    .collect()
            })
            .collect();
        ExactAdjugate { adj }
    }

    /// `Σ_l A_kl a⁽²⁾_kl`, exact.
    pub fn numerator(&self, adj: &ExactAdjugate, k: usize) -> GRat {
        (0..self.part2.len()).fold(GRat::zero(), |acc, l| acc + adj.cofactor(k, l) * &self.part2[k][l])
    }
}

impl ExactAdjugate {
    pub fn cofactor(&self, k: usize, l: usize) -> &GRat {
        &self.adj[l][k]
    }
}

/// Returns integer entries `D·m` and the common denominator `D`.
fn to_gaussian_integers(m: &[Vec<GRat>]) -> (Vec<Vec<GInt>>, BigInt) {
    let mut denom = BigInt::one();
    for z in m.iter().flatten() {
        denom = denom.lcm(z.re.denom()).lcm(z.im.denom());
    }
    let d = BigRational::from_integer(denom.clone());
    let ints = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|z| GInt::new((&z.re * &d).to_integer(), (&z.im * &d).to_integer()))
                .collect()
        })
        .collect();
    (ints, denom)
}

/// `a / b` for Gaussian integers when `b` divides `a`.
fn exact_div(a: &GInt, b: &GInt) -> GInt {
    if b.im.is_zero() {
        return GInt::new(&a.re / &b.re, &a.im / &b.re);
    }
    let norm = &b.re * &b.re + &b.im * &b.im;
    let num = a * b.conj();
    debug_assert!((&num.re % &norm).is_zero() && (&num.im % &norm).is_zero());
    GInt::new(num.re / &norm, num.im / &norm)
}

fn is_zero(z: &GInt) -> bool {
    z.re.is_zero() && z.im.is_zero()
}

fn magnitude_bits(z: &GInt) -> u64 {
    z.re.bits().max(z.im.bits())
}

/// Fraction-free Gauss-Jordan elimination of `[M | I]`. The last pivot is
/// `±det M` and the right block ends as `±det M · M⁻¹ = adj M`, with the same
/// sign. Singular matrices fall back to minors.
fn det_and_adjugate(m: Vec<Vec<GInt>>) -> (GInt, Vec<Vec<GInt>>) {
    let n = m.len();
    if n == 1 {
        return (m[0][0].clone(), vec![vec![GInt::one()]]);
    }
    let mut a: Vec<Vec<GInt>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { GInt::one() } else { GInt::zero() }));
            r
        })
        .collect();
    let mut prev = GInt::one();
    let mut negate = false;
    for c in 0..n {
        // smallest nonzero pivot keeps the integers short
        let Some(p) = (c..n)
            .filter(|&r| !is_zero(&a[r][c]))
            .min_by_key(|&r| magnitude_bits(&a[r][c]))
        else {
            return singular_adjugate(&m);
        };
        if p != c {
            a.swap(p, c);
            negate = !negate;
        }
        let pivot = a[c][c].clone();
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[r][c].clone();
            for j in 0..2 * n {
                if j == c {
                    continue;
                }
                let v = &pivot * &a[r][j] - &f * &a[c][j];
                a[r][j] = exact_div(&v, &prev);
            }
            a[r][c] = GInt::zero();
        }
        prev = pivot;
    }
    // every diagonal entry now equals the final pivot, ±det
    let det = if negate { -prev.clone() } else { prev.clone() };
    let sign = if negate { -GInt::one() } else { GInt::one() };
    let adj = (0..n)
        .map(|i| (0..n).map(|j| &a[i][n + j] * &sign).collect())
        .collect();
    (det, adj)
}

fn bareiss_det(mut a: Vec<Vec<GInt>>) -> GInt {
    let n = a.len();
    if n == 0 {
        return GInt::one();
    }
    let mut prev = GInt::one();
    let mut negate = false;
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !is_zero(&a[r][c])) else {
            return GInt::zero();
        };
        if p != c {
            a.swap(p, c);
            negate = !negate;
        }
        for r in c + 1..n {
            for j in c + 1..n {
                let v = &a[c][c] * &a[r][j] - &a[r][c] * &a[c][j];
                a[r][j] = exact_div(&v, &prev);
            }
        }
        prev = a[c][c].clone();
    }
    if negate {
        -prev
    } else {
        prev
    }
}

fn singular_adjugate(m: &[Vec<GInt>]) -> (GInt, Vec<Vec<GInt>>) {
    let n = m.len();
    let mut adj = vec![vec![GInt::zero(); n]; n];
    for k in 0..n {
        for l in 0..n {
            let minor: Vec<Vec<GInt>> = (0..n)
                .filter(|&r| r != k)
                .map(|r| (0..n).filter(|&c| c != l).map(|c| m[r][c].clone()).collect())
                .collect();
            let v = bareiss_det(minor);
            adj[l][k] = if (k + l) % 2 == 0 { v } else { -v };
        }
    }
    (GInt::zero(), adj)
}
