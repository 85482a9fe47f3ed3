//! Determinant of the coefficient matrix through its rank-one structure.
//!
//! With `y = |T|² - 1`, the second part factors as
//! `diag(T*^{-k}) · L · diag(y^m) · W · diag(T*^{n_l})` where `L_km = C(k,m)`
//! and `W_ml = C(n_l+m, m)`, and the first part is `1 vᵀ` with
//! `v_l = <N,n_l|U|N,n_l>`. The matrix determinant lemma then gives
//! `det a = det a⁽²⁾ · f(T)` with
//!
//! `f(T) = 2 - (1 - 1/T*)^N + T*^{-N} Σ_{m<N} α_m (T*-1)^m y^{N-m}`,
//!
//! where `Σ_m W_ml α_m = C(n_l+N, N)` depends on the nodes alone.
//! `|det a⁽²⁾|` equals `det_scale`, so `|f|` is the relative determinant. No
//! factor of `f` degenerates as `|T| → 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::determinants::NodeSet;
use crate::numeric::{c_powi, c_recip, dd, Dd, DdComplex};

#[derive(Debug, Clone)]
pub(crate) struct RankOneForm {
    n: usize,
    alpha: Vec<Dd>,
}

fn binom(a: u64, b: u64) -> BigInt {
    (0..b).fold(BigInt::one(), |c, i| c * BigInt::from(a - i) / BigInt::from(i + 1))
}

fn to_dd(r: &BigRational) -> Dd {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    match BigRational::from_float(hi) {
        Some(h) => Dd::new_add(hi, (r - h).to_f64().unwrap_or(0.0)),
        None => dd(hi),
    }
}

/// Solves `Σ_m w[m][l] α_m = c_l` exactly; `w` is nonsingular for distinct nodes.
fn solve_transposed(w: &[Vec<BigInt>], c: &[BigInt]) -> Vec<BigRational> {
    let n = c.len();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|l| {
            let mut row: Vec<BigRational> = (0..n).map(|m| BigRational::from_integer(w[m][l].clone())).collect();
            row.push(BigRational::from_integer(c[l].clone()));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).expect("distinct nodes");
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for j in col..=n {
            a[col][j] = &a[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in col..=n {
                    let delta = &factor * &a[col][j];
                    a[r][j] -= delta;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n].clone()).collect()
}

impl RankOneForm {
    pub fn new(nodes: &NodeSet) -> Self {
        let n = nodes.len();
        let values = nodes.values();
        let w: Vec<Vec<BigInt>> = (0..n as u64)
            .map(|m| values.iter().map(|&nl| binom(nl as u64 + m, m)).collect())
            .collect();
        let c: Vec<BigInt> = values.iter().map(|&nl| binom(nl as u64 + n as u64, n as u64)).collect();
        let alpha = solve_transposed(&w, &c);
        debug_assert!(alpha.iter().all(|a| a.abs() < BigRational::from_integer(BigInt::from(10).pow(300))));
        Self { n, alpha: alpha.iter().map(to_dd).collect() }
    }

    /// `f(T)`, or `None` at `T = 0`.
    pub fn eval(&self, t: DdComplex) -> Option<DdComplex> {
        if t.re == 0.0 && t.im == 0.0 {
            return None;
        }
        let n = self.n as i64;
        let tc = t.conj();
        let one = DdComplex::new(dd(1.0), dd(0.0));
        let y = t.re * t.re + t.im * t.im - dd(1.0);
        let d = tc - one;
        // Σ α_m d^m y^{N-m} by Horner in d/y, kept free of division by y
        let mut acc = DdComplex::new(dd(0.0), dd(0.0));
        let mut d_pow = one;
        let mut y_pows = vec![dd(1.0); self.n + 1];
        for k in 1..=self.n {
            y_pows[k] = y_pows[k - 1] * y;
        }
        for (m, a) in self.alpha.iter().enumerate() {
            acc += d_pow * (*a * y_pows[self.n - m]);
            d_pow *= d;
        }
        let inv = c_recip(tc);
        let two = DdComplex::new(dd(2.0), dd(0.0));
        Some(two - c_powi(one - inv, n) + c_powi(inv, n) * acc)
    }
}
