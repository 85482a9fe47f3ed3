//! Dense determinants and Vandermondians over the power and S-polynomial bases.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial_exact, dd, dd_div, dd_pow, factorial_dd, to_f64, Dd};
use crate::polynomials::spoly_eval_dd;

/// Default largest dimension accepted by [`dense_det`].
pub const DEFAULT_DET_CAP: usize = 64;

/// Scalar types the determinant routines operate on.
pub trait Field:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn quotient(self, rhs: Self) -> Self;
    fn one() -> Self;
    /// Pivot magnitude.
    fn magnitude(&self) -> f64;
}

impl Field for f64 {
    fn quotient(self, rhs: Self) -> Self {
        self / rhs
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Field for Complex<f64> {
    fn quotient(self, rhs: Self) -> Self {
        self / rhs
    }
    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex::new(1.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Field for Dd {
    fn quotient(self, rhs: Self) -> Self {
        crate::numeric::dd_div(self, rhs)
    }
    fn zero() -> Self {
        dd(0.0)
    }
    fn one() -> Self {
        dd(1.0)
    }
    fn magnitude(&self) -> f64 {
        to_f64(*self).abs()
    }
}

impl Field for Complex<Dd> {
    fn quotient(self, rhs: Self) -> Self {
        crate::numeric::c_div(self, rhs)
    }
    fn zero() -> Self {
        Complex::new(dd(0.0), dd(0.0))
    }
    fn one() -> Self {
        Complex::new(dd(1.0), dd(0.0))
    }
    fn magnitude(&self) -> f64 {
        to_f64(self.re).hypot(to_f64(self.im))
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Self::from_fn(rows.len(), cols, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Copy with row `skip_row` and column `skip_col` removed.
    pub fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        Self::from_fn(self.rows - 1, self.cols - 1, |i, j| {
            let r = if i < skip_row { i } else { i + 1 };
            let c = if j < skip_col { j } else { j + 1 };
            self.get(r, c)
        })
    }

    /// Copy with column `col` taken from `other`.
    pub fn with_column_from(&self, col: usize, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            if j == col {
                other.get(i, j)
            } else {
                self.get(i, j)
            }
        })
    }
}

/// Determinant by LU elimination with partial pivoting. Ties between pivot
/// candidates go to the smallest row index.
pub fn dense_det<T: Field>(matrix: &Matrix<T>) -> Result<T> {
    dense_det_with_cap(matrix, DEFAULT_DET_CAP)
}

pub fn dense_det_with_cap<T: Field>(matrix: &Matrix<T>, cap: usize) -> Result<T> {
    if matrix.rows != matrix.cols {
        return Err(Error::NotSquare {
            rows: matrix.rows,
            cols: matrix.cols,
        });
    }
    let n = matrix.rows;
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    let mut a = matrix.data.clone();
    let mut det = T::one();
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].magnitude();
        for row in col + 1..n {
            let m = a[row * n + col].magnitude();
            if m > best {
                best = m;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Ok(T::zero());
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det = det * p;
        for row in col + 1..n {
            let factor = a[row * n + col].quotient(p);
            for j in col + 1..n {
                a[row * n + j] = a[row * n + j] - factor * a[col * n + j];
            }
        }
    }
    Ok(det)
}

/// Cofactors `A_{row,l}` of one row, from the minors. Stays finite when the
/// matrix itself is singular. The 1×1 case returns `[1]`.
pub fn row_cofactors<T: Field>(matrix: &Matrix<T>, row: usize) -> Result<Vec<T>> {
    if matrix.rows != matrix.cols {
        return Err(Error::NotSquare {
            rows: matrix.rows,
            cols: matrix.cols,
        });
    }
    if row >= matrix.rows {
        return Err(Error::InvalidArgument(format!(
            "row {row} outside a {0}x{0} matrix",
            matrix.rows
        )));
    }
    (0..matrix.cols)
        .map(|l| {
            let m = dense_det(&matrix.minor(row, l))?;
            Ok(if (row + l) % 2 == 0 { m } else { -m })
        })
        .collect()
}

/// `det(variable) + Σ_m det(variable with column m taken from constant)`.
///
/// When every column of `constant` is constant, this equals
/// `det(constant + variable)`: any term with two or more constant columns
/// vanishes.
pub fn column_split_det<T: Field>(constant: &Matrix<T>, variable: &Matrix<T>) -> Result<T> {
    if constant.rows != variable.rows || constant.cols != variable.cols {
        return Err(Error::DimensionMismatch {
            expected: variable.rows * variable.cols,
            got: constant.rows * constant.cols,
        });
    }
    let mut total = dense_det(variable)?;
    for m in 0..variable.cols {
        total = total + dense_det(&variable.with_column_from(m, constant))?;
    }
    Ok(total)
}

/// Strictly increasing non-negative photon numbers `n_1 < ... < n_N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct NodeSet(Vec<u32>);

impl NodeSet {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidNodes("empty photon-number set".into()));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            let why = if w[0] == w[1] { "duplicate" } else { "decreasing" };
            return Err(Error::InvalidNodes(format!(
                "{why} entries {} and {}; photon numbers must be strictly increasing",
                w[0], w[1]
            )));
        }
        Ok(Self(values))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn minimal(n: usize) -> Self {
        Self((0..n as u32).collect())
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_minimal(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| v as usize == i)
    }

    pub fn total_photons(&self) -> u64 {
        self.0.iter().map(|&v| v as u64).sum()
    }
}

impl TryFrom<Vec<u32>> for NodeSet {
    type Error = Error;
    fn try_from(values: Vec<u32>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<NodeSet> for Vec<u32> {
    fn from(nodes: NodeSet) -> Self {
        nodes.0
    }
}

/// `∏_{i<j} (n_j - n_i)`, exact.
pub fn vandermonde_power(nodes: &NodeSet) -> Result<i128> {
    vandermonde_of(nodes.values().iter().map(|&v| v as i64))
}

fn vandermonde_of(values: impl IntoIterator<Item = i64>) -> Result<i128> {
    let v: Vec<i64> = values.into_iter().collect();
    let mut prod: i128 = 1;
    for j in 0..v.len() {
        for i in 0..j {
            prod = prod
                .checked_mul((v[j] - v[i]) as i128)
                .ok_or(Error::BinomialOverflow {
                    upper: v[j],
                    lower: v[i],
                })?;
        }
    }
    Ok(prod)
}

/// `∏_{k=0}^{N-1} (x²-1)^k / k!`, the product of the S-basis leading
/// coefficients.
pub(crate) fn s_basis_prefactor(n: usize, x: f64) -> Dd {
    let y = dd(x) * dd(x) - 1.0;
    (0..n as u32).fold(dd(1.0), |acc, k| dd_div(acc * dd_pow(y, k), factorial_dd(k)))
}

/// Vandermondian over the S-polynomial basis, `det[S_{k-1}^{(x)}(n_l)]`,
/// from the product rule `V_N({n_l}) ∏_k c_kk`.
pub fn vandermonde_s(nodes: &NodeSet, x: f64) -> Result<f64> {
    let v = vandermonde_power(nodes)?;
    Ok(to_f64(crate::numeric::dd_int(v) * s_basis_prefactor(nodes.len(), x)))
}

/// The S-basis matrix `[S_{k-1}^{(x)}(n_l)]` itself, for dense evaluation.
pub fn s_basis_matrix(nodes: &NodeSet, x: f64) -> Matrix<Dd> {
    let n = nodes.len();
    Matrix::from_fn(n, n, |k, l| spoly_eval_dd(k as u32, x, nodes.values()[l] as i64))
}

/// Power-basis Vandermonde matrix `[n_l^{k}]`.
pub fn power_basis_matrix(nodes: &NodeSet) -> Matrix<f64> {
    let n = nodes.len();
    Matrix::from_fn(n, n, |k, l| (nodes.values()[l] as f64).powi(k as i32))
}

/// Vandermondian of `{0, ..., N-1} \ {gap}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GappedVandermonde {
    pub n: usize,
    pub gap: usize,
    /// Power-basis value, exact.
    pub power: i128,
}

impl GappedVandermonde {
    /// S-basis value `(x²-1)^{(N-1)(N-2)/2} C(N-1, gap)`.
    pub fn s_basis(&self, x: f64) -> f64 {
        let y = dd(x) * dd(x) - 1.0;
        let e = ((self.n - 1) * self.n.saturating_sub(2) / 2) as u32;
        let c = binomial_exact(self.n as i64 - 1, self.gap as i64).expect("small binomial");
        to_f64(dd_pow(y, e) * crate::numeric::dd_int(c))
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet((0..self.n as u32).filter(|&v| v as usize != self.gap).collect())
    }
}

/// Gapped Vandermondian from `V_{N-1} C(N-1, gap)`, where
/// `V_{N-1} = ∏_{k<N-1} k!` is the gap-free value on `{0..N-2}`.
pub fn gapped_vandermonde(n: usize, gap: usize) -> Result<GappedVandermonde> {
    if n == 0 || gap >= n {
        return Err(Error::InvalidArgument(format!(
            "gap {gap} outside [0, {n})"
        )));
    }
    let base = (0..n as u32 - 1).try_fold(1i128, |acc, k| {
        let f = crate::numeric::factorial_exact(k)?;
        acc.checked_mul(f).ok_or(Error::BinomialOverflow {
            upper: n as i64,
            lower: k as i64,
        })
    })?;
    let c = binomial_exact(n as i64 - 1, gap as i64)?;
    let power = base.checked_mul(c).ok_or(Error::BinomialOverflow {
        upper: n as i64,
        lower: gap as i64,
    })?;
    Ok(GappedVandermonde { n, gap, power })
}
