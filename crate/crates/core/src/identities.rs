//! Seeded randomized checks of the polynomial and Vandermonde identities the
//! closed forms rest on.
//!
//! Sample points `x` are dyadic rationals `i/1024`, exactly representable, so
//! a run is reproducible from its seed alone.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::determinants::{gapped_vandermonde, vandermonde_power, vandermonde_s, NodeSet};
use crate::error::Result;
use crate::numeric::binomial;
use crate::polynomials::{
    gapped_binomial_expand, gapped_binomial_product, one_gap_symmetric_s, spoly_eval,
    spoly_recursion_step, symmetric_s,
};

pub const INSTANCES: usize = 100;
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Three-term recursion of the S-polynomials.
    A,
    /// Expansions of binomials over the S-basis and S-basis Vandermondians.
    B,
    /// Gapped power-basis Vandermondians, in exact integers.
    C,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::A, Suite::B, Suite::C];

    pub fn label(&self) -> &'static str {
        match self {
            Suite::A => "a",
            Suite::B => "b",
            Suite::C => "c",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub name: String,
    pub instances: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Exact arithmetic: the residual is an integer difference.
    pub exact: bool,
    pub passed: bool,
    /// Parameters of the instance with the largest residual.
    pub worst_instance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub identities: Vec<IdentityResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.identities.iter().all(|r| r.passed)
    }
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    exact: bool,
    count: usize,
    worst: f64,
    worst_instance: String,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64, exact: bool) -> Self {
        Self {
            name,
            tolerance,
            exact,
            count: 0,
            worst: 0.0,
            worst_instance: String::new(),
        }
    }

    fn record(&mut self, residual: f64, instance: impl FnOnce() -> String) {
        self.count += 1;
        // NaN counts as the worst possible residual
        if !(residual <= self.worst) {
            self.worst = if residual.is_nan() { f64::INFINITY } else { residual };
            self.worst_instance = instance();
        }
    }

    fn finish(self) -> IdentityResult {
        IdentityResult {
            name: self.name.to_string(),
            instances: self.count,
            max_residual: self.worst,
            tolerance: self.tolerance,
            exact: self.exact,
            passed: self.count > 0 && self.worst <= self.tolerance,
            worst_instance: self.worst_instance,
        }
    }
}

/// `|lhs - rhs|` relative to `max(|lhs|, size)`, where `size` is the sum of
/// absolute values of the terms making up `rhs`.
fn residual(lhs: f64, rhs: f64, size: f64) -> f64 {
    let scale = lhs.abs().max(size);
    if scale == 0.0 {
        (lhs - rhs).abs()
    } else {
        (lhs - rhs).abs() / scale
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Dyadic rational in `(-1, 1)`, never zero.
fn sample_x(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let i: i32 = rng.gen_range(-1023..=1023);
        if i != 0 {
            return i as f64 / 1024.0;
        }
    }
}

fn random_nodes(rng: &mut ChaCha8Rng, n: usize, max_value: u32) -> NodeSet {
    let mut values: Vec<u32> = Vec::with_capacity(n);
    while values.len() < n {
        let v = rng.gen_range(0..=max_value);
        if !values.contains(&v) {
            values.push(v);
        }
    }
    values.sort_unstable();
    NodeSet::new(values).expect("distinct sorted values")
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let identities = match suite {
        Suite::A => vec![recursion(seed)?],
        Suite::B => vec![
            binomial_expansion(seed)?,
            binomial_expansion_full_order(seed)?,
            symmetric_specialization(seed)?,
            one_gap_expansion(seed)?,
            gapped_binomial(seed)?,
            s_basis_vandermonde(seed)?,
            gapped_s_basis(seed)?,
        ],
        Suite::C => vec![gapped_power_exact(seed)?],
    };
    Ok(SuiteReport { suite, identities })
}

pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    Suite::ALL.iter().map(|&s| run_suite(s, seed)).collect()
}

/// `k S_k = [(x²-1)(n+k) + 2k - 1] S_{k-1} - (k-1) x² S_{k-2}`, including the
/// points `x = 0, ±1`.
fn recursion(seed: u64) -> Result<IdentityResult> {
    let mut rng = rng_for(seed, 1);
    let mut t = Tracker::new("three_term_recursion", TOLERANCE, false);
    for i in 0..INSTANCES {
        let x = match i {
            0 => 0.0,
            1 => 1.0,
            2 => -1.0,
            _ => sample_x(&mut rng),
        };
        let k: u32 = rng.gen_range(2..=20);
        let n: i64 = rng.gen_range(0..=40);
        let s1 = spoly_eval(k - 1, x, n);
        let s2 = spoly_eval(k - 2, x, n);
        let got = spoly_recursion_step(k, x, n, s1, s2)?;
        let expected = spoly_eval(k, x, n);
        let a = (x * x - 1.0) * (n + k as i64) as f64 + 2.0 * k as f64 - 1.0;
        let size = (a * s1).abs() / k as f64 + ((k - 1) as f64 * x * x * s2).abs() / k as f64;
        t.record(residual(expected, got, size), || format!("k={k} x={x} n={n}"));
    }
    Ok(t.finish())
}

/// `(x²-1)^N C(l,p) = Σ_j (-1)^{N-j} s_{N-j}(x;p;N) S_j(l)`.
fn expansion_residual(x: f64, p: u32, n: u32, l: i64) -> Result<f64> {
    let lhs = (x * x - 1.0).powi(n as i32) * binomial(l, p as i64);
    let mut rhs = 0.0;
    let mut size = 0.0;
    for j in 0..=n {
        let term = symmetric_s(x, p, j, n)? * spoly_eval(j, x, l);
        let signed = if (n - j) % 2 == 0 { term } else { -term };
        rhs += signed;
        size += term.abs();
    }
    Ok(residual(lhs, rhs, size))
}

fn binomial_expansion(seed: u64) -> Result<IdentityResult> {
    let mut rng = rng_for(seed, 2);
    let mut t = Tracker::new("binomial_expansion", TOLERANCE, false);
    for _ in 0..INSTANCES {
        let x = sample_x(&mut rng);
        let n: u32 = rng.gen_range(1..=8);
        let p: u32 = rng.gen_range(0..=n);
        let l: i64 = rng.gen_range(0..=2 * n as i64);
        let r = expansion_residual(x, p, n, l)?;
        t.record(r, || format!("x={x} p={p} N={n} l={l}"));
    }
    Ok(t.finish())
}

/// The `p = N` case, with coefficients `C(N,j) x^{2(N-j)}`.
fn binomial_expansion_full_order(seed: u64) -> Result<IdentityResult> {
    let mut rng = rng_for(seed, 3);
    let mut t = Tracker::new("binomial_expansion_full_order", TOLERANCE, false);
    for _ in 0..INSTANCES {
        let x = sample_x(&mut rng);
        let n: u32 = rng.gen_range(1..=8);
        let l: i64 = rng.gen_range(0..=2 * n as i64);
        let lhs = (x * x - 1.0).powi(n as i32) * binomial(l, n as i64);
        let mut rhs = 0.0;
        let mut size = 0.0;
        for j in 0..=n {
            let coeff = binomial(n as i64, j as i64) * x.powi(2 * (n - j) as i32);
            let term = coeff * spoly_eval(j, x, l);
            rhs += if (n - j) % 2 == 0 { term } else { -term };
            size += term.abs();
        }
        t.record(residual(lhs, rhs, size), || format!("x={x} N={n} l={l}"));
    }
    Ok(t.finish())
}

/// `s_{N-j}(x;N;N) = C(N,j) x^{2(N-j)}`.
fn symmetric_specialization(seed: u64) -> Result<IdentityResult> {
    let mut rng = rng_for(seed, 4);
    let mut t = Tracker::new("symmetric_specialization", TOLERANCE, false);
    for _ in 0..INSTANCES {
        let x = sample_x(&mut rng);
        let n: u32 = rng.gen_range(1..=12);
        let j: u32 = rng.gen_range(0..=n);
        let got = symmetric_s(x, n, j, n)?;
        let expected = binomial(n as i64, j as i64) * x.powi(2 * (n - j) as i32);
        t.record(residual(expected, got, 0.0), || format!("x={x} N={n} j={j}"));
    }
    Ok(t.finish())
}

/// `(x²-1)^N C(l,N+1)/(l-q) = Σ_j (-1)^{N-j} s^{(q)}_{N-j}(x;N) S_j(l)`, with
/// the left side in its product form so `l = q` is included.
fn one_gap_expansion(seed: u64) -> Result<IdentityResult> {
    let mut rng = rng_for(seed, 5);
    let mut t = Tracker::new("one_gap_expansion", TOLERANCE, false);
    for _ in 0..INSTANCES {
        let x = sample_x(&mut rng);
        let n: u32 = rng.gen_range(1..=8);
        let q: u32 = rng.gen_range(0..=n);
        let l: i64 = rng.gen_range(0..=2 * n as i64 + 1);
        let lhs = (x * x - 1.0).powi(n as i32) * gapped_binomial_product(n + 1, q, l)?;
        let mut rhs = 0.0;
        let mut size = 0.0;
        for j in 0..=n {
            let term = one_gap_symmetric_s(x, q, j, n)? * spoly_eval(j, x, l);
            rhs += if (n - j) % 2 == 0 { term } else { -term };
            size += term.abs();
        }
        t.record(residual(lhs, rhs, size), || format!("x={x} N={n} q={q} l={l}"));
    }
    Ok(t.finish())
}

/// `C(l,p)/(l-q)`: binomial expansion against the product form.
fn gapped_binomial(seed: u64) -> Result<IdentityResult> {
    let mut rng = rng_for(seed, 6);
    let mut t = Tracker::new("gapped_binomial", TOLERANCE, false);
    for _ in 0..INSTANCES {
        let p: u32 = rng.gen_range(1..=12);
        let q: u32 = rng.gen_range(0..p);
        let l: i64 = rng.gen_range(-6..=24);
        let got = gapped_binomial_expand(p, q, l)?;
        let expected = gapped_binomial_product(p, q, l)?;
        t.record(residual(expected, got, 0.0), || format!("p={p} q={q} l={l}"));
    }
    Ok(t.finish())
}

/// `S_k^{(x)}(n) = Σ_m C(k,m) C(n+m,m) (x²-1)^m` in exact rationals.
fn exact_spoly(k: u32, y: &BigRational, n: i64) -> BigRational {
    let mut acc = BigRational::zero();
    let mut y_pow = BigRational::one();
    for m in 0..=k as i64 {
        let c = crate::numeric::binomial_exact(k as i64, m).expect("small binomial")
            * crate::numeric::binomial_exact(n + m, m).expect("small binomial");
        acc += &y_pow * BigRational::from_integer(BigInt::from(c));
        y_pow *= y;
    }
    acc
}

/// Exact determinant of `[S_{k-1}^{(x)}(n_l)]` by fraction-exact elimination.
///
/// The S-basis matrix becomes nearly rank one as `|x| → 1` (all rows approach
/// ones), beyond what a floating-point determinant resolves.
fn exact_s_basis_det(nodes: &NodeSet, x: f64) -> f64 {
    let xr = BigRational::from_float(x).expect("finite sample point");
    let y = &xr * &xr - BigRational::one();
    let n = nodes.len();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|k| nodes.values().iter().map(|&v| exact_spoly(k as u32, &y, v as i64)).collect())
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(pivot) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return 0.0;
        };
        if pivot != c {
            m.swap(pivot, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            let f = &m[r][c] / &m[c][c];
            for j in c..n {
                let v = &m[c][j] * &f;
                m[r][j] -= v;
            }
        }
    }
    det.to_f64().unwrap_or(f64::NAN)
}

/// `det[S_{k-1}(n_l)] = V_N({n_l}) ∏_k (x²-1)^k / k!` against an exact determinant.
fn s_basis_vandermonde(seed: u64) -> Result<IdentityResult> {
    let mut rng = rng_for(seed, 7);
    let mut t = Tracker::new("s_basis_vandermonde", TOLERANCE, false);
    for _ in 0..INSTANCES {
        let x = sample_x(&mut rng);
        let n: usize = rng.gen_range(1..=10);
        let nodes = random_nodes(&mut rng, n, 16);
        let product = vandermonde_s(&nodes, x)?;
        let exact = exact_s_basis_det(&nodes, x);
        t.record(residual(product, exact, 0.0), || format!("x={x} nodes={:?}", nodes.values()));
    }
    Ok(t.finish())
}

/// S-basis Vandermondian of `{0..N-1} \ {gap}` against an exact determinant.
fn gapped_s_basis(seed: u64) -> Result<IdentityResult> {
    let mut rng = rng_for(seed, 8);
    let mut t = Tracker::new("gapped_s_basis_vandermonde", TOLERANCE, false);
    for _ in 0..INSTANCES {
        let x = sample_x(&mut rng);
        let n: usize = rng.gen_range(2..=10);
        let gap: usize = rng.gen_range(0..n);
        let g = gapped_vandermonde(n, gap)?;
        let exact = exact_s_basis_det(&g.nodes(), x);
        t.record(residual(g.s_basis(x), exact, 0.0), || format!("x={x} N={n} gap={gap}"));
    }
    Ok(t.finish())
}

/// Fraction-free (Bareiss) elimination; exact for integer matrices.
fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &m[n - 1][n - 1]
}

/// `V_{N-1} C(N-1, gap)` against both the pairwise product and an exact
/// determinant of `[n_l^k]` over `{0..N-1} \ {gap}`.
fn gapped_power_exact(seed: u64) -> Result<IdentityResult> {
    let mut rng = rng_for(seed, 9);
    let mut t = Tracker::new("gapped_power_vandermonde", 0.0, true);
    for _ in 0..INSTANCES {
        let n: usize = rng.gen_range(2..=10);
        let gap: usize = rng.gen_range(0..n);
        let g = gapped_vandermonde(n, gap)?;
        let nodes = g.nodes();
        let pairwise = vandermonde_power(&nodes)?;
        let d = nodes.len();
        let matrix: Vec<Vec<BigInt>> = (0..d)
            .map(|k| nodes.values().iter().map(|&v| BigInt::from(v).pow(k as u32)).collect())
            .collect();
        let det = bareiss_det(matrix);
        let formula = BigInt::from(g.power);
        let diff = (&det - &formula).magnitude().clone() + (BigInt::from(pairwise) - &formula).magnitude();
        let r = if diff.is_zero() { 0.0 } else { f64::INFINITY };
        t.record(r, || format!("N={n} gap={gap}"));
    }
    Ok(t.finish())
}
