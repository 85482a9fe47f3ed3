//! Library routines against independently computed references: exact rational
//! sums, Leibniz determinants and a matrix-exponential beam splitter.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use nss_gate::determinants::{dense_det, Matrix, NodeSet};
use nss_gate::fock::{bs_sector_unitary, two_mode_amplitude};
use nss_gate::gate::{
    build_coefficient_matrix, bs_diagonal_element, cofactors, det_closed_form, optimal_transmission,
    BeamSplitter,
};
use nss_gate::polynomials::{jacobi, spoly_eval, SPoly};

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn binom_rat(a: i64, b: i64) -> BigRational {
    if b < 0 {
        return BigRational::zero();
    }
    let mut c = BigRational::one();
    for i in 0..b {
        c = c * rat_int(a - i) / rat_int(i + 1);
    }
    c
}

fn pow_rat(x: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// `Σ_s C(k,s) C(k+β,s) ((x-1)/2)^s ((x+1)/2)^{k-s}`, exact.
fn jacobi_exact(k: u32, beta: i64, x: &BigRational) -> BigRational {
    let two = rat_int(2);
    let minus = (x - BigRational::one()) / &two;
    let plus = (x + BigRational::one()) / &two;
    (0..=k as i64).fold(BigRational::zero(), |acc, s| {
        acc + binom_rat(k as i64, s)
            * binom_rat(k as i64 + beta, s)
            * pow_rat(&minus, s as u32)
            * pow_rat(&plus, (k as i64 - s) as u32)
    })
}

/// Sum of term magnitudes of [`jacobi_exact`], the cancellation scale.
fn jacobi_exact_scale(k: u32, beta: i64, x: &BigRational) -> f64 {
    let two = rat_int(2);
    let minus = ((x - BigRational::one()) / &two).abs();
    let plus = ((x + BigRational::one()) / &two).abs();
    (0..=k as i64)
        .map(|s| {
            (binom_rat(k as i64, s) * binom_rat(k as i64 + beta, s)).abs()
                * pow_rat(&minus, s as u32)
                * pow_rat(&plus, (k as i64 - s) as u32)
        })
        .fold(BigRational::zero(), |a, b| a + b)
        .to_f64()
        .unwrap()
}

fn dyadic_grid() -> Vec<f64> {
    (-15..=15).map(|i| i as f64 / 16.0).collect()
}

#[test]
fn jacobi_matches_exact_rational_sum() {
    for k in 0..=14 {
        for beta in -(k as i64)..=8 {
            for x in dyadic_grid() {
                let xr = rat(x);
                let exact = jacobi_exact(k, beta, &xr).to_f64().unwrap();
                let scale = jacobi_exact_scale(k, beta, &xr).max(1.0);
                let got = jacobi(k, beta, x);
                assert!(
                    (got - exact).abs() <= 1e-14 * scale,
                    "P_{k}^(0,{beta})({x}): {got} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn s_polynomial_is_jacobi_at_integer_nodes() {
    for k in 0..=12u32 {
        for n in 0..=16i64 {
            for x in dyadic_grid() {
                let arg = rat(2.0 * x * x - 1.0);
                let beta = n - k as i64;
                let exact = jacobi_exact(k, beta, &arg).to_f64().unwrap();
                let scale = jacobi_exact_scale(k, beta, &arg).max(1.0);
                let got = spoly_eval(k, x, n);
                assert!(
                    (got - exact).abs() <= 1e-13 * scale,
                    "S_{k}^({x})({n}): {got} vs {exact}"
                );
            }
        }
    }
}

/// Monomial coefficients of `Σ_m C(k,m) y^m (n+1)...(n+m)/m!`, expanded exactly.
fn spoly_coefficients_exact(k: u32, x: f64) -> (Vec<BigRational>, Vec<BigRational>) {
    let xr = rat(x);
    let y = &xr * &xr - BigRational::one();
    let mut coeffs = vec![BigRational::zero(); k as usize + 1];
    let mut scales = vec![BigRational::zero(); k as usize + 1];
    // rising holds (n+1)...(n+m) in the monomial basis
    let mut rising = vec![BigRational::one()];
    let mut fact = BigRational::one();
    for m in 0..=k as i64 {
        if m > 0 {
            let mut next = vec![BigRational::zero(); rising.len() + 1];
            for (p, c) in rising.iter().enumerate() {
                next[p] += c * rat_int(m);
                next[p + 1] += c;
            }
            rising = next;
            fact *= rat_int(m);
        }
        let w = binom_rat(k as i64, m) * pow_rat(&y, m as u32) / &fact;
        for (p, c) in rising.iter().enumerate() {
            coeffs[p] += &w * c;
            scales[p] += (&w * c).abs();
        }
    }
    (coeffs, scales)
}

#[test]
fn s_polynomial_monomials_match_exact_expansion() {
    for k in 0..=16u32 {
        for x in [-0.875, -0.5, 0.0, 0.25, 0.75, 0.9375] {
            let (exact, scales) = spoly_coefficients_exact(k, x);
            let got = SPoly::new(k, x).unwrap().coefficients();
            assert_eq!(got.len(), exact.len());
            for (p, (g, e)) in got.iter().zip(&exact).enumerate() {
                let e = e.to_f64().unwrap();
                let scale = scales[p].to_f64().unwrap();
                assert!(
                    (g - e).abs() <= 1e-15 * scale,
                    "c_({k},{p}) at x = {x}: {g} vs {e}"
                );
            }
        }
    }
}

#[test]
fn diagonal_element_matches_exact_rational_formula() {
    for t in [-0.9375, -0.5, -0.125, 0.0625, 0.5, 0.875] {
        let bs = BeamSplitter::real(t).unwrap();
        let tr = rat(t);
        let arg = rat(2.0 * t * t - 1.0);
        for k in 0..=10u32 {
            for n in 0..=10u32 {
                let beta = n as i64 - k as i64;
                let prefactor = if beta >= 0 {
                    pow_rat(&tr, beta as u32)
                } else {
                    BigRational::one() / pow_rat(&tr, (-beta) as u32)
                };
                let exact = (&prefactor * jacobi_exact(k, beta, &arg)).to_f64().unwrap();
                let scale = (prefactor.abs().to_f64().unwrap() * jacobi_exact_scale(k, beta, &arg)).max(1.0);
                let got = bs_diagonal_element(k, n, &bs).unwrap();
                assert!(got.im.abs() <= 1e-15 * scale);
                assert!(
                    (got.re - exact).abs() <= 1e-13 * scale,
                    "<{k},{n}|U|{k},{n}> at T = {t}: {} vs {exact}",
                    got.re
                );
            }
        }
    }
}

type Dense = Vec<Vec<f64>>;

fn mat_mul(a: &Dense, b: &Dense) -> Dense {
    let d = a.len();
    let mut c = vec![vec![0.0; d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == 0.0 {
                continue;
            }
            for j in 0..d {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// `exp(θ (b†a - a†b))` on the sector basis `|k, M-k⟩`, by scaling and
/// squaring of a Taylor series. Generates `a† → cos θ a† + sin θ b†`.
fn sector_by_exponential(total: u32, theta: f64) -> Dense {
    let d = total as usize + 1;
    let m = total as f64;
    let mut g = vec![vec![0.0; d]; d];
    for k in 0..d {
        let kf = k as f64;
        if k > 0 {
            g[k - 1][k] = (kf * (m - kf + 1.0)).sqrt();
        }
        if k + 1 < d {
            g[k + 1][k] = -((kf + 1.0) * (m - kf)).sqrt();
        }
    }
    let norm = theta.abs() * 2.0 * m.max(1.0);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
    let h = theta / 2f64.powi(squarings as i32);
    let step: Dense = g.iter().map(|row| row.iter().map(|v| v * h).collect()).collect();
    let mut result: Dense = (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut term = result.clone();
    for n in 1..=24 {
        term = mat_mul(&term, &step);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= n as f64;
            }
        }
        for i in 0..d {
            for j in 0..d {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}

#[test]
fn sector_unitary_matches_matrix_exponential() {
    for t in [-0.95, -0.6, -0.2, 0.1, 0.45, 0.8] {
        let bs = BeamSplitter::real(t).unwrap();
        let theta = t.acos();
        for total in 0..=20u32 {
            let oracle = sector_by_exponential(total, theta);
            let sector = bs_sector_unitary(total, &bs).unwrap();
            for k_out in 0..=total as usize {
                for k_in in 0..=total as usize {
                    let got = sector.amplitude(k_out, k_in);
                    let want = oracle[k_out][k_in];
                    assert!(
                        (got - Complex64::new(want, 0.0)).norm() <= 1e-11,
                        "M = {total}, T = {t}, ({k_out},{k_in}): {got} vs {want}"
                    );
                }
            }
        }
    }
}

/// Complex `T = |T| e^{iφ}` factors as input phase `e^{iφ k_in}`, the real
/// splitter at `|T|`, then output phase `e^{-iφ n_out}`.
#[test]
fn complex_transmission_factors_into_phases() {
    for (mag, phi) in [(0.3, 0.7), (0.8, -2.1), (0.55, 3.0)] {
        let t = Complex64::from_polar(mag, phi);
        let bs = BeamSplitter::new(t).unwrap();
        let theta = f64::acos(mag);
        for total in [1u32, 4, 9, 14] {
            let oracle = sector_by_exponential(total, theta);
            for k_in in 0..=total {
                for k_out in 0..=total {
                    let n_out = total - k_out;
                    let phase = Complex64::from_polar(1.0, phi * (k_in as f64 - n_out as f64));
                    let want = phase * oracle[k_out as usize][k_in as usize];
                    let got = two_mode_amplitude(k_out, n_out, k_in, total - k_in, &bs).unwrap();
                    assert!((got - want).norm() <= 1e-11, "T = {t}, M = {total}: {got} vs {want}");
                }
            }
        }
    }
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if prefix.len() == n {
            let mut inversions = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if prefix[i] > prefix[j] {
                        inversions += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inversions % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn leibniz(m: &Matrix<Complex64>) -> Complex64 {
    permutations(m.rows())
        .into_iter()
        .map(|(perm, s)| perm.iter().enumerate().fold(Complex64::new(s, 0.0), |acc, (i, &j)| acc * m.get(i, j)))
        .sum()
}

fn bs_diagonal_exact(k: u32, n: u32, t: &BigRational) -> BigRational {
    let beta = n as i64 - k as i64;
    let arg = t * t * rat_int(2) - BigRational::one();
    let prefactor = if beta >= 0 {
        pow_rat(t, beta as u32)
    } else {
        BigRational::one() / pow_rat(t, (-beta) as u32)
    };
    prefactor * jacobi_exact(k, beta, &arg)
}

fn leibniz_exact(m: &[Vec<BigRational>]) -> BigRational {
    permutations(m.len())
        .into_iter()
        .map(|(perm, s)| {
            let prod = perm.iter().enumerate().fold(BigRational::one(), |acc, (i, &j)| acc * &m[i][j]);
            if s > 0.0 {
                prod
            } else {
                -prod
            }
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

#[test]
fn coefficient_determinant_matches_exact_leibniz_expansion() {
    for n in 1..=6usize {
        let nodes = NodeSet::minimal(n);
        for t in [-0.875, -0.5625, -0.3125, 0.1875, 0.625, 0.9375] {
            let tr = rat(t);
            let exact: Vec<Vec<BigRational>> = (1..=n as u32)
                .map(|k| {
                    nodes
                        .values()
                        .iter()
                        .map(|&nl| bs_diagonal_exact(n as u32, nl, &tr) + bs_diagonal_exact(k - 1, nl, &tr))
                        .collect()
                })
                .collect();
            let oracle = leibniz_exact(&exact).to_f64().unwrap();
            let m = build_coefficient_matrix(&nodes, &BeamSplitter::real(t).unwrap()).unwrap();
            let scale = oracle.abs().max(1e-300);
            assert!((m.det().re - oracle).abs() <= 1e-10 * scale, "N = {n}, T = {t}: {} vs {oracle}", m.det());
            assert!(m.det().im.abs() <= 1e-10 * scale);
            let closed = det_closed_form(n, t);
            assert!((closed - oracle).abs() <= 1e-14 * scale, "N = {n}, T = {t}: {closed} vs {oracle}");
            if n <= 4 {
                // plain f64 elimination is only trusted away from heavy cancellation
                let dense = dense_det(&m.full()).unwrap();
                assert!((dense.re - oracle).abs() <= 1e-6 * scale, "N = {n}, T = {t}");
            }
        }
    }
}

#[test]
fn complex_determinant_matches_leibniz_expansion() {
    let nodes = NodeSet::new(vec![0, 2, 3, 5]).unwrap();
    for t in [Complex64::new(0.3, 0.4), Complex64::new(-0.6, 0.2), Complex64::new(0.1, -0.9)] {
        let m = build_coefficient_matrix(&nodes, &BeamSplitter::new(t).unwrap()).unwrap();
        let oracle = leibniz(&m.full());
        assert!((m.det() - oracle).norm() <= 1e-11 * oracle.norm(), "T = {t}");
    }
}

#[test]
fn cofactors_match_leibniz_minors() {
    for n in 2..=6 {
        let nodes = NodeSet::minimal(n);
        let t = optimal_transmission(n);
        let m = build_coefficient_matrix(&nodes, &BeamSplitter::real(t).unwrap()).unwrap();
        let full = m.full();
        for row in 1..=n {
            let got = cofactors(&m, row).unwrap();
            for (l, a) in got.iter().enumerate() {
                let sign = if (row - 1 + l) % 2 == 0 { 1.0 } else { -1.0 };
                let want = leibniz(&full.minor(row - 1, l)) * sign;
                assert!(
                    (a - want).norm() <= 1e-11 * want.norm().max(1e-12),
                    "N = {n}, A_({row},{}): {a} vs {want}",
                    l + 1
                );
            }
        }
    }
}

#[test]
fn diagonal_element_matches_sector_unitary() {
    for t in [Complex64::new(-0.41, 0.0), Complex64::new(0.5, 0.5), Complex64::new(-0.2, -0.7)] {
        let bs = BeamSplitter::new(t).unwrap();
        for k in 0..=8u32 {
            for n in 0..=8u32 {
                let sector = bs_sector_unitary(k + n, &bs).unwrap();
                let want = sector.amplitude(k as usize, k as usize);
                let got = bs_diagonal_element(k, n, &bs).unwrap();
                assert!((got - want).norm() <= 1e-12, "k = {k}, n = {n}, T = {t}");
            }
        }
    }
}
