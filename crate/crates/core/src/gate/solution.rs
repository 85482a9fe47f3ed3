use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::determinants::NodeSet;
use crate::error::{Error, Result};
use crate::numeric::{c_abs, c_to_f64, dd, dd_div, to_f64, Dd, DdComplex};

use super::beam_splitter::BeamSplitter;
use super::coefficients::CoefficientMatrix;
use super::exact::grat_to_dd;
use super::roots::DET_TOLERANCE;

/// A row's cofactors count as vanishing when their absolute sum falls below
/// this fraction of the largest row sum.
pub const DEGENERATE_ROW_RATIO: f64 = 1e-12;

fn check_row(matrix: &CoefficientMatrix, row: usize) -> Result<()> {
    if row == 0 || row > matrix.n() {
        return Err(Error::InvalidArgument(format!(
            "row {row} out of range 1..={}",
            matrix.n()
        )));
    }
    Ok(())
}

pub(crate) fn cofactors_dd(matrix: &CoefficientMatrix, row: usize) -> Result<Vec<DdComplex>> {
    check_row(matrix, row)?;
    let adj = matrix.adjugate();
    Ok((0..matrix.n()).map(|l| grat_to_dd(adj.cofactor(row - 1, l))).collect())
}

/// Cofactors `A_{row,l}` of the coefficient matrix; `row` runs over `1..=N`.
pub fn cofactors(matrix: &CoefficientMatrix, row: usize) -> Result<Vec<Complex64>> {
    Ok(cofactors_dd(matrix, row)?.into_iter().map(c_to_f64).collect())
}

fn abs_sum(values: &[DdComplex]) -> Dd {
    values.iter().fold(dd(0.0), |acc, &z| acc + c_abs(z))
}

/// Row whose cofactors have the largest absolute sum; ties go to the lowest row.
///
/// All cofactor rows of a rank-deficient matrix are proportional to the same
/// null vector, so the largest row carries it with the least cancellation.
pub fn best_row(matrix: &CoefficientMatrix) -> Result<usize> {
    let mut best = (1, dd(-1.0));
    for row in 1..=matrix.n() {
        let s = abs_sum(&cofactors_dd(matrix, row)?);
        if s > best.1 {
            best = (row, s);
        }
    }
    Ok(best.0)
}

/// Ancilla weights, projection amplitudes and success probability obtained
/// from one cofactor row.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSolution {
    pub nodes: NodeSet,
    /// Leading part of the transmission; the full value is in `beam_splitter`.
    pub t: Complex64,
    pub beam_splitter: BeamSplitter,
    /// Projection amplitudes, carrying all phases.
    pub alphas: Vec<Complex64>,
    /// Real non-negative ancilla weights.
    pub gammas: Vec<f64>,
    pub p: f64,
    pub cofactors: Vec<Complex64>,
    /// `Σ_l A_kl a⁽²⁾_kl` for the row used.
    pub numerator: Complex64,
    /// `(Σ_l |A_kl|)²` for the row used.
    pub denominator: f64,
    pub det_residual: f64,
    /// Cofactor row, `1..=N`.
    pub row_used: usize,
}

impl GateSolution {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn record(&self) -> SolutionRecord {
        SolutionRecord {
            n: self.n(),
            nodes: self.nodes.values().to_vec(),
            t_re: self.t.re,
            t_im: self.t.im,
            p: self.p,
            alphas: self
                .alphas
                .iter()
                .map(|a| ComplexRecord { re: a.re, im: a.im })
                .collect(),
            gammas: self.gammas.clone(),
            det_residual: self.det_residual,
            row_used: self.row_used,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

/// Serialized form of a [`GateSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub nodes: Vec<u32>,
    #[serde(rename = "T_re")]
    pub t_re: f64,
    #[serde(rename = "T_im")]
    pub t_im: f64,
    pub p: f64,
    pub alphas: Vec<ComplexRecord>,
    pub gammas: Vec<f64>,
    pub det_residual: f64,
    pub row_used: usize,
}

/// Success probability `|Σ_l A_kl a⁽²⁾_kl|² / (Σ_l |A_kl|)²` with
/// `|α_l| = γ_l = (|A_kl| / Σ_m |A_km|)^{1/2}` and `α_l γ_l ∝ A_kl`.
pub fn success_probability(matrix: &CoefficientMatrix, row: usize) -> Result<GateSolution> {
    success_probability_with_tolerance(matrix, row, DET_TOLERANCE)
}

pub fn success_probability_with_tolerance(
    matrix: &CoefficientMatrix,
    row: usize,
    det_tolerance: f64,
) -> Result<GateSolution> {
    check_row(matrix, row)?;
    let residual = matrix.det_residual();
    if !(residual <= det_tolerance) {
        return Err(Error::NotAGate {
            residual,
            tolerance: det_tolerance,
        });
    }

    let n = matrix.n();
    let row_sums: Vec<Dd> = (1..=n)
        .map(|k| cofactors_dd(matrix, k).map(|a| abs_sum(&a)))
        .collect::<Result<_>>()?;
    let largest = row_sums.iter().fold(dd(0.0), |acc, &s| if s > acc { s } else { acc });
    let a = cofactors_dd(matrix, row)?;
    let total = row_sums[row - 1];
    if !(total > 0.0) || total <= largest * DEGENERATE_ROW_RATIO {
        return Err(Error::DegenerateCofactors { row });
    }

    let numerator = grat_to_dd(&matrix.exact().numerator(matrix.adjugate(), row - 1));
    let num_abs = c_abs(numerator);
    let p = to_f64(dd_div(num_abs * num_abs, total * total));

    let mut gammas = Vec::with_capacity(n);
    let mut alphas = Vec::with_capacity(n);
    for &al in &a {
        let mag = c_abs(al);
        let gamma = to_f64(dd_div(mag, total).sqrt());
        let phase = if mag > 0.0 {
            c_to_f64(DdComplex::new(dd_div(al.re, mag), dd_div(al.im, mag)))
        } else {
            Complex64::new(1.0, 0.0)
        };
        gammas.push(gamma);
        alphas.push(phase * gamma);
    }

    Ok(GateSolution {
        nodes: matrix.nodes().clone(),
        t: matrix.beam_splitter().transmission(),
        beam_splitter: *matrix.beam_splitter(),
        alphas,
        gammas,
        p,
        cofactors: a.into_iter().map(c_to_f64).collect(),
        numerator: c_to_f64(numerator),
        denominator: to_f64(total * total),
        det_residual: residual,
        row_used: row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{build_coefficient_matrix, optimal_transmission};

    fn optimal_matrix(n: usize) -> CoefficientMatrix {
        let bs = BeamSplitter::real(optimal_transmission(n)).unwrap();
        build_coefficient_matrix(&NodeSet::minimal(n), &bs).unwrap()
    }

    #[test]
    fn single_mode_is_deterministic() {
        let bs = BeamSplitter::real(-1.0).unwrap();
        let m = build_coefficient_matrix(&NodeSet::minimal(1), &bs).unwrap();
        assert_eq!(cofactors(&m, 1).unwrap(), vec![Complex64::new(1.0, 0.0)]);
        let sol = success_probability(&m, 1).unwrap();
        assert!((sol.p - 1.0).abs() < 1e-15);
        assert_eq!(sol.gammas, vec![1.0]);
    }

    #[test]
    fn two_mode_cofactors_are_minors() {
        let m = optimal_matrix(2);
        let a = cofactors(&m, 2).unwrap();
        assert!((a[0] + m.entry(0, 1)).norm() < 1e-15);
        assert!((a[1] - m.entry(0, 0)).norm() < 1e-15);
        let sol = success_probability(&m, 2).unwrap();
        assert!((sol.p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn weights_are_normalized_and_matched() {
        let m = optimal_matrix(5);
        let sol = success_probability(&m, 5).unwrap();
        let g2: f64 = sol.gammas.iter().map(|g| g * g).sum();
        let a2: f64 = sol.alphas.iter().map(|a| a.norm_sqr()).sum();
        assert!((g2 - 1.0).abs() < 1e-12 && (a2 - 1.0).abs() < 1e-12);
        for (a, g) in sol.alphas.iter().zip(&sol.gammas) {
            assert!((a.norm() - g).abs() < 1e-15);
        }
        assert!((sol.p * 25.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn off_root_transmission_is_rejected() {
        let bs = BeamSplitter::real(0.5).unwrap();
        let m = build_coefficient_matrix(&NodeSet::minimal(3), &bs).unwrap();
        assert!(matches!(success_probability(&m, 3), Err(Error::NotAGate { .. })));
        assert!(matches!(success_probability(&m, 4), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn degenerate_row_detected() {
        // nodes {1, 2}: the first row vanishes identically at T² = 1/3
        let bs = BeamSplitter::real((1.0f64 / 3.0).sqrt()).unwrap();
        let m = build_coefficient_matrix(&NodeSet::new(vec![1, 2]).unwrap(), &bs).unwrap();
        assert!(matches!(
            success_probability(&m, 2),
            Err(Error::DegenerateCofactors { row: 2 })
        ));
        assert_eq!(best_row(&m).unwrap(), 1);
        let sol = success_probability(&m, 1).unwrap();
        assert!(sol.p > 0.0 && sol.p <= 1.0);
    }

    #[test]
    fn record_uses_external_field_names() {
        let sol = success_probability(&optimal_matrix(2), 2).unwrap();
        let json = serde_json::to_value(sol.record()).unwrap();
        for key in ["N", "nodes", "T_re", "T_im", "p", "alphas", "gammas", "det_residual", "row_used"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
