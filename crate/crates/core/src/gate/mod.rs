//! Gate conditions for the generalized sign-shift gate: coefficient matrix,
//! transmission roots, cofactors and the success probability.

mod beam_splitter;
mod closed_form;
mod coefficients;
mod exact;
mod rank_one;
mod roots;
mod solution;

pub use beam_splitter::{bs_diagonal_element, BeamSplitter};
pub use closed_form::{
    alternation_factor, alternation_factor_generating, binomial_partial_sum, cofactor_closed_form,
    denominator_closed_form, det_closed_form, numerator_closed_form, optimal_beam_splitter,
    optimal_transmission,
    replacement_sum_closed_form, simple_det_closed_form, OPTIMUM_SWITCH,
};
pub use coefficients::{build_coefficient_matrix, det_scale, CoefficientMatrix};
pub use roots::{find_transmission, SearchConfig, TransmissionRoot, DET_TOLERANCE};
pub use solution::{
    best_row, cofactors, success_probability, success_probability_with_tolerance, ComplexRecord,
    GateSolution, SolutionRecord, DEGENERATE_ROW_RATIO,
};

use crate::determinants::NodeSet;
use crate::error::{Error, Result};

/// Largest supported number of ancilla terms.
pub const MAX_N: usize = 30;

/// Above this `N` results are computed but flagged as outside the validated range.
pub const VALIDATED_N: usize = 14;

pub fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidNodes("N must be at least 1".into()));
    }
    if n > MAX_N {
        return Err(Error::SizeCap { n, cap: MAX_N });
    }
    Ok(())
}

/// Gate solution at one root, using the best-conditioned cofactor row.
pub fn solve_with(nodes: &NodeSet, bs: &BeamSplitter, det_tolerance: f64) -> Result<GateSolution> {
    check_size(nodes.len())?;
    let m = build_coefficient_matrix(nodes, bs)?;
    let row = best_row(&m)?;
    success_probability_with_tolerance(&m, row, det_tolerance)
}

/// [`solve_with`] at a transmission given to `f64` precision.
pub fn solve_at(nodes: &NodeSet, t: num_complex::Complex64, det_tolerance: f64) -> Result<GateSolution> {
    solve_with(nodes, &BeamSplitter::new(t)?, det_tolerance)
}
