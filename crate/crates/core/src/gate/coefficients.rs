use std::sync::OnceLock;

use num_complex::Complex64;

use crate::determinants::{vandermonde_power, Matrix, NodeSet};
use crate::error::{Error, Result};
use crate::numeric::{c_abs, c_to_f64, dd, dd_div, dd_int, dd_recip, dd_pow, factorial_dd, to_f64, Dd, DdComplex};

use super::beam_splitter::{diagonal_element_dd, BeamSplitter};
use super::exact::{grat_to_dd, ExactAdjugate, ExactSystem};

/// The `N×N` matrix `a_kl = a⁽¹⁾_kl + a⁽²⁾_kl` of the homogeneous gate system,
/// with `a⁽¹⁾_kl = <N,n_l|U|N,n_l>` (constant down each column) and
/// `a⁽²⁾_kl = <k-1,n_l|U|k-1,n_l>`.
///
/// Row index 0 here is the physical row `k = 1`.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    nodes: NodeSet,
    bs: BeamSplitter,
    part1: Matrix<DdComplex>,
    part2: Matrix<DdComplex>,
    exact: OnceLock<ExactSystem>,
    exact_det: OnceLock<DdComplex>,
    adjugate: OnceLock<ExactAdjugate>,
}

pub fn build_coefficient_matrix(nodes: &NodeSet, bs: &BeamSplitter) -> Result<CoefficientMatrix> {
    if bs.transmission().norm() == 0.0 {
        return Err(Error::Pole("coefficient matrix at T = 0".into()));
    }
    let n = nodes.len();
    let t = bs.t_dd();
    let row1: Vec<DdComplex> = nodes
        .values()
        .iter()
        .map(|&nl| diagonal_element_dd(n as u32, nl, t))
        .collect();
    let part1 = Matrix::from_fn(n, n, |_, l| row1[l]);
    let part2 = Matrix::from_fn(n, n, |k, l| diagonal_element_dd(k as u32, nodes.values()[l], t));
    Ok(CoefficientMatrix {
        nodes: nodes.clone(),
        bs: *bs,
        part1,
        part2,
        exact: OnceLock::new(),
        exact_det: OnceLock::new(),
        adjugate: OnceLock::new(),
    })
}

impl CoefficientMatrix {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn beam_splitter(&self) -> &BeamSplitter {
        &self.bs
    }

    pub fn entry(&self, k: usize, l: usize) -> Complex64 {
        c_to_f64(self.part1.get(k, l) + self.part2.get(k, l))
    }

    pub fn part1(&self, k: usize, l: usize) -> Complex64 {
        c_to_f64(self.part1.get(k, l))
    }

    pub fn part2(&self, k: usize, l: usize) -> Complex64 {
        c_to_f64(self.part2.get(k, l))
    }

    /// Full matrix in double-double.
    pub fn full_dd(&self) -> Matrix<DdComplex> {
        let n = self.n();
        Matrix::from_fn(n, n, |k, l| self.part1.get(k, l) + self.part2.get(k, l))
    }

    pub fn part1_dd(&self) -> &Matrix<DdComplex> {
        &self.part1
    }

    pub fn part2_dd(&self) -> &Matrix<DdComplex> {
        &self.part2
    }

    /// Full matrix in `f64`.
    pub fn full(&self) -> Matrix<Complex64> {
        self.full_dd().map(c_to_f64)
    }

    pub fn part1_matrix(&self) -> Matrix<Complex64> {
        self.part1.map(c_to_f64)
    }

    pub fn part2_matrix(&self) -> Matrix<Complex64> {
        self.part2.map(c_to_f64)
    }

    /// Exact determinant, rounded to double-double.
    pub(crate) fn det_dd(&self) -> DdComplex {
        *self.exact_det.get_or_init(|| grat_to_dd(&self.exact().det()))
    }

    pub(crate) fn exact(&self) -> &ExactSystem {
        self.exact.get_or_init(|| ExactSystem::new(self.nodes.values(), &self.bs))
    }

    pub(crate) fn adjugate(&self) -> &ExactAdjugate {
        self.adjugate.get_or_init(|| self.exact().adjugate())
    }

    pub fn det(&self) -> Complex64 {
        c_to_f64(self.det_dd())
    }

    /// Natural magnitude of `det a`; see [`det_scale`].
    pub fn det_scale(&self) -> f64 {
        to_f64(det_scale_dd(&self.nodes, self.bs.transmission().norm()))
    }

    /// `|det a| / det_scale`, or `|det a|` where the scale vanishes.
    pub fn det_residual(&self) -> f64 {
        let scale = det_scale_dd(&self.nodes, self.bs.transmission().norm());
        let d = c_abs(self.det_dd());
        if scale > 0.0 {
            to_f64(dd_div(d, scale))
        } else {
            to_f64(d)
        }
    }
}

/// `|det a⁽²⁾| = |T|^{Σn_l - N(N-1)/2} (1-|T|²)^{N(N-1)/2} V_N({n_l}) / ∏_{k<N} k!`.
///
/// For the minimal photon numbers this is `|(|T|²-1)^{N(N-1)/2}|`. Used to
/// make the vanishing-determinant test relative.
pub fn det_scale(nodes: &NodeSet, t_abs: f64) -> f64 {
    to_f64(det_scale_dd(nodes, t_abs))
}

pub(crate) fn det_scale_dd(nodes: &NodeSet, t_abs: f64) -> Dd {
    let n = nodes.len();
    let pairs = (n * (n.saturating_sub(1)) / 2) as i64;
    let t_exp = nodes.total_photons() as i64 - pairs;
    let t = dd(t_abs);
    let t_part = if t_exp >= 0 {
        dd_pow(t, t_exp as u32)
    } else {
        dd_recip(dd_pow(t, (-t_exp) as u32))
    };
    let r2 = -(t * t) + 1.0;
    let v = vandermonde_power(nodes).map(dd_int).unwrap_or_else(|_| {
        // fall back to a floating product for very spread-out photon numbers
        let vals = nodes.values();
        let mut p = dd(1.0);
        for j in 0..vals.len() {
            for i in 0..j {
                p *= dd((vals[j] - vals[i]) as f64);
            }
        }
        p
    });
    let fact = (0..n as u32).fold(dd(1.0), |acc, k| acc * factorial_dd(k));
    dd_div(t_part * dd_pow(r2, pairs as u32) * v, fact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::bs_diagonal_element;

    #[test]
    fn one_mode_matrix_is_singular_at_minus_one() {
        let nodes = NodeSet::minimal(1);
        let m = build_coefficient_matrix(&nodes, &BeamSplitter::real(-1.0).unwrap()).unwrap();
        assert_eq!(m.det(), Complex64::new(0.0, 0.0));
        let m = build_coefficient_matrix(&nodes, &BeamSplitter::real(0.3).unwrap()).unwrap();
        // a_11 = T + 1
        assert!((m.entry(0, 0).re - 1.3).abs() < 1e-15);
    }

    #[test]
    fn landmark_root_for_two_modes() {
        let t = 1.0 - 2f64.sqrt();
        let m = build_coefficient_matrix(&NodeSet::minimal(2), &BeamSplitter::real(t).unwrap()).unwrap();
        assert!(m.det().norm() < 1e-15);
        assert!(m.det_residual() < 1e-14);
    }

    #[test]
    fn parts_have_the_stated_structure() {
        let nodes = NodeSet::new(vec![0, 1, 3, 4]).unwrap();
        let bs = BeamSplitter::new(Complex64::new(-0.31, 0.22)).unwrap();
        let m = build_coefficient_matrix(&nodes, &bs).unwrap();
        for l in 0..4 {
            let nl = nodes.values()[l];
            let top = m.part1(0, l);
            assert!((top - bs_diagonal_element(4, nl, &bs).unwrap()).norm() < 1e-15);
            for k in 0..4 {
                assert_eq!(m.part1(k, l), top);
                let a2 = bs_diagonal_element(k as u32, nl, &bs).unwrap();
                assert!((m.part2(k, l) - a2).norm() < 1e-15);
                assert!((m.entry(k, l) - (m.part1(k, l) + m.part2(k, l))).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_transmission_rejected() {
        let r = build_coefficient_matrix(&NodeSet::minimal(3), &BeamSplitter::real(0.0).unwrap());
        assert!(matches!(r, Err(Error::Pole(_))));
    }

    #[test]
    fn scale_reduces_for_minimal_nodes() {
        let t: f64 = 0.4;
        for n in 1..8 {
            let expected = (1.0 - t * t).powi((n * (n - 1) / 2) as i32);
            let got = det_scale(&NodeSet::minimal(n), t);
            assert!((got - expected).abs() <= 1e-14 * expected);
        }
    }
}
