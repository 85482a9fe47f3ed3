//! Brute-force two-mode Fock-space model of the active beam splitter, used as
//! an independent check of the closed-form matrix elements and of the gate.
//!
//! Convention: `a† → T a† + r b†`, `b† → -r a† + T* b†` with
//! `r = sqrt(1 - |T|²)`. Ancilla partner states `|A_{n-n_l}⟩` are treated as
//! orthonormal labels.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::determinants::Matrix;
use crate::error::{Error, Result};
use crate::gate::{BeamSplitter, GateSolution};
use crate::numeric::{binomial_dd, c_to_f64, dd, dd_div, factorial_dd, Dd, DdComplex};

/// Largest total photon number handled by the simulator.
pub const MAX_PHOTONS: u32 = 34;

const NORM_TOLERANCE: f64 = 1e-12;

/// Signal amplitudes `c_0..c_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalState {
    coeffs: Vec<Complex64>,
}

impl SignalState {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "signal dimension {} is below 2",
                coeffs.len()
            )));
        }
        let norm2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { coeffs })
    }

    /// Rescales `coeffs` to unit norm.
    pub fn normalized(coeffs: Vec<Complex64>) -> Result<Self> {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new(coeffs.into_iter().map(|c| c / norm).collect())
    }

    /// Fock state `|k⟩` in a signal space of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: k + 1 });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self::new(coeffs)
    }

    /// Haar-distributed pure state of dimension `dim`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let coeffs = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(coeffs)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Highest photon number `N`.
    pub fn max_photons(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `(c_0, ..., c_{N-1}, -c_N)`.
    pub fn sign_flipped(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        if let Some(last) = coeffs.last_mut() {
            *last = -*last;
        }
        Self { coeffs }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &SignalState) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Beam-splitter amplitudes `⟨k', M-k'|U|k, M-k⟩` within the sector of `M`
/// total photons; `k`, `k'` count photons in the signal mode.
#[derive(Debug, Clone)]
pub struct TwoModeAmplitudes {
    total: u32,
    matrix: Matrix<Complex64>,
}

impl TwoModeAmplitudes {
    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn amplitude(&self, k_out: usize, k_in: usize) -> Complex64 {
        self.matrix.get(k_out, k_in)
    }

    pub fn matrix(&self) -> &Matrix<Complex64> {
        &self.matrix
    }

    /// Largest entry of `|U†U - 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.matrix.rows();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    s += self.matrix.get(k, i).conj() * self.matrix.get(k, j);
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

fn check_photons(m: u32) -> Result<()> {
    if m > MAX_PHOTONS {
        return Err(Error::PhotonCap { photons: m, cap: MAX_PHOTONS });
    }
    Ok(())
}

fn c_pow(z: DdComplex, e: usize) -> DdComplex {
    (0..e).fold(DdComplex::new(dd(1.0), dd(0.0)), |acc, _| acc * z)
}

fn scale(z: DdComplex, s: Dd) -> DdComplex {
    DdComplex::new(z.re * s, z.im * s)
}

/// Expands `(T a† + r b†)^k (-r a† + T* b†)^{M-k} / sqrt(k!(M-k)!)` on the
/// output Fock basis; column `k` of the sector matrix.
fn sector_column(total: u32, k: usize, t: DdComplex, r: Dd) -> Vec<DdComplex> {
    let m = total as usize;
    let rest = m - k;
    let zero = DdComplex::new(dd(0.0), dd(0.0));
    let mut col = vec![zero; m + 1];
    let rc = DdComplex::new(r, dd(0.0));
    let neg_r = DdComplex::new(-r, dd(0.0));
    for i in 0..=k {
        let first = scale(c_pow(t, i) * c_pow(rc, k - i), binomial_dd(k as i64, i as i64));
        for j in 0..=rest {
            let second = scale(
                c_pow(neg_r, j) * c_pow(t.conj(), rest - j),
                binomial_dd(rest as i64, j as i64),
            );
            col[i + j] += first * second;
        }
    }
    let norm_in = (factorial_dd(k as u32) * factorial_dd(rest as u32)).sqrt();
    for (k_out, v) in col.iter_mut().enumerate() {
        let norm_out = (factorial_dd(k_out as u32) * factorial_dd((m - k_out) as u32)).sqrt();
        *v = scale(*v, dd_div(norm_out, norm_in));
    }
    col
}

fn bs_parts(bs: &BeamSplitter) -> (DdComplex, Dd) {
    let t_dd = bs.t_dd();
    let t2 = t_dd.re * t_dd.re + t_dd.im * t_dd.im;
    let r2 = -t2 + 1.0;
    let r = if r2 > 0.0 { r2.sqrt() } else { dd(0.0) };
    (t_dd, r)
}

/// Sector unitary for `M` total photons.
pub fn bs_sector_unitary(total: u32, bs: &BeamSplitter) -> Result<TwoModeAmplitudes> {
    check_photons(total)?;
    let (t, r) = bs_parts(bs);
    let d = total as usize + 1;
    let cols: Vec<Vec<DdComplex>> = (0..d).map(|k| sector_column(total, k, t, r)).collect();
    let matrix = Matrix::from_fn(d, d, |k_out, k_in| c_to_f64(cols[k_in][k_out]));
    Ok(TwoModeAmplitudes { total, matrix })
}

/// `⟨k_out, n_out|U|k_in, n_in⟩`; zero unless photon number is conserved.
pub fn two_mode_amplitude(k_out: u32, n_out: u32, k_in: u32, n_in: u32, bs: &BeamSplitter) -> Result<Complex64> {
    let total = k_in + n_in;
    check_photons(total.max(k_out + n_out))?;
    if k_out + n_out != total {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (t, r) = bs_parts(bs);
    Ok(c_to_f64(sector_column(total, k_in as usize, t, r)[k_out as usize]))
}

/// Result of sending a signal state through the heralded gate.
#[derive(Debug, Clone)]
pub struct GateOutcome {
    /// Normalized heralded output state.
    pub output: SignalState,
    /// Herald probability `Σ_k |c_k λ_k|²`.
    pub probability: f64,
    /// Per-level amplitudes `λ_k = Σ_l α_l γ_l ⟨k,n_l|U|k,n_l⟩`.
    pub lambdas: Vec<Complex64>,
    /// Largest deviation between the projected amplitude computed over all
    /// output configurations and the diagonal-only sum.
    pub selection_rule_deviation: f64,
}

impl GateOutcome {
    /// `|λ_k|` all equal and `λ_N = -λ_k` for `k < N`, within `tol`.
    pub fn is_sign_flip(&self, tol: f64) -> bool {
        let Some(&last) = self.lambdas.last() else { return false };
        let n = self.lambdas.len() - 1;
        self.lambdas[..n].iter().all(|&l| (l + last).norm() <= tol)
            && self.lambdas.iter().all(|l| (l.norm() - last.norm()).abs() <= tol)
    }

    /// Phase of `λ_0`; physically irrelevant, reported only.
    pub fn global_phase(&self) -> f64 {
        self.lambdas[0].arg()
    }
}

/// Simulates the heralded gate on `signal` with the beam splitter and ancilla
/// weights of `sol`.
pub fn apply_gate(signal: &SignalState, sol: &GateSolution) -> Result<GateOutcome> {
    let n = sol.n();
    if signal.dim() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: signal.dim() });
    }
    let nodes = sol.nodes.values();
    let max_node = *nodes.last().expect("non-empty node set");
    check_photons(n as u32 + max_node)?;
    let bs = sol.beam_splitter;
    let x: Vec<Complex64> = sol.alphas.iter().zip(&sol.gammas).map(|(a, g)| a * g).collect();

    // one sector unitary per distinct total photon number
    let mut sectors: Vec<Option<TwoModeAmplitudes>> = vec![None; (n as u32 + max_node + 1) as usize];
    for k in 0..=n as u32 {
        for &nl in nodes {
            let m = (k + nl) as usize;
            if sectors[m].is_none() {
                sectors[m] = Some(bs_sector_unitary(k + nl, &bs)?);
            }
        }
    }
    let amp = |k_out: usize, n_out: u32, k_in: usize, n_in: u32| -> Complex64 {
        if k_out as u32 + n_out != k_in as u32 + n_in {
            return Complex64::new(0.0, 0.0);
        }
        sectors[k_in + n_in as usize].as_ref().expect("sector built").amplitude(k_out, k_in)
    };

    let c = signal.coefficients();
    let mut lambdas = Vec::with_capacity(n + 1);
    for k in 0..=n {
        lambdas.push((0..n).map(|l| x[l] * amp(k, nodes[l], k, nodes[l])).sum::<Complex64>());
    }

    // Project onto Σ_l α_l* |n_l⟩|A_l⟩. The labels are orthonormal, so only
    // ancilla terms with matching l survive; every input and output signal
    // level is kept and photon conservation does the rest.
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut deviation: f64 = 0.0;
    for (k_out, slot) in out.iter_mut().enumerate() {
        let mut full = Complex64::new(0.0, 0.0);
        for (k_in, &ck) in c.iter().enumerate() {
            for l in 0..n {
                full += ck * x[l] * amp(k_out, nodes[l], k_in, nodes[l]);
            }
        }
        let diagonal = c[k_out] * lambdas[k_out];
        deviation = deviation.max((full - diagonal).norm());
        *slot = full;
    }

    let probability: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    let output = SignalState::normalized(out)?;
    Ok(GateOutcome {
        output,
        probability,
        lambdas,
        selection_rule_deviation: deviation,
    })
}

/// Worst-case gate behaviour over random signal states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Success probability predicted by the cofactor formula.
    pub predicted_p: f64,
    /// Largest `1 - F` against `(c_0, ..., -c_N)`.
    pub max_fidelity_error: f64,
    /// Largest `|P_herald - predicted_p|`.
    pub max_probability_error: f64,
    pub max_selection_rule_deviation: f64,
    /// Every run has `λ_N = -λ_k` and equal `|λ_k|` to `1e-8`.
    pub sign_flip: bool,
    pub global_phase: f64,
}

impl VerificationReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.sign_flip && self.max_fidelity_error <= tol && self.max_probability_error <= tol
    }
}

/// Runs `trials` Haar-random signal states through the gate of `sol`.
pub fn verify_gate(sol: &GateSolution, trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerificationReport {
        n: sol.n(),
        trials,
        seed,
        predicted_p: sol.p,
        max_fidelity_error: 0.0,
        max_probability_error: 0.0,
        max_selection_rule_deviation: 0.0,
        sign_flip: true,
        global_phase: 0.0,
    };
    for i in 0..trials {
        let signal = SignalState::random(sol.n() + 1, &mut rng)?;
        let outcome = apply_gate(&signal, sol)?;
        let target = signal.sign_flipped();
        report.max_fidelity_error = report.max_fidelity_error.max(1.0 - target.fidelity(&outcome.output));
        report.max_probability_error = report
            .max_probability_error
            .max((outcome.probability - sol.p).abs());
        report.max_selection_rule_deviation = report
            .max_selection_rule_deviation
            .max(outcome.selection_rule_deviation);
        report.sign_flip &= outcome.is_sign_flip(1e-8);
        if i == 0 {
            report.global_phase = outcome.global_phase();
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::bs_diagonal_element;

    #[test]
    fn vacuum_sector_is_trivial() {
        let u = bs_sector_unitary(0, &BeamSplitter::real(0.3).unwrap()).unwrap();
        assert_eq!(u.matrix().rows(), 1);
        assert!((u.amplitude(0, 0) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn single_photon_sector() {
        let t = -0.6;
        let u = bs_sector_unitary(1, &BeamSplitter::real(t).unwrap()).unwrap();
        // columns are k_in = 0 (photon in ancilla), k_in = 1 (photon in signal)
        assert!((u.amplitude(1, 1).re - t).abs() < 1e-15);
        assert!((u.amplitude(0, 0).re - t).abs() < 1e-15);
        assert!((u.amplitude(0, 1).re - 0.8).abs() < 1e-15);
        assert!((u.amplitude(1, 0).re + 0.8).abs() < 1e-15);
    }

    #[test]
    fn diagonal_matches_closed_form_for_complex_t() {
        let bs = BeamSplitter::new(Complex64::new(0.41, -0.53)).unwrap();
        for k in 0..6 {
            for n in 0..6 {
                let direct = two_mode_amplitude(k, n, k, n, &bs).unwrap();
                let closed = bs_diagonal_element(k, n, &bs).unwrap();
                assert!((direct - closed).norm() < 1e-13, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn sectors_are_unitary() {
        let bs = BeamSplitter::new(Complex64::new(-0.2, 0.7)).unwrap();
        for m in [0, 3, 10, 24] {
            assert!(bs_sector_unitary(m, &bs).unwrap().unitarity_deviation() < 1e-12);
        }
        assert!(matches!(bs_sector_unitary(35, &bs), Err(Error::PhotonCap { .. })));
    }

    #[test]
    fn photon_number_is_conserved() {
        let bs = BeamSplitter::real(0.4).unwrap();
        assert_eq!(two_mode_amplitude(2, 2, 1, 2, &bs).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn signal_state_validation() {
        assert!(SignalState::new(vec![Complex64::new(1.0, 0.0)]).is_err());
        assert!(matches!(
            SignalState::new(vec![Complex64::new(1.0, 0.0); 2]),
            Err(Error::NotNormalized(_))
        ));
        let s = SignalState::normalized(vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]).unwrap();
        assert!((s.coefficients()[1].im - 0.8).abs() < 1e-15);
        assert!((s.fidelity(&s) - 1.0).abs() < 1e-15);
        assert!(s.fidelity(&s.sign_flipped()) < 1.0);
    }
}
