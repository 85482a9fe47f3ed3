use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{c_powi, c_to_f64, Dd, DdComplex};
use crate::polynomials::jacobi_t2;

fn is_zero(z: &Complex64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

/// The active beam splitter, described by its complex transmission `T`.
///
/// `T` is held to double-double precision as `t + t_low`; roots of the gate
/// condition need more than 53 bits for the cofactor rows to agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitter {
    t: Complex64,
    #[serde(default, skip_serializing_if = "is_zero")]
    t_low: Complex64,
}

impl BeamSplitter {
    pub fn new(t: Complex64) -> Result<Self> {
        Self::check(t)?;
        Ok(Self { t, t_low: Complex64::new(0.0, 0.0) })
    }

    /// From a double-double transmission.
    pub fn from_dd(t: DdComplex) -> Result<Self> {
        let hi = Complex64::new(t.re.hi(), t.im.hi());
        Self::check(hi)?;
        Ok(Self { t: hi, t_low: Complex64::new(t.re.lo(), t.im.lo()) })
    }

    fn check(t: Complex64) -> Result<()> {
        if !(t.re.is_finite() && t.im.is_finite()) || t.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidTransmission(t.norm()));
        }
        Ok(())
    }

    pub fn real(t: f64) -> Result<Self> {
        Self::new(Complex64::new(t, 0.0))
    }

    pub fn transmission(&self) -> Complex64 {
        self.t
    }

    /// Jacobi argument `P = 2|T|² - 1`.
    pub fn argument(&self) -> f64 {
        2.0 * self.t.norm_sqr() - 1.0
    }

    /// Reflection magnitude `sqrt(1 - |T|²)`.
    pub fn reflection(&self) -> f64 {
        (1.0 - self.t.norm_sqr()).max(0.0).sqrt()
    }

    /// `T` with its low-order part.
    pub fn t_dd(&self) -> DdComplex {
        DdComplex::new(
            Dd::new_add(self.t.re, self.t_low.re),
            Dd::new_add(self.t.im, self.t_low.im),
        )
    }
}

/// `<k,n|U|k,n> = (T*)^{n-k} P_k^{(0,n-k)}(2|T|²-1)` in double-double.
pub(crate) fn diagonal_element_dd(k: u32, n: u32, t: DdComplex) -> DdComplex {
    let t2 = t.re * t.re + t.im * t.im;
    let beta = n as i64 - k as i64;
    let jac = jacobi_t2(k, beta, t2);
    let phase = c_powi(t.conj(), beta);
    DdComplex::new(phase.re * jac, phase.im * jac)
}

/// Fock-diagonal beam-splitter amplitude `<k,n|U|k,n>` with `k` photons in the
/// signal mode and `n` in the ancilla mode.
pub fn bs_diagonal_element(k: u32, n: u32, bs: &BeamSplitter) -> Result<Complex64> {
    if n < k && bs.t.norm() == 0.0 {
        return Err(Error::Pole(format!(
            "(T*)^{} at T = 0",
            n as i64 - k as i64
        )));
    }
    Ok(c_to_f64(diagonal_element_dd(k, n, bs.t_dd())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dd;

    fn real(t: f64) -> BeamSplitter {
        BeamSplitter::real(t).unwrap()
    }

    #[test]
    fn vacuum_signal_picks_up_t_star_powers() {
        let bs = BeamSplitter::new(Complex64::new(0.3, -0.4)).unwrap();
        for n in 0..6 {
            let got = bs_diagonal_element(0, n, &bs).unwrap();
            let expected = bs.transmission().conj().powu(n);
            assert!((got - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn one_photon_each_mode() {
        // <1,1|U|1,1> = P_1^{(0,0)}(2T²-1) = 2T²-1; no T prefactor since n - k = 0.
        for &t in &[-0.9, -0.41, 0.2, 0.77] {
            let got = bs_diagonal_element(1, 1, &real(t)).unwrap();
            assert!((got.re - (2.0 * t * t - 1.0)).abs() < 1e-15);
            assert_eq!(got.im, 0.0);
        }
    }

    #[test]
    fn single_photon_in_signal() {
        let bs = BeamSplitter::new(Complex64::new(0.6, 0.3)).unwrap();
        let got = bs_diagonal_element(1, 0, &bs).unwrap();
        assert!((got - bs.transmission()).norm() < 1e-15);
    }

    #[test]
    fn pole_at_zero_transmission() {
        assert!(matches!(bs_diagonal_element(2, 1, &real(0.0)), Err(Error::Pole(_))));
        assert!(bs_diagonal_element(1, 2, &real(0.0)).is_ok());
    }

    #[test]
    fn rejects_super_unit_transmission() {
        assert!(BeamSplitter::real(1.2).is_err());
        let bs = real(-0.6);
        assert!((bs.argument() - (2.0 * 0.36 - 1.0)).abs() < 1e-15);
        assert!((bs.reflection() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_t_dd_does_not_poison_nonnegative_powers() {
        let z = diagonal_element_dd(0, 0, DdComplex::new(dd(0.0), dd(0.0)));
        assert_eq!(f64::from(z.re), 1.0);
    }
}
