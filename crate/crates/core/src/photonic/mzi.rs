//! Single Mach-Zehnder interferometer: two directional couplers around an
//! internal phase shifter, followed by an output phase shifter on the upper arm.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{PufError, Result};

/// Internal phase `theta` and output phase `phi`, both reduced into `[0, 2π)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MziSettings {
    theta: f64,
    phi: f64,
}

impl MziSettings {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta: reduce_angle(theta),
            phi: reduce_angle(phi),
        }
    }

    /// Internal phase only; the output shifter is left at zero.
    pub fn internal(theta: f64) -> Self {
        Self::new(theta, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Power splitting ratios of the two directional couplers in an MZI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplerPair {
    pub eta1: f64,
    pub eta2: f64,
}

impl CouplerPair {
    pub const IDEAL: CouplerPair = CouplerPair { eta1: 0.5, eta2: 0.5 };

    pub fn new(eta1: f64, eta2: f64) -> Result<Self> {
        let pair = Self { eta1, eta2 };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        for eta in [self.eta1, self.eta2] {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(PufError::Domain(format!("coupler ratio {eta} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

impl Default for CouplerPair {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// Lossless directional coupler `[[√(1−η), j√η], [j√η, √(1−η)]]`.
fn coupler(eta: f64) -> [[Complex64; 2]; 2] {
    let t = Complex64::new((1.0 - eta).sqrt(), 0.0);
    let k = Complex64::new(0.0, eta.sqrt());
    [[t, k], [k, t]]
}

fn mul2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// The 2×2 block as a plain array, for the propagation hot path.
pub(crate) fn mzi_block(settings: MziSettings, couplers: CouplerPair) -> [[Complex64; 2]; 2] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let internal = [[Complex64::from_polar(1.0, settings.theta), zero], [zero, one]];
    let output = [[Complex64::from_polar(1.0, settings.phi), zero], [zero, one]];
    let inner = mul2(&internal, &coupler(couplers.eta1));
    let block = mul2(&coupler(couplers.eta2), &inner);
    mul2(&output, &block)
}

/// `diag(e^{jφ}, 1) · B(η2) · diag(e^{jθ}, 1) · B(η1)`.
///
/// At `η1 = η2 = 0.5` this is the textbook MZI transfer function
/// `½·diag(e^{jφ},1)·[[1,j],[j,1]]·diag(e^{jθ},1)·[[1,j],[j,1]]`.
pub fn mzi_unitary(settings: MziSettings, couplers: CouplerPair) -> Result<ComplexMatrix> {
    couplers.validate()?;
    if !(settings.theta.is_finite() && settings.phi.is_finite()) {
        return Err(PufError::Domain("non-finite phase".into()));
    }
    let b = mzi_block(settings, couplers);
    Ok(ComplexMatrix::from_rows(&[&b[0], &b[1]]))
}

/// Closed sine/cosine form of the ideal (50:50) MZI:
/// `j·e^{jθ/2}·[[e^{jφ}sin(θ/2), e^{jφ}cos(θ/2)], [cos(θ/2), −sin(θ/2)]]`.
pub fn ideal_mzi_sine_cosine(settings: MziSettings) -> ComplexMatrix {
    let half = settings.theta / 2.0;
    let (s, c) = half.sin_cos();
    let prefactor = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, half);
    let out_phase = Complex64::from_polar(1.0, settings.phi);
    ComplexMatrix::from_rows(&[
        &[out_phase * s, out_phase * c],
        &[Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
    ])
    .scale(prefactor)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn intensities_from_upper(u: &ComplexMatrix) -> (f64, f64) {
        let out = u.mul_vec(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        (out[0].norm_sqr(), out[1].norm_sqr())
    }

    #[test]
    fn cross_bar_and_balanced_states() {
        let cross = mzi_unitary(MziSettings::internal(0.0), CouplerPair::IDEAL).unwrap();
        let (a, b) = intensities_from_upper(&cross);
        assert!(a.abs() < 1e-15 && (b - 1.0).abs() < 1e-15);

        let bar = mzi_unitary(MziSettings::internal(PI), CouplerPair::IDEAL).unwrap();
        let (a, b) = intensities_from_upper(&bar);
        assert!((a - 1.0).abs() < 1e-15 && b.abs() < 1e-15);

        // sin²(π/4) = cos²(π/4) = 1/2
        let half = mzi_unitary(MziSettings::internal(PI / 2.0), CouplerPair::IDEAL).unwrap();
        let (a, b) = intensities_from_upper(&half);
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sine_cosine_special_cases() {
        let j = Complex64::new(0.0, 1.0);
        let zero = ideal_mzi_sine_cosine(MziSettings::default());
        let expect = ComplexMatrix::from_rows(&[&[0.0.into(), j], &[j, 0.0.into()]]);
        assert!(zero.max_abs_diff(&expect) < 1e-15);

        let bar = ideal_mzi_sine_cosine(MziSettings::internal(PI));
        assert!(bar[(0, 1)].norm() < 1e-15 && bar[(1, 0)].norm() < 1e-15);
        assert!((bar[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((bar[(1, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn textbook_product_at_ideal_couplers() {
        // ½ · diag(e^{jφ},1) · H · diag(e^{jθ},1) · H with H = [[1,j],[j,1]]
        let (theta, phi) = (1.234, 0.567);
        let j = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let h = ComplexMatrix::from_rows(&[&[one, j], &[j, one]]);
        let p = ComplexMatrix::from_rows(&[&[Complex64::from_polar(1.0, theta), zero], &[zero, one]]);
        let o = ComplexMatrix::from_rows(&[&[Complex64::from_polar(1.0, phi), zero], &[zero, one]]);
        let expect = (&(&(&o * &h) * &p) * &h).scale(Complex64::new(0.5, 0.0));
        let got = mzi_unitary(MziSettings::new(theta, phi), CouplerPair::IDEAL).unwrap();
        assert!(got.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn rejects_bad_couplers() {
        assert!(CouplerPair::new(0.0, 0.5).is_err());
        assert!(CouplerPair::new(0.5, 1.0).is_err());
        assert!(CouplerPair::new(f64::NAN, 0.5).is_err());
        let bad = CouplerPair { eta1: 1.2, eta2: 0.5 };
        assert!(matches!(
            mzi_unitary(MziSettings::default(), bad),
            Err(PufError::Domain(_))
        ));
    }

    #[test]
    fn angles_are_reduced() {
        let s = MziSettings::new(-PI / 2.0, 5.0 * PI);
        assert!((s.theta() - 1.5 * PI).abs() < 1e-12);
        assert!((s.phi() - PI).abs() < 1e-12);
        assert!(MziSettings::new(-1e-300, 0.0).theta() < TAU);
    }
}
