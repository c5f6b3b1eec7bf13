//! Readout at the last site: reduced qubit state and transfer fidelity.

use num_complex::Complex64;

use crate::error::{Error, Result};

const AMPLITUDE_SLACK: f64 = 1e-9;

/// Qubit `alpha |0> + beta |1>` to be sent down the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl QubitState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "|alpha|^2 + |beta|^2 = {norm}, expected 1"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Bloch-sphere parametrisation `alpha = cos(theta/2)`, `beta = sin(theta/2) e^{-i phi}`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self {
            alpha: Complex64::new(c, 0.0),
            beta: Complex64::from_polar(s, -phi),
        }
    }
}

/// 2x2 density matrix of the qubit read out at site `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub rho: [[Complex64; 2]; 2],
}

impl ReducedState {
    pub fn trace(&self) -> Complex64 {
        self.rho[0][0] + self.rho[1][1]
    }

    /// Eigenvalues in ascending order (the matrix is Hermitian).
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.rho[0][0].re;
        let d = self.rho[1][1].re;
        let b = self.rho[0][1].norm();
        let mean = (a + d) / 2.0;
        let radius = (((a - d) / 2.0).powi(2) + b * b).sqrt();
        [mean - radius, mean + radius]
    }

    /// `<psi| rho |psi>` for a pure qubit state.
    pub fn overlap(&self, qubit: &QubitState) -> f64 {
        let v = [qubit.alpha, qubit.beta];
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += v[i].conj() * self.rho[i][j] * v[j];
            }
        }
        acc.re
    }
}

fn check_amplitude(psi_n: Complex64) -> Result<()> {
    let m = psi_n.norm();
    if m > 1.0 + AMPLITUDE_SLACK || !m.is_finite() {
        return Err(Error::InvalidAmplitude(m));
    }
    Ok(())
}

/// Partial trace of `alpha|0> + beta sum_i psi_i |i>` onto site `N`.
pub fn reduced_state(qubit: &QubitState, psi_n: Complex64) -> Result<ReducedState> {
    check_amplitude(psi_n)?;
    let a2 = qubit.alpha.norm_sqr();
    let b2 = qubit.beta.norm_sqr();
    let p2 = psi_n.norm_sqr();
    let coherence = qubit.alpha * qubit.beta.conj() * psi_n.conj();
    Ok(ReducedState {
        rho: [
            [Complex64::new(a2 + b2 * (1.0 - p2), 0.0), coherence],
            [coherence.conj(), Complex64::new(b2 * p2, 0.0)],
        ],
    })
}

/// Fidelity `<psi| rho_N |psi>` of a given input qubit.
pub fn fidelity_for_input(qubit: &QubitState, psi_n: Complex64) -> Result<f64> {
    check_amplitude(psi_n)?;
    let a2 = qubit.alpha.norm_sqr();
    let b2 = qubit.beta.norm_sqr();
    Ok(a2 + 2.0 * a2 * b2 * psi_n.re + b2 * (b2 - a2) * psi_n.norm_sqr())
}

/// Fidelity averaged uniformly over the Bloch sphere of inputs:
/// `1/2 + |psi_N|^2 / 6 + Re(psi_N) / 3`.
pub fn input_averaged_fidelity(psi_n: Complex64) -> Result<f64> {
    check_amplitude(psi_n)?;
    Ok(averaged_from_moments(psi_n.re, psi_n.norm_sqr()))
}

/// `1/2 + second / 6 + first / 3`; shared by every averaging route.
pub fn averaged_from_moments(first: f64, second: f64) -> f64 {
    0.5 + second / 6.0 + first / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis_qubit(excited: bool) -> QubitState {
        if excited {
            QubitState::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap()
        } else {
            QubitState::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap()
        }
    }

    #[test]
    fn reduced_state_examples() {
        let r = reduced_state(&basis_qubit(false), c(0.3, 0.2)).unwrap();
        assert_eq!(
            r.rho,
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]
        );
        let r = reduced_state(&basis_qubit(true), c(1.0, 0.0)).unwrap();
        assert_eq!(
            r.rho,
            [[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
        );
        let r = reduced_state(&basis_qubit(true), c(0.0, 0.0)).unwrap();
        assert_eq!(
            r.rho,
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]
        );
    }

    #[test]
    fn amplitude_bound_enforced() {
        let q = QubitState::from_angles(1.0, 0.5);
        assert!(matches!(
            reduced_state(&q, c(1.1, 0.0)),
            Err(Error::InvalidAmplitude(_))
        ));
        assert!(fidelity_for_input(&q, c(0.0, 1.01)).is_err());
        assert!(input_averaged_fidelity(c(-1.0, 1e-3)).is_err());
        assert!(input_averaged_fidelity(c(1.0 + 1e-12, 0.0)).is_ok());
    }

    #[test]
    fn invalid_qubit_rejected() {
        assert!(QubitState::new(c(1.0, 0.0), c(0.1, 0.0)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let q = QubitState::from_angles(2.1, 0.7);
        assert_eq!(
            fidelity_for_input(&basis_qubit(false), c(0.2, 0.1)).unwrap(),
            1.0
        );
        let psi = c(0.6, 0.3);
        let f = fidelity_for_input(&basis_qubit(true), psi).unwrap();
        assert!((f - psi.norm_sqr()).abs() < 1e-15);
        assert!((fidelity_for_input(&q, c(1.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn averaged_fidelity_examples() {
        assert_eq!(input_averaged_fidelity(c(1.0, 0.0)).unwrap(), 1.0);
        assert_eq!(input_averaged_fidelity(c(0.0, 0.0)).unwrap(), 0.5);
        assert!((input_averaged_fidelity(c(-1.0, 0.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    /// Composite Simpson on [0, pi] x [0, 2 pi] with the sin(theta) measure.
    fn bloch_average(psi: Complex64) -> f64 {
        let (nt, np) = (400, 8);
        let simpson = |i: usize, n: usize| -> f64 {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let (ht, hp) = (PI / nt as f64, 2.0 * PI / np as f64);
        let mut acc = 0.0;
        for i in 0..=nt {
            let theta = i as f64 * ht;
            for j in 0..=np {
                let phi = j as f64 * hp;
                let f = fidelity_for_input(&QubitState::from_angles(theta, phi), psi).unwrap();
                acc += simpson(i, nt) * simpson(j, np) * f * theta.sin();
            }
        }
        acc * ht * hp / 9.0 / (4.0 * PI)
    }

    proptest! {
        #[test]
        fn averaged_matches_bloch_quadrature(r in 0.0f64..=1.0, arg in 0.0f64..(2.0 * PI)) {
            let psi = Complex64::from_polar(r, arg);
            let exact = input_averaged_fidelity(psi).unwrap();
            prop_assert!((exact - bloch_average(psi)).abs() < 1e-6);
            prop_assert!((1.0 / 3.0 - 1e-15..=1.0 + 1e-15).contains(&exact));
        }

        #[test]
        fn reduced_state_is_a_density_matrix(
            theta in 0.0f64..=PI, phi in 0.0f64..(2.0 * PI), r in 0.0f64..=1.0, arg in 0.0f64..(2.0 * PI)
        ) {
            let q = QubitState::from_angles(theta, phi);
            let psi = Complex64::from_polar(r, arg);
            let rho = reduced_state(&q, psi).unwrap();
            prop_assert!((rho.trace() - 1.0).norm() < 1e-12);
            prop_assert!((rho.rho[0][1] - rho.rho[1][0].conj()).norm() < 1e-15);
            let [lo, hi] = rho.eigenvalues();
            prop_assert!(lo >= -1e-10 && hi <= 1.0 + 1e-10);
            let f = fidelity_for_input(&q, psi).unwrap();
            prop_assert!((f - rho.overlap(&q)).abs() < 1e-12);
        }
    }
}
