//! Dense full-lattice model of the diamond chain.
//!
//! Used as an independent oracle for the virtual-chain code in [`crate::chain`]:
//! the Hamiltonian is assembled from the lattice edge list and exponentiated by
//! a symmetric eigendecomposition, with no knowledge of the block structure.
//!
//! Site conventions (1-based): apexes `3i + 1`; in each diamond the upper site
//! `3i + 2` couples `+1` to both neighbouring apexes, while the lower site
//! `3i + 3` couples `+1` to the preceding apex and `-1` to the following one.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::chain::{self, ChainSpec, NoiseRealization};
use crate::error::{Error, Result};

/// Edge between two 1-based sites with coupling `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub coupling: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiamondLattice {
    spec: ChainSpec,
    edges: Vec<Edge>,
}

pub fn build_lattice(k: usize) -> DiamondLattice {
    let spec = ChainSpec::new(k);
    let mut edges = Vec::with_capacity(4 * (k + 1));
    for unit in 0..=k {
        let apex = 3 * unit + 1;
        let (upper, lower, next) = (apex + 1, apex + 2, apex + 3);
        edges.push(Edge {
            a: apex,
            b: upper,
            coupling: 1,
        });
        edges.push(Edge {
            a: apex,
            b: lower,
            coupling: 1,
        });
        edges.push(Edge {
            a: upper,
            b: next,
            coupling: 1,
        });
        edges.push(Edge {
            a: lower,
            b: next,
            coupling: -1,
        });
    }
    DiamondLattice { spec, edges }
}

impl DiamondLattice {
    pub fn spec(&self) -> ChainSpec {
        self.spec
    }

    pub fn sites(&self) -> usize {
        self.spec.sites()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Single-excitation hopping matrix, real symmetric.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let n = self.sites();
        let mut h = DMatrix::zeros(n, n);
        for e in &self.edges {
            h[(e.a - 1, e.b - 1)] = f64::from(e.coupling);
            h[(e.b - 1, e.a - 1)] = f64::from(e.coupling);
        }
        h
    }

    /// Orthogonal change of basis from lattice sites to the virtual chain:
    /// apexes map to themselves, each pair `(k, k+1)` to `(|k> +- |k+1>)/sqrt2`.
    pub fn basis_change(&self) -> DMatrix<f64> {
        let n = self.sites();
        let mut v = DMatrix::zeros(n, n);
        for site in 1..=n {
            let row = site - 1;
            match site % 3 {
                1 => v[(row, row)] = 1.0,
                2 => {
                    v[(row, row)] = FRAC_1_SQRT_2;
                    v[(row, row + 1)] = FRAC_1_SQRT_2;
                }
                _ => {
                    v[(row, row - 1)] = FRAC_1_SQRT_2;
                    v[(row, row)] = -FRAC_1_SQRT_2;
                }
            }
        }
        v
    }

    /// `exp(-i t H)` via the eigendecomposition of `H`.
    pub fn exact_evolution(&self, t: f64) -> Result<DMatrix<Complex64>> {
        let eig = SymmetricEigen::try_new(self.hamiltonian(), f64::EPSILON, 10_000)
            .ok_or(Error::EigenFailure)?;
        let n = self.sites();
        let vecs = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let phases = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            eig.eigenvalues
                .iter()
                .map(|&e| Complex64::from_polar(1.0, -e * t)),
        ));
        Ok(&vecs * phases * vecs.adjoint())
    }

    /// Pulse layer expressed in the lattice basis, `V^T P(theta) V`.
    pub fn pulse_in_lattice_basis(&self, theta: &[f64]) -> DMatrix<Complex64> {
        let n = self.sites();
        let v = self.basis_change().map(|x| Complex64::new(x, 0.0));
        let mut p = DMatrix::zeros(n, n);
        for col in 0..n {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[col] = Complex64::new(1.0, 0.0);
            chain::apply_pulse_layer(&self.spec, theta, &mut e);
            for (row, value) in e.into_iter().enumerate() {
                p[(row, col)] = value;
            }
        }
        v.transpose() * p * v
    }

    /// Propagates a lattice-basis state through the noisy protocol by exact
    /// exponentiation of `H` over each segment.
    pub fn propagate(
        &self,
        noise: &NoiseRealization,
        initial: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        let n = self.sites();
        if initial.len() != n {
            return Err(Error::LengthMismatch {
                what: "initial state",
                expected: n,
                actual: initial.len(),
            });
        }
        let schedule = chain::noisy_schedule(&self.spec, noise)?;
        let pairs = self.spec.num_pulses();
        let mut state = DVector::from_column_slice(initial);
        let durations = schedule.durations();
        for (j, &d) in durations.iter().enumerate() {
            state = self.exact_evolution(d)? * state;
            if let Some(&angle) = noise.theta.get(j) {
                state = self.pulse_in_lattice_basis(&vec![angle; pairs]) * state;
            }
        }
        Ok(state.iter().copied().collect())
    }

    /// `V M V^T`: an operator on lattice sites rewritten in the virtual basis.
    pub fn to_virtual(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let v = self.basis_change().map(|x| Complex64::new(x, 0.0));
        &v * m * v.transpose()
    }

    /// Lattice-basis vector mapped into the virtual basis.
    pub fn state_to_virtual(&self, lattice_state: &[Complex64]) -> Vec<Complex64> {
        let v = self.basis_change().map(|x| Complex64::new(x, 0.0));
        (v * DVector::from_column_slice(lattice_state))
            .iter()
            .copied()
            .collect()
    }
}

pub fn exact_evolution(lattice: &DiamondLattice, t: f64) -> Result<DMatrix<Complex64>> {
    lattice.exact_evolution(t)
}

pub fn pulse_in_diamond_basis(lattice: &DiamondLattice, theta: &[f64]) -> DMatrix<Complex64> {
    lattice.pulse_in_lattice_basis(theta)
}

pub fn oracle_propagate(
    lattice: &DiamondLattice,
    noise: &NoiseRealization,
    initial: &[Complex64],
) -> Result<Vec<Complex64>> {
    lattice.propagate(noise, initial)
}
