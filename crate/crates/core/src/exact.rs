//! Dense exact-diagonalization evolution for small registers.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observables::TimeSeries;
use crate::pauli::{PauliSum, DEFAULT_DENSE_CAP};
use crate::statevec::StateVector;

/// Maximum deviation `|H - H^dagger|` accepted for a dense Hamiltonian.
pub const DENSE_HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Eigen {
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

/// `H` as a dense matrix with a lazily computed eigendecomposition.
/// Immutable once built; `evolve` may be called from many threads.
#[derive(Debug)]
pub struct DenseEvolution {
    n_qubits: usize,
    matrix: DMatrix<Complex64>,
    eigen: OnceLock<Eigen>,
}

impl DenseEvolution {
    pub fn build(h: &PauliSum) -> Result<Self> {
        Self::build_capped(h, DEFAULT_DENSE_CAP)
    }

    pub fn build_capped(h: &PauliSum, cap: usize) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        let matrix = h.to_dense_matrix_capped(cap)?;
        let dev = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > DENSE_HERMITIAN_TOLERANCE {
            return Err(Error::NonHermitian);
        }
        Ok(Self { n_qubits: h.n_qubits(), matrix, eigen: OnceLock::new() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    fn eigen(&self) -> &Eigen {
        self.eigen.get_or_init(|| {
            let e = self.matrix.clone().symmetric_eigen();
            Eigen { values: e.eigenvalues.iter().copied().collect(), vectors: e.eigenvectors }
        })
    }

    /// Eigenvalues in the solver's order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen().values
    }

    /// Columns are eigenvectors matching [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigen().vectors
    }

    /// `V exp(-i Lambda t) V^dagger psi0`.
    pub fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        if psi0.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch { left: self.n_qubits, right: psi0.n_qubits() });
        }
        let e = self.eigen();
        let psi = DVector::from_column_slice(psi0.amplitudes());
        let mut c = e.vectors.adjoint() * psi;
        for (ck, &lambda) in c.iter_mut().zip(&e.values) {
            *ck *= Complex64::from_polar(1.0, -lambda * t);
        }
        let out = &e.vectors * c;
        StateVector::from_amplitudes(out.iter().copied().collect())
    }

    /// `|<psi0| U(t) |psi0>|^2`.
    pub fn return_probability(&self, psi0: &StateVector, t: f64) -> Result<f64> {
        Ok(psi0.overlap(&self.evolve(psi0, t)?)?.norm_sqr())
    }

    /// `<psi(t)| O |psi(t)>` at each time, zero errors.
    pub fn observable_series(&self, psi0: &StateVector, obs: &PauliSum, times: &[f64]) -> Result<TimeSeries> {
        if !obs.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        let values = times
            .iter()
            .map(|&t| self.evolve(psi0, t)?.expectation(obs))
            .collect::<Result<Vec<_>>>()?;
        let mut ts = TimeSeries::new(times.to_vec(), values, vec![0.0; times.len()])?;
        ts.metadata.insert("source".into(), "exact".into());
        Ok(ts)
    }
}

/// Free-function form of [`DenseEvolution::observable_series`].
pub fn exact_observable_series(d: &DenseEvolution, psi0: &StateVector, obs: &PauliSum, times: &[f64]) -> Result<TimeSeries> {
    d.observable_series(psi0, obs, times)
}
