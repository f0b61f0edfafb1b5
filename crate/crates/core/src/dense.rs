//! Dense matrices of gates and circuits, built by Kronecker embedding.
//!
//! This path shares nothing with the statevector kernels and is the
//! reference those kernels, the transpiler passes and the mitigation
//! transforms are checked against on small registers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;

pub const DENSE_CIRCUIT_CAP: usize = 10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Embeds a `2^k x 2^k` matrix acting on `qubits` (first listed = most
/// significant local factor) into an `n`-qubit register.
pub fn embed(local: &DMatrix<Complex64>, qubits: &[usize], n_qubits: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n_qubits;
    let k = qubits.len();
    let shifts: Vec<usize> = qubits.iter().map(|&q| n_qubits - 1 - q).collect();
    let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
    let local_index = |x: usize| shifts.iter().fold(0usize, |acc, s| (acc << 1) | ((x >> s) & 1));
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for r in 0..dim {
        let rest = r & !mask;
        let lr = local_index(r);
        for lc in 0..(1usize << k) {
            let mut c = rest;
            for (i, s) in shifts.iter().enumerate() {
                if (lc >> (k - 1 - i)) & 1 == 1 {
                    c |= 1 << s;
                }
            }
            m[(r, c)] = local[(lr, lc)];
        }
    }
    m
}

pub fn gate_matrix(gate: &Gate, n_qubits: usize) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << n_qubits;
    Ok(match gate {
        Gate::PauliRotation { term, angle } => {
            let mut s = PauliSum::new(n_qubits);
            s.push(term.with_coefficient(ONE))?;
            let p = s.to_dense_matrix_capped(n_qubits)?;
            let (sn, cs) = (angle / 2.0).sin_cos();
            DMatrix::identity(dim, dim).map(|v: Complex64| v * cs) - p.map(|v| v * Complex64::new(0.0, sn))
        }
        Gate::Unitary1Q { qubit, matrix, .. } => {
            embed(&DMatrix::from_column_slice(2, 2, matrix.as_slice()), &[*qubit], n_qubits)
        }
        Gate::Unitary2Q { qubits, matrix } => {
            embed(&DMatrix::from_column_slice(4, 4, matrix.as_slice()), qubits, n_qubits)
        }
        Gate::Cnot { control, target } => {
            let m = DMatrix::from_row_slice(
                4,
                4,
                &[ONE, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO],
            );
            embed(&m, &[*control, *target], n_qubits)
        }
        Gate::Swap(a, b) => {
            let m = DMatrix::from_row_slice(
                4,
                4,
                &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE],
            );
            embed(&m, &[*a, *b], n_qubits)
        }
        Gate::Barrier | Gate::Measure(_) => DMatrix::identity(dim, dim),
    })
}

/// Product of all gate matrices, last gate leftmost.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    let n = circuit.n_qubits();
    if n > DENSE_CIRCUIT_CAP {
        return Err(Error::WidthCapExceeded { n_qubits: n, cap: DENSE_CIRCUIT_CAP });
    }
    let dim = 1usize << n;
    let mut u = DMatrix::identity(dim, dim);
    for g in circuit.gates() {
        u = gate_matrix(g, n)? * u;
    }
    Ok(u)
}

/// Column `index` of `u`, i.e. `u |index>`.
pub fn state_from_matrix(u: &DMatrix<Complex64>, index: usize) -> Vec<Complex64> {
    u.column(index).iter().copied().collect()
}

/// Permutation matrix sending virtual qubit `v` to position `perm[v]`.
pub fn qubit_permutation(perm: &[usize]) -> DMatrix<Complex64> {
    let n = perm.len();
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for c in 0..dim {
        let mut r = 0;
        for (v, &p) in perm.iter().enumerate() {
            if (c >> (n - 1 - v)) & 1 == 1 {
                r |= 1 << (n - 1 - p);
            }
        }
        m[(r, c)] = ONE;
    }
    m
}

/// Max entrywise distance.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Max entrywise distance after removing the global phase that best aligns
/// `b` to `a`.
pub fn max_abs_diff_up_to_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let inner: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    if inner.norm() == 0.0 {
        return max_abs_diff(a, b);
    }
    let phase = inner / inner.norm();
    max_abs_diff(a, &b.map(|v| v * phase))
}
