//! Gate-list circuit IR.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliTerm};

/// Tolerance on `U^dagger U = I` for explicit matrices.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `exp(-i * angle/2 * P)` for the unit-coefficient string `P`.
    PauliRotation { term: PauliTerm, angle: f64 },
    Unitary1Q { qubit: usize, matrix: Matrix2<Complex64>, label: &'static str },
    /// `qubits[0]` is the more significant factor of the 4x4 matrix.
    Unitary2Q { qubits: [usize; 2], matrix: Matrix4<Complex64> },
    Cnot { control: usize, target: usize },
    Swap(usize, usize),
    Barrier,
    Measure(Vec<usize>),
}

fn max_unitary_deviation(m: nalgebra::DMatrix<Complex64>) -> f64 {
    let prod = m.adjoint() * &m;
    let mut worst: f64 = 0.0;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let expect = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[(r, c)] - expect).norm());
        }
    }
    worst
}

impl Gate {
    /// Rotation about a Pauli string; the term's coefficient is discarded.
    pub fn pauli_rotation(term: &PauliTerm, angle: f64) -> Gate {
        Gate::PauliRotation { term: term.with_coefficient(ONE), angle }
    }

    pub fn rz(n_qubits: usize, qubit: usize, angle: f64) -> Result<Gate> {
        Ok(Gate::PauliRotation { term: PauliTerm::real(n_qubits, 1.0, [(qubit, Pauli::Z)])?, angle })
    }

    pub fn rzz(n_qubits: usize, a: usize, b: usize, angle: f64) -> Result<Gate> {
        Ok(Gate::PauliRotation { term: PauliTerm::real(n_qubits, 1.0, [(a, Pauli::Z), (b, Pauli::Z)])?, angle })
    }

    pub fn unitary_1q(qubit: usize, matrix: Matrix2<Complex64>) -> Result<Gate> {
        let dev = max_unitary_deviation(nalgebra::DMatrix::from_column_slice(matrix.nrows(), matrix.ncols(), matrix.as_slice()));
        if dev > UNITARY_TOLERANCE {
            return Err(Error::NonUnitary(dev));
        }
        Ok(Gate::Unitary1Q { qubit, matrix, label: "u" })
    }

    pub fn unitary_2q(a: usize, b: usize, matrix: Matrix4<Complex64>) -> Result<Gate> {
        if a == b {
            return Err(Error::InvalidParameter("two-qubit gate on a single qubit".into()));
        }
        let dev = max_unitary_deviation(nalgebra::DMatrix::from_column_slice(matrix.nrows(), matrix.ncols(), matrix.as_slice()));
        if dev > UNITARY_TOLERANCE {
            return Err(Error::NonUnitary(dev));
        }
        Ok(Gate::Unitary2Q { qubits: [a, b], matrix })
    }

    fn fixed(qubit: usize, label: &'static str, m: [Complex64; 4]) -> Gate {
        Gate::Unitary1Q { qubit, matrix: Matrix2::new(m[0], m[1], m[2], m[3]), label }
    }

    pub fn h(qubit: usize) -> Gate {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::fixed(qubit, "h", [s, s, s, -s])
    }

    pub fn s(qubit: usize) -> Gate {
        Self::fixed(qubit, "s", [ONE, ZERO, ZERO, Complex64::i()])
    }

    pub fn sdg(qubit: usize) -> Gate {
        Self::fixed(qubit, "sdg", [ONE, ZERO, ZERO, -Complex64::i()])
    }

    pub fn x(qubit: usize) -> Gate {
        Self::pauli(qubit, Pauli::X)
    }

    pub fn pauli(qubit: usize, p: Pauli) -> Gate {
        let m = p.matrix();
        let label = match p {
            Pauli::X => "x",
            Pauli::Y => "y",
            Pauli::Z => "z",
        };
        Self::fixed(qubit, label, [m[0][0], m[0][1], m[1][0], m[1][1]])
    }

    /// Qubits the gate acts on, in gate order. Barrier spans nothing explicit.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::PauliRotation { term, .. } => term.support(),
            Gate::Unitary1Q { qubit, .. } => vec![*qubit],
            Gate::Unitary2Q { qubits, .. } => qubits.to_vec(),
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Swap(a, b) => vec![*a, *b],
            Gate::Barrier => Vec::new(),
            Gate::Measure(q) => q.clone(),
        }
    }

    /// Unitary gates acting on exactly two qubits.
    pub fn is_two_qubit(&self) -> bool {
        match self {
            Gate::PauliRotation { term, .. } => term.weight() == 2,
            Gate::Unitary2Q { .. } | Gate::Cnot { .. } | Gate::Swap(..) => true,
            _ => false,
        }
    }

    pub fn is_unitary_op(&self) -> bool {
        !matches!(self, Gate::Barrier | Gate::Measure(_))
    }

    /// CNOT count after lowering to `{CNOT, 1q}`: `2(w-1)` for a weight-w
    /// Pauli rotation, 3 for SWAP, 3 for a generic two-qubit unitary.
    pub fn cnot_cost(&self) -> usize {
        match self {
            Gate::PauliRotation { term, .. } if term.weight() >= 2 => 2 * (term.weight() - 1),
            Gate::Cnot { .. } => 1,
            Gate::Swap(..) | Gate::Unitary2Q { .. } => 3,
            _ => 0,
        }
    }

    /// True for a rotation about exactly `Z_a Z_b`.
    pub fn is_zz_rotation(&self) -> bool {
        matches!(self, Gate::PauliRotation { term, .. } if term.weight() == 2 && term.is_diagonal())
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::PauliRotation { term, angle } => Gate::PauliRotation { term: term.clone(), angle: -angle },
            Gate::Unitary1Q { qubit, matrix, label } => {
                let label = match *label {
                    "s" => "sdg",
                    "sdg" => "s",
                    "h" | "x" | "y" | "z" => label,
                    _ => "u",
                };
                Gate::Unitary1Q { qubit: *qubit, matrix: matrix.adjoint(), label }
            }
            Gate::Unitary2Q { qubits, matrix } => Gate::Unitary2Q { qubits: *qubits, matrix: matrix.adjoint() },
            g => g.clone(),
        }
    }

    /// Relabels every qubit through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize, n_qubits: usize) -> Result<Gate> {
        Ok(match self {
            Gate::PauliRotation { term, angle } => {
                let paulis: Vec<_> = term.paulis().iter().map(|(&q, &p)| (map(q), p)).collect();
                Gate::PauliRotation { term: PauliTerm::new(n_qubits, term.coefficient(), paulis)?, angle: *angle }
            }
            Gate::Unitary1Q { qubit, matrix, label } => Gate::Unitary1Q { qubit: map(*qubit), matrix: *matrix, label },
            Gate::Unitary2Q { qubits, matrix } => Gate::Unitary2Q { qubits: [map(qubits[0]), map(qubits[1])], matrix: *matrix },
            Gate::Cnot { control, target } => Gate::Cnot { control: map(*control), target: map(*target) },
            Gate::Swap(a, b) => Gate::Swap(map(*a), map(*b)),
            Gate::Barrier => Gate::Barrier,
            Gate::Measure(q) => Gate::Measure(q.iter().map(|&x| map(x)).collect()),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Gate::PauliRotation { term, .. } => format!("R[{}]", term.label()),
            Gate::Unitary1Q { label, .. } => label.to_string(),
            Gate::Unitary2Q { .. } => "u2".into(),
            Gate::Cnot { .. } => "cx".into(),
            Gate::Swap(..) => "swap".into(),
            Gate::Barrier => "barrier".into(),
            Gate::Measure(_) => "measure".into(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::PauliRotation { term, angle } => write!(f, "R[{}]({angle})", term.label()),
            Gate::Barrier => write!(f, "barrier"),
            g => {
                let qs: Vec<String> = g.qubits().iter().map(|q| q.to_string()).collect();
                write!(f, "{} {}", g.name(), qs.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    pub metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), metadata: BTreeMap::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        for &q in &qs {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: self.n_qubits });
            }
        }
        if let Gate::PauliRotation { term, .. } = &gate {
            if term.n_qubits() != self.n_qubits {
                return Err(Error::WidthMismatch { left: self.n_qubits, right: term.n_qubits() });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::InvalidParameter(format!("{gate} acts twice on qubit {}", qs[0])));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Appends every gate of `other` (metadata is not merged).
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::WidthMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// `C^dagger`: reversed order, each gate inverted. Measurements dropped.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().filter(|g| !matches!(g, Gate::Measure(_))).map(Gate::inverse).collect(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn swap_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Swap(..))).count()
    }

    pub fn cnot_cost(&self) -> usize {
        self.gates.iter().map(Gate::cnot_cost).sum()
    }

    /// Gates excluding barriers and measurements.
    pub fn op_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_unitary_op()).count()
    }
}
