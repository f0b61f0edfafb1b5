//! Lowering to device basis gates.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::Pauli;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// CNOT plus single-qubit gates (Rz, H, S, S^dagger).
    CnotRz,
    /// Arbitrary Pauli rotations are native (trapped-ion style).
    #[default]
    NativePauli,
}

impl std::str::FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cnot_rz" => Ok(Basis::CnotRz),
            "native_pauli" => Ok(Basis::NativePauli),
            _ => Err(Error::InvalidParameter(format!("unknown basis {s:?} (cnot_rz | native_pauli)"))),
        }
    }
}

/// Gates mapping `Z` onto `p` when applied before the parity ladder, i.e.
/// `V p V^dagger = Z`.
fn to_z_basis(q: usize, p: Pauli) -> Vec<Gate> {
    match p {
        Pauli::X => vec![Gate::h(q)],
        Pauli::Y => vec![Gate::sdg(q), Gate::h(q)],
        Pauli::Z => vec![],
    }
}

fn from_z_basis(q: usize, p: Pauli) -> Vec<Gate> {
    match p {
        Pauli::X => vec![Gate::h(q)],
        Pauli::Y => vec![Gate::h(q), Gate::s(q)],
        Pauli::Z => vec![],
    }
}

/// Rewrites every multi-qubit Pauli rotation as basis changes around a
/// CNOT parity ladder onto the last support qubit with an `Rz` in the
/// middle. Single-qubit rotations, CNOT, SWAP, barriers and measurements
/// pass through; explicit two-qubit unitaries are rejected for `CnotRz`.
pub fn decompose_to_basis(circuit: &Circuit, basis: Basis) -> Result<Circuit> {
    if basis == Basis::NativePauli {
        return Ok(circuit.clone());
    }
    let n = circuit.n_qubits();
    let mut out = Circuit::new(n);
    out.metadata = circuit.metadata.clone();
    out.metadata.insert("basis".into(), "cnot_rz".into());
    for g in circuit.gates() {
        match g {
            Gate::PauliRotation { term, angle } if term.weight() >= 2 => {
                let paulis: Vec<(usize, Pauli)> = term.paulis().iter().map(|(&q, &p)| (q, p)).collect();
                for &(q, p) in &paulis {
                    out.extend(to_z_basis(q, p))?;
                }
                for w in paulis.windows(2) {
                    out.push(Gate::Cnot { control: w[0].0, target: w[1].0 })?;
                }
                let last = paulis.last().unwrap().0;
                out.push(Gate::rz(n, last, *angle)?)?;
                for w in paulis.windows(2).rev() {
                    out.push(Gate::Cnot { control: w[0].0, target: w[1].0 })?;
                }
                for &(q, p) in &paulis {
                    out.extend(from_z_basis(q, p))?;
                }
            }
            Gate::Unitary2Q { .. } => {
                return Err(Error::UnsupportedGate { gate: g.to_string(), context: "cnot_rz decomposition" })
            }
            g => out.push(g.clone())?,
        }
    }
    Ok(out)
}

/// Replaces each SWAP by three CNOTs so noise is charged per CNOT.
pub fn expand_swaps(circuit: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.n_qubits());
    out.metadata = circuit.metadata.clone();
    for g in circuit.gates() {
        match *g {
            Gate::Swap(a, b) => out.extend([
                Gate::Cnot { control: a, target: b },
                Gate::Cnot { control: b, target: a },
                Gate::Cnot { control: a, target: b },
            ])?,
            _ => out.push(g.clone())?,
        }
    }
    Ok(out)
}
