//! Pauli twirling of ZZ rotations and CNOTs.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng as _;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliTerm};
use crate::rng::{derived_rng, Rng};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const PAULIS: [Option<Pauli>; 4] = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];

/// A single-qubit Pauli with phase, accumulated between non-Pauli gates.
#[derive(Debug, Clone, Copy)]
struct Pending {
    phase: Complex64,
    pauli: Option<Pauli>,
}

impl Pending {
    const IDENTITY: Pending = Pending { phase: ONE, pauli: None };

    /// Left-multiplies by `p` (applied after what is already pending).
    fn then(&mut self, p: Option<Pauli>, phase: Complex64) {
        self.phase *= phase;
        match (p, self.pauli) {
            (None, _) => {}
            (Some(p), None) => self.pauli = Some(p),
            (Some(p), Some(q)) => {
                let (ph, r) = p.mul(q);
                self.phase *= ph;
                self.pauli = r;
            }
        }
    }

    fn gate(&self, qubit: usize) -> Option<Gate> {
        if self.pauli.is_none() && (self.phase - ONE).norm() < 1e-15 {
            return None;
        }
        if self.phase == ONE {
            return self.pauli.map(|p| Gate::pauli(qubit, p));
        }
        let m = match self.pauli {
            Some(p) => {
                let m = p.matrix();
                Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
            }
            None => Matrix2::identity(),
        };
        Some(Gate::Unitary1Q { qubit, matrix: m * self.phase, label: "pauli" })
    }
}

fn existing_pauli(g: &Gate) -> Option<(usize, Pauli)> {
    match g {
        Gate::Unitary1Q { qubit, label, .. } => match *label {
            "x" => Some((*qubit, Pauli::X)),
            "y" => Some((*qubit, Pauli::Y)),
            "z" => Some((*qubit, Pauli::Z)),
            _ => None,
        },
        _ => None,
    }
}

/// `CNOT (pc ⊗ pt) CNOT` on a local (control = 0, target = 1) register.
fn conjugate_by_cnot(pc: Option<Pauli>, pt: Option<Pauli>) -> Result<PauliTerm> {
    use Pauli::*;
    let image = |q: usize, p: Pauli| -> Vec<(usize, Pauli)> {
        match (q, p) {
            (0, X) => vec![(0, X), (1, X)],
            (0, Y) => vec![(0, Y), (1, X)],
            (0, Z) => vec![(0, Z)],
            (1, X) => vec![(1, X)],
            (1, Y) => vec![(0, Z), (1, Y)],
            (1, Z) => vec![(0, Z), (1, Z)],
            _ => unreachable!(),
        }
    };
    let mut out = PauliTerm::identity(2, ONE);
    for (q, p) in [(0, pc), (1, pt)] {
        if let Some(p) = p {
            out = out.multiply(&PauliTerm::new(2, ONE, image(q, p))?)?;
        }
    }
    Ok(out)
}

struct Twirler {
    out: Circuit,
    pending: Vec<Pending>,
}

impl Twirler {
    fn flush(&mut self, qubits: &[usize]) -> Result<()> {
        for &q in qubits {
            if let Some(g) = self.pending[q].gate(q) {
                self.out.push(g)?;
            }
            self.pending[q] = Pending::IDENTITY;
        }
        Ok(())
    }
}

/// One random twirl of `circuit`. Every ZZ rotation and CNOT is wrapped in a
/// uniformly drawn Pauli pair that leaves the ideal gate unchanged; runs of
/// single-qubit Paulis are merged with their exact phases.
pub fn twirl_once(circuit: &Circuit, rng: &mut Rng) -> Result<Circuit> {
    let n = circuit.n_qubits();
    let mut t = Twirler { out: Circuit::new(n), pending: vec![Pending::IDENTITY; n] };
    t.out.metadata = circuit.metadata.clone();
    for g in circuit.gates() {
        if let Some((q, p)) = existing_pauli(g) {
            t.pending[q].then(Some(p), ONE);
            continue;
        }
        match g {
            Gate::PauliRotation { term, angle } if g.is_zz_rotation() => {
                let qs = term.support();
                let (pa, pb) = (PAULIS[rng.random_range(0..4)], PAULIS[rng.random_range(0..4)]);
                let flips = |p: Option<Pauli>| matches!(p, Some(Pauli::X) | Some(Pauli::Y));
                let sign = if flips(pa) != flips(pb) { -1.0 } else { 1.0 };
                t.pending[qs[0]].then(pa, ONE);
                t.pending[qs[1]].then(pb, ONE);
                t.flush(&qs)?;
                t.out.push(Gate::PauliRotation { term: term.clone(), angle: sign * angle })?;
                t.pending[qs[0]].then(pa, ONE);
                t.pending[qs[1]].then(pb, ONE);
            }
            Gate::Cnot { control, target } => {
                let (pc, pt) = (PAULIS[rng.random_range(0..4)], PAULIS[rng.random_range(0..4)]);
                t.pending[*control].then(pc, ONE);
                t.pending[*target].then(pt, ONE);
                t.flush(&[*control, *target])?;
                t.out.push(g.clone())?;
                let after = conjugate_by_cnot(pc, pt)?;
                t.pending[*control].then(after.get(0), after.coefficient());
                t.pending[*target].then(after.get(1), ONE);
            }
            Gate::Barrier => {
                t.flush(&(0..n).collect::<Vec<_>>())?;
                t.out.push(Gate::Barrier)?;
            }
            g if g.is_unitary_op() && g.qubits().len() >= 2 => {
                return Err(Error::UnsupportedGate { gate: g.to_string(), context: "Pauli twirling" });
            }
            g => {
                t.flush(&g.qubits())?;
                t.out.push(g.clone())?;
            }
        }
    }
    t.flush(&(0..n).collect::<Vec<_>>())?;
    Ok(t.out)
}

/// `n_twirls` independent twirls; twirl `k` draws from `derived_rng(seed, [k])`.
pub fn twirl(circuit: &Circuit, seed: u64, n_twirls: usize) -> Result<Vec<Circuit>> {
    (0..n_twirls).map(|k| twirl_once(circuit, &mut derived_rng(seed, &[k as u64]))).collect()
}
