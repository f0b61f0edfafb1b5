//! First-order Trotter compilation.
//!
//! Each term `c P` becomes `exp(-i c dt P)`, i.e. a Pauli rotation by
//! `2 c dt`. One step is the product over `term_order`; the circuit repeats
//! the step `n_steps` times. The identity offset only contributes a global
//! phase, recorded in the circuit metadata.

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::models::QubitLayout;
use crate::pauli::PauliSum;

#[derive(Debug, Clone, PartialEq)]
pub struct TrotterPlan {
    hamiltonian: PauliSum,
    dt: f64,
    n_steps: usize,
    term_order: Vec<usize>,
}

/// Term classes in default order: off-diagonal first, then 1-local Z, then
/// multi-qubit Z strings.
fn term_class(h: &PauliSum, i: usize) -> usize {
    let t = &h.terms()[i];
    if !t.is_diagonal() {
        0
    } else if t.weight() == 1 {
        1
    } else {
        2
    }
}

/// Off-diagonal (hopping) terms ascending by site then flavor, then single Z
/// terms, then ZZ terms. Without a layout, sites are raw qubit indices.
pub fn default_term_order(h: &PauliSum, layout: Option<&QubitLayout>) -> Vec<usize> {
    let key = |i: usize| {
        let t = &h.terms()[i];
        let q = t.support().first().copied().unwrap_or(0);
        let (flavor, site) = match layout {
            Some(l) if l.n_qubits() == h.n_qubits() => l.locate(q),
            _ => (0, q),
        };
        (term_class(h, i), site, flavor, t.support(), i)
    };
    let mut order: Vec<usize> = (0..h.len()).collect();
    order.sort_by_key(|&i| key(i));
    order
}

impl TrotterPlan {
    pub fn new(hamiltonian: PauliSum, dt: f64, n_steps: usize) -> Result<Self> {
        let order = default_term_order(&hamiltonian, None);
        Self::with_order(hamiltonian, dt, n_steps, order)
    }

    pub fn with_layout(hamiltonian: PauliSum, dt: f64, n_steps: usize, layout: &QubitLayout) -> Result<Self> {
        let order = default_term_order(&hamiltonian, Some(layout));
        Self::with_order(hamiltonian, dt, n_steps, order)
    }

    pub fn with_order(hamiltonian: PauliSum, dt: f64, n_steps: usize, term_order: Vec<usize>) -> Result<Self> {
        if n_steps > 0 && !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("Trotter step dt must be positive, got {dt}")));
        }
        let mut seen = vec![false; hamiltonian.len()];
        if term_order.len() != hamiltonian.len() {
            return Err(Error::InvalidParameter(format!(
                "term_order has {} entries for {} terms",
                term_order.len(),
                hamiltonian.len()
            )));
        }
        for &i in &term_order {
            if i >= seen.len() || seen[i] {
                return Err(Error::InvalidParameter(format!("term_order is not a permutation (entry {i})")));
            }
            seen[i] = true;
        }
        Ok(Self { hamiltonian, dt, n_steps, term_order })
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn term_order(&self) -> &[usize] {
        &self.term_order
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    /// Same plan with a different step count.
    pub fn with_steps(&self, n_steps: usize) -> Self {
        Self { n_steps, ..self.clone() }
    }

    /// Times `k * dt` for `k = 0..=n_steps`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| k as f64 * self.dt).collect()
    }

    /// Gates of a single Trotter step.
    pub fn step_gates(&self) -> Result<Vec<Gate>> {
        if !self.hamiltonian.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        Ok(self
            .term_order
            .iter()
            .map(|&i| {
                let t = &self.hamiltonian.terms()[i];
                Gate::pauli_rotation(t, 2.0 * t.coefficient().re * self.dt)
            })
            .collect())
    }
}

pub fn trotterize(plan: &TrotterPlan) -> Result<Circuit> {
    let step = plan.step_gates()?;
    let mut c = Circuit::new(plan.n_qubits());
    for _ in 0..plan.n_steps {
        c.extend(step.iter().cloned())?;
    }
    let order: Vec<String> = plan.term_order.iter().map(|i| i.to_string()).collect();
    c.metadata.insert("dt".into(), format!("{:?}", plan.dt));
    c.metadata.insert("n_steps".into(), plan.n_steps.to_string());
    c.metadata.insert("term_order".into(), order.join(","));
    let phase = -plan.hamiltonian.identity_offset().re * plan.dt * plan.n_steps as f64;
    c.metadata.insert("global_phase".into(), format!("{phase:?}"));
    Ok(c)
}
