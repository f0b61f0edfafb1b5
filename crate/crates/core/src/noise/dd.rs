//! X-X dynamical decoupling on idle windows.

use crate::circuit::{Circuit, Gate};
use crate::compiler::schedule;
use crate::error::Result;

/// Shortest idle window that receives a pulse pair.
pub const MIN_DD_WINDOW: usize = 2;

/// Inserts an X-X pair at the first two layers of every idle window of at
/// least two layers (windows start after a qubit's first gate). The pair
/// goes directly after the gate that opens the window, so ASAP layering of
/// all original gates is unchanged.
pub fn insert_dd(circuit: &Circuit) -> Result<Circuit> {
    let sched = schedule::schedule(circuit);
    let mut after_gate: Vec<Vec<usize>> = vec![Vec::new(); circuit.len()];
    for w in sched.idle_windows().into_iter().filter(|w| w.len >= MIN_DD_WINDOW) {
        let opener = circuit
            .gates()
            .iter()
            .zip(&sched.layer_of_gate)
            .rposition(|(g, l)| *l == Some(w.start - 1) && g.qubits().contains(&w.qubit))
            .expect("idle window follows a gate on its qubit");
        after_gate[opener].push(w.qubit);
    }
    let mut out = Circuit::new(circuit.n_qubits());
    out.metadata = circuit.metadata.clone();
    let mut pairs = 0usize;
    for (g, qs) in circuit.gates().iter().zip(&after_gate) {
        out.push(g.clone())?;
        for &q in qs {
            out.extend([Gate::x(q), Gate::x(q)])?;
            pairs += 1;
        }
    }
    out.metadata.insert("dd_pairs".into(), pairs.to_string());
    Ok(out)
}
