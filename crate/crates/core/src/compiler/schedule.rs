//! Greedy ASAP layer assignment.

use crate::circuit::{Circuit, Gate};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    /// Layer of each gate; `None` for barriers and measurements.
    pub layer_of_gate: Vec<Option<usize>>,
    pub depth: usize,
    /// `busy[q][layer]`.
    pub busy: Vec<Vec<bool>>,
}

/// Maximal run of idle layers `[start, start + len)` on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdleWindow {
    pub qubit: usize,
    pub start: usize,
    pub len: usize,
}

/// Each gate goes in the first layer after every qubit it touches is free.
/// A barrier aligns all qubits to the latest frontier.
pub fn schedule(circuit: &Circuit) -> Schedule {
    let n = circuit.n_qubits();
    let mut frontier = vec![0usize; n];
    let mut layer_of_gate = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        match g {
            Gate::Barrier => {
                let m = frontier.iter().copied().max().unwrap_or(0);
                frontier.iter_mut().for_each(|f| *f = m);
                layer_of_gate.push(None);
            }
            Gate::Measure(_) => layer_of_gate.push(None),
            g => {
                let qs = g.qubits();
                let layer = qs.iter().map(|&q| frontier[q]).max().unwrap_or(0);
                for &q in &qs {
                    frontier[q] = layer + 1;
                }
                layer_of_gate.push(Some(layer));
            }
        }
    }
    let depth = layer_of_gate.iter().flatten().map(|l| l + 1).max().unwrap_or(0);
    let mut busy = vec![vec![false; depth]; n];
    for (g, layer) in circuit.gates().iter().zip(&layer_of_gate) {
        if let Some(l) = layer {
            for q in g.qubits() {
                busy[q][*l] = true;
            }
        }
    }
    Schedule { layer_of_gate, depth, busy }
}

impl Schedule {
    /// Idle runs on each qubit after its first gate, up to the circuit depth.
    pub fn idle_windows(&self) -> Vec<IdleWindow> {
        let mut out = Vec::new();
        for (q, row) in self.busy.iter().enumerate() {
            let Some(first) = row.iter().position(|&b| b) else { continue };
            let mut start = None;
            for (l, &b) in row.iter().enumerate().skip(first) {
                match (b, start) {
                    (false, None) => start = Some(l),
                    (true, Some(s)) => {
                        out.push(IdleWindow { qubit: q, start: s, len: l - s });
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                out.push(IdleWindow { qubit: q, start: s, len: row.len() - s });
            }
        }
        out
    }
}
