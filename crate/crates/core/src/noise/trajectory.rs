//! Stochastic Pauli trajectories on the statevector.

use std::borrow::Cow;
use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;

use super::model::NoiseModel;
use crate::circuit::{Circuit, Gate};
use crate::compiler::schedule;
use crate::error::{Error, Result};
use crate::pauli::{qubit_bit, Pauli, PauliSum, PauliTerm};
use crate::rng::{derived_rng, Rng};
use crate::statevec::{basis_label, Counts, StateVector};

const PAULIS: [Option<Pauli>; 4] = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];

/// Uniform non-identity Pauli string on `qubits`.
fn random_pauli(qubits: &[usize], rng: &mut Rng) -> Vec<(usize, Pauli)> {
    let k = qubits.len() as u32;
    let mut r = rng.random_range(1..4usize.pow(k));
    let mut out = Vec::with_capacity(qubits.len());
    for &q in qubits {
        if let Some(p) = PAULIS[r % 4] {
            out.push((q, p));
        }
        r /= 4;
    }
    out
}

/// Error insertion: `paulis` applied after the first `position` gates.
#[derive(Debug, Clone)]
struct Event {
    position: usize,
    paulis: Vec<(usize, Pauli)>,
}

/// A circuit prepared for repeated noisy execution from one input state.
///
/// Coherent ZZ over-rotation is folded into the stored circuit, so the
/// error-free final state is shared by every trajectory that draws no
/// stochastic event.
#[derive(Debug, Clone)]
pub struct TrajectorySimulator {
    circuit: Circuit,
    noise: NoiseModel,
    state0: StateVector,
    /// Idle slot counts `(qubit, slots)` attached to each gate position.
    idle: Vec<Vec<(usize, usize)>>,
    ideal: StateVector,
}

impl TrajectorySimulator {
    pub fn new(circuit: &Circuit, state0: &StateVector, noise: &NoiseModel) -> Result<Self> {
        let n = circuit.n_qubits();
        if state0.n_qubits() != n {
            return Err(Error::WidthMismatch { left: n, right: state0.n_qubits() });
        }
        noise.validate(Some(n))?;
        let mut shifted = Circuit::new(n);
        shifted.metadata = circuit.metadata.clone();
        let rotated = over_rotate_zz(circuit, noise.coherent_zz_over_rotation)?;
        shifted.extend(rotated.gates().iter().filter(|g| g.is_unitary_op()).cloned())?;
        let idle = idle_plan(circuit, &shifted);
        let mut ideal = state0.clone();
        ideal.run_circuit(&shifted)?;
        Ok(Self { circuit: shifted, noise: noise.clone(), state0: state0.clone(), idle, ideal })
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    /// Final state when no stochastic error fires.
    pub fn error_free_state(&self) -> &StateVector {
        &self.ideal
    }

    fn sample_events(&self, rng: &mut Rng) -> Vec<Event> {
        let mut events = Vec::new();
        let idle_events = |position: usize, rng: &mut Rng, events: &mut Vec<Event>| {
            let r = self.noise.idle_dephase_rate;
            if r == 0.0 {
                return;
            }
            for &(q, slots) in &self.idle[position] {
                // Z errors cancel in pairs; only the parity of the count matters.
                let p_odd = 0.5 * (1.0 - (1.0 - 2.0 * r).powi(slots as i32));
                if rng.random::<f64>() < p_odd {
                    events.push(Event { position, paulis: vec![(q, Pauli::Z)] });
                }
            }
        };
        idle_events(0, rng, &mut events);
        for (i, g) in self.circuit.gates().iter().enumerate() {
            let qs = g.qubits();
            let p = if qs.len() == 1 { self.noise.p1 } else { self.noise.p2 };
            if p > 0.0 && rng.random::<f64>() < p {
                events.push(Event { position: i + 1, paulis: random_pauli(&qs, rng) });
            }
            idle_events(i + 1, rng, &mut events);
        }
        events
    }

    fn apply_paulis(state: &mut StateVector, paulis: &[(usize, Pauli)]) -> Result<()> {
        if paulis.is_empty() {
            return Ok(());
        }
        // exp(-i pi/2 P) = -i P; the global phase is irrelevant here.
        let term = PauliTerm::new(state.n_qubits(), Complex64::new(1.0, 0.0), paulis.iter().copied())?;
        state.apply_pauli_rotation(&term, std::f64::consts::PI)
    }

    /// Final state of one trajectory.
    pub fn run(&self, rng: &mut Rng) -> Result<Cow<'_, StateVector>> {
        let events = self.sample_events(rng);
        if events.is_empty() {
            return Ok(Cow::Borrowed(&self.ideal));
        }
        let mut state = self.state0.clone();
        let mut next = events.iter().peekable();
        let mut flush = |state: &mut StateVector, pos: usize| -> Result<()> {
            while let Some(e) = next.next_if(|e| e.position == pos) {
                Self::apply_paulis(state, &e.paulis)?;
            }
            Ok(())
        };
        flush(&mut state, 0)?;
        for (i, g) in self.circuit.gates().iter().enumerate() {
            state.apply_gate(g)?;
            flush(&mut state, i + 1)?;
        }
        Ok(Cow::Owned(state))
    }

    /// Outcome index of one measured shot, readout flips included.
    pub fn shot(&self, rng: &mut Rng) -> Result<usize> {
        let state = self.run(rng)?;
        let mut idx = state.sample_index(rng);
        let n = self.n_qubits();
        if self.noise.has_readout_error() {
            for q in 0..n {
                let bit = qubit_bit(n, q);
                let p = if idx & bit == 0 { self.noise.read_01(q) } else { self.noise.read_10(q) };
                if p > 0.0 && rng.random::<f64>() < p {
                    idx ^= bit;
                }
            }
        }
        Ok(idx)
    }

    /// Sample mean and standard error of `f(final state)` over trajectories.
    /// Trajectory `k` draws from `derived_rng(seed, [k])`.
    pub fn mean_of<F>(&self, trajectories: u64, seed: u64, f: F) -> Result<(f64, f64)>
    where
        F: Fn(&StateVector) -> Result<f64> + Sync,
    {
        if trajectories == 0 {
            return Err(Error::InvalidParameter("need at least one trajectory".into()));
        }
        let ideal_value = f(&self.ideal)?;
        let values: Vec<f64> = (0..trajectories)
            .into_par_iter()
            .map(|k| {
                let mut rng = derived_rng(seed, &[k]);
                match self.run(&mut rng)? {
                    Cow::Borrowed(_) => Ok(ideal_value),
                    Cow::Owned(s) => f(&s),
                }
            })
            .collect::<Result<_>>()?;
        Ok(mean_and_error(&values))
    }
}

/// Adds `epsilon` to the angle of every ZZ rotation.
pub fn over_rotate_zz(circuit: &Circuit, epsilon: f64) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.n_qubits());
    out.metadata = circuit.metadata.clone();
    for g in circuit.gates() {
        match g {
            Gate::PauliRotation { term, angle } if g.is_zz_rotation() => {
                out.push(Gate::PauliRotation { term: term.clone(), angle: angle + epsilon })?
            }
            g => out.push(g.clone())?,
        }
    }
    Ok(out)
}

pub(crate) fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Idle slots per qubit, attached to the position after the qubit's
/// preceding gate (position 0 for slots before its first gate).
fn idle_plan(original: &Circuit, shifted: &Circuit) -> Vec<Vec<(usize, usize)>> {
    // Barriers shape the schedule but are dropped from the executed circuit;
    // map each executed gate back to its scheduled layer.
    let sched = schedule::schedule(original);
    let layers: Vec<usize> = original
        .gates()
        .iter()
        .zip(&sched.layer_of_gate)
        .filter(|(g, _)| g.is_unitary_op())
        .map(|(_, l)| l.expect("unitary gates are scheduled"))
        .collect();
    debug_assert_eq!(layers.len(), shifted.len());
    let n = shifted.n_qubits();
    let mut plan = vec![Vec::new(); shifted.len() + 1];
    let mut last: Vec<Option<(usize, usize)>> = vec![None; n];
    for (i, g) in shifted.gates().iter().enumerate() {
        let layer = layers[i];
        for q in g.qubits() {
            let (pos, free_from) = match last[q] {
                None => (0, 0),
                Some((j, l)) => (j + 1, l + 1),
            };
            if layer > free_from {
                plan[pos].push((q, layer - free_from));
            }
            last[q] = Some((i, layer));
        }
    }
    for q in 0..n {
        let (pos, free_from) = match last[q] {
            None => (0, 0),
            Some((j, l)) => (j + 1, l + 1),
        };
        if sched.depth > free_from {
            plan[pos].push((q, sched.depth - free_from));
        }
    }
    plan
}

/// Samples `shots` noisy executions of `circuit` from `state0`. Shot `k` uses
/// its own stream derived from `seed`, so counts do not depend on threading.
pub fn run_noisy(circuit: &Circuit, state0: &StateVector, noise: &NoiseModel, shots: u64, seed: u64) -> Result<Counts> {
    let sim = TrajectorySimulator::new(circuit, state0, noise)?;
    let n = sim.n_qubits();
    let outcomes: Vec<usize> = (0..shots)
        .into_par_iter()
        .map(|k| sim.shot(&mut derived_rng(seed, &[k])))
        .collect::<Result<_>>()?;
    let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
    for idx in outcomes {
        *hist.entry(idx).or_default() += 1;
    }
    let mut counts = Counts::new(n);
    for (idx, c) in hist {
        counts.add(basis_label(idx, n), c);
    }
    Ok(counts)
}

/// Trajectory-averaged exact expectation of `observable` (no readout noise,
/// no shot noise). Returns `(mean, standard error)`.
pub fn noisy_expectation(
    circuit: &Circuit,
    state0: &StateVector,
    noise: &NoiseModel,
    observable: &PauliSum,
    trajectories: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let sim = TrajectorySimulator::new(circuit, state0, noise)?;
    sim.mean_of(trajectories, seed, |s| s.expectation(observable))
}

/// Mean `1 - |<target|psi>|^2` over trajectories.
pub fn mean_infidelity(
    circuit: &Circuit,
    state0: &StateVector,
    noise: &NoiseModel,
    target: &StateVector,
    trajectories: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let sim = TrajectorySimulator::new(circuit, state0, noise)?;
    sim.mean_of(trajectories, seed, |s| Ok(1.0 - target.overlap(s)?.norm_sqr()))
}
