//! Circuit execution shared by all observables: noiseless statevector
//! evolution, or transpile + noisy trajectories + mitigation.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::compiler::{
    decompose_to_basis, expand_swaps, route, schedule, trotterize, Basis, CouplingGraph, InitialLayout, RoutedCircuit,
    TrotterPlan,
};
use crate::error::{Error, Result};
use crate::noise::{
    confusion_from_noise, extrapolate_points, fold_global, insert_dd, readout_mitigate, run_noisy, twirl, DdScheme,
    FitKind, MitigationConfig, NoiseModel, ReadoutMitigation, ZnePoint,
};
use crate::pauli::qubit_bit;
use crate::rng::{derive_seed, derived_rng};
use crate::statevec::{Counts, StateVector};

/// How expectation values are read off the final state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EstimationMode {
    /// Inner products on the final state; no sampling.
    Exact,
    /// Projective measurement with `shots` repetitions.
    Shots { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TranspileConfig {
    pub basis: Basis,
    /// `None` means all-to-all connectivity.
    pub topology: Option<CouplingGraph>,
    pub initial_layout: InitialLayout,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoisyBackend {
    pub noise: NoiseModel,
    pub mitigation: MitigationConfig,
    pub transpile: TranspileConfig,
}

impl NoisyBackend {
    /// Illustrative device presets: `all_to_all` (p2 = 0.002, no routing) and
    /// `line16` (p2 = 0.01, 16-qubit line with SWAP routing). Both lower to
    /// CNOT + single-qubit gates.
    pub fn preset(name: &str) -> Result<Self> {
        let (p2, topology) = match name {
            "all_to_all" => (0.002, None),
            "line16" => (0.01, Some(CouplingGraph::line(16)?)),
            _ => return Err(Error::InvalidParameter(format!("unknown preset {name:?} (all_to_all | line16)"))),
        };
        Ok(Self {
            noise: NoiseModel::depolarizing(0.0, p2),
            mitigation: MitigationConfig::none(),
            transpile: TranspileConfig { basis: Basis::CnotRz, topology, initial_layout: InitialLayout::Trivial },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Backend {
    #[default]
    Noiseless,
    Noisy(NoisyBackend),
}

impl Backend {
    pub fn describe(&self) -> String {
        match self {
            Backend::Noiseless => "noiseless".into(),
            Backend::Noisy(nb) => format!(
                "noisy(p1={}, p2={}, idle={}, zz_over_rotation={}, topology={})",
                nb.noise.p1,
                nb.noise.p2,
                nb.noise.idle_dephase_rate,
                nb.noise.coherent_zz_over_rotation,
                nb.transpile.topology.as_ref().map_or("all_to_all".to_string(), |g| format!("{} qubits", g.n_physical()))
            ),
        }
    }
}

/// Gate statistics of one compilation stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub ops: usize,
    pub two_qubit: usize,
    pub cnot_equivalent: usize,
    pub swaps: usize,
    pub depth: usize,
}

impl GateCounts {
    pub fn of(c: &Circuit) -> Self {
        Self {
            ops: c.op_count(),
            two_qubit: c.two_qubit_count(),
            cnot_equivalent: c.cnot_cost(),
            swaps: c.swap_count(),
            depth: schedule(c).depth,
        }
    }
}

/// Every stage of the lowering pipeline for one virtual circuit.
#[derive(Debug, Clone)]
pub struct Transpiled {
    pub decomposed: Circuit,
    /// Routed and compacted to the physical qubits actually used.
    pub routed: RoutedCircuit,
    /// `routed` with SWAPs expanded into CNOTs; this is what runs.
    pub executable: Circuit,
}

/// Decompose, route (all-to-all when no topology), compact, expand SWAPs.
pub fn transpile(circuit: &Circuit, cfg: &TranspileConfig) -> Result<Transpiled> {
    let decomposed = decompose_to_basis(circuit, cfg.basis)?;
    let graph = match &cfg.topology {
        Some(g) => g.clone(),
        None => CouplingGraph::complete(circuit.n_qubits())?,
    };
    let routed = route(&decomposed, &graph, cfg.initial_layout)?.compacted()?;
    let executable = expand_swaps(&routed.circuit)?;
    Ok(Transpiled { decomposed, routed, executable })
}

/// Outcome distribution on the virtual register for one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Probabilities, or quasi-probabilities after readout inversion.
    pub probs: Vec<f64>,
    pub width: usize,
    /// `None` for exact probabilities.
    pub shots: Option<u64>,
    /// Per-qubit standard-error inflation from readout inversion.
    pub error_scale: Vec<f64>,
}

impl Sample {
    fn exact(probs: Vec<f64>, width: usize) -> Self {
        Self { probs, width, shots: None, error_scale: vec![1.0; width] }
    }

    /// Probability of basis index `idx` with its binomial standard error.
    pub fn probability(&self, idx: usize) -> (f64, f64) {
        let p = self.probs[idx];
        let se = match self.shots {
            None => 0.0,
            Some(s) => {
                let pc = p.clamp(0.0, 1.0);
                (pc * (1.0 - pc) / s as f64).sqrt() * self.error_scale.iter().product::<f64>()
            }
        };
        (p, se)
    }

    /// `<Z_q>` with standard error `sqrt((1 - z^2) / shots)`.
    pub fn z_expectation(&self, q: usize) -> (f64, f64) {
        let bit = qubit_bit(self.width, q);
        let z: f64 = self.probs.iter().enumerate().map(|(i, &p)| if i & bit == 0 { p } else { -p }).sum();
        let se = match self.shots {
            None => 0.0,
            Some(s) => ((1.0 - z.clamp(-1.0, 1.0).powi(2)) / s as f64).sqrt() * self.error_scale[q],
        };
        (z, se)
    }
}

/// Samples at one Trotter step, one per noise-scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeasurement {
    pub levels: Vec<(usize, Sample)>,
    pub fit: Option<FitKind>,
}

impl StepMeasurement {
    /// Applies `f` at every noise level and, with ZNE, extrapolates each
    /// returned quantity to zero noise.
    pub fn estimate(&self, f: impl Fn(&Sample) -> Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
        let per_level: Vec<Vec<(f64, f64)>> = self.levels.iter().map(|(_, s)| f(s)).collect();
        let Some(kind) = self.fit else {
            return Ok(per_level.into_iter().next().unwrap_or_default());
        };
        let m = per_level.first().map_or(0, |v| v.len());
        (0..m)
            .map(|i| {
                let points = self
                    .levels
                    .iter()
                    .zip(&per_level)
                    .map(|((lambda, _), vals)| ZnePoint { fold_factor: *lambda, value: vals[i].0, std_error: vals[i].1 })
                    .collect();
                let r = extrapolate_points(points, kind)?;
                Ok((r.mitigated, r.std_error))
            })
            .collect()
    }
}

/// Folds each physical outcome into the virtual register through the final
/// layout. Physical qubits holding no virtual qubit are summed out.
fn marginalize(probs: &[f64], n_physical: usize, layout_final: &[usize]) -> Vec<f64> {
    let n = layout_final.len();
    let mut out = vec![0.0; 1 << n];
    for (i, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut j = 0;
        for (v, &phys) in layout_final.iter().enumerate() {
            if i & qubit_bit(n_physical, phys) != 0 {
                j |= qubit_bit(n, v);
            }
        }
        out[j] += p;
    }
    out
}

/// Tag separating twirl generation from trajectory seeds.
const TWIRL_TAG: u64 = 1 << 40;

/// Runs `virtual_circuit` from `input` on the noisy backend and returns one
/// sample per fold factor (just factor 1 without ZNE).
pub fn measure_noisy(nb: &NoisyBackend, virtual_circuit: &Circuit, input: &str, shots: u64, seed: u64) -> Result<StepMeasurement> {
    let n = virtual_circuit.n_qubits();
    if input.len() != n {
        return Err(Error::WidthMismatch { left: n, right: input.len() });
    }
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    nb.noise.validate(Some(n))?;
    nb.mitigation.validate()?;
    let t = transpile(virtual_circuit, &nb.transpile)?;
    let k = t.executable.n_qubits();
    let layout = &t.routed.layout_final;

    // Readout parameters follow the virtual qubit measured on each wire.
    let mut noise = nb.noise.clone();
    noise.p_read_01 = vec![0.0; k];
    noise.p_read_10 = vec![0.0; k];
    for (v, &p) in layout.iter().enumerate() {
        noise.p_read_01[p] = nb.noise.read_01(v);
        noise.p_read_10[p] = nb.noise.read_10(v);
    }
    let state0 = StateVector::init_basis_capped(&t.routed.physical_input(input), 30)?;

    let factors = nb.mitigation.zne.as_ref().map_or(vec![1], |z| z.fold_factors.clone());
    let mut levels = Vec::with_capacity(factors.len());
    for &lambda in &factors {
        let folded = fold_global(&t.executable, lambda)?;
        let mut circuits = match nb.mitigation.twirling {
            Some(tw) => twirl(&folded, derive_seed(seed, &[lambda as u64, TWIRL_TAG]), tw.n_twirls)?,
            None => vec![folded],
        };
        if nb.mitigation.dd == DdScheme::XxPairs {
            circuits = circuits.iter().map(insert_dd).collect::<Result<_>>()?;
        }
        let m = circuits.len() as u64;
        let mut counts = Counts::new(k);
        for (i, c) in circuits.iter().enumerate() {
            let share = shots / m + u64::from((i as u64) < shots % m);
            if share > 0 {
                counts.merge(&run_noisy(c, &state0, &noise, share, derive_seed(seed, &[lambda as u64, i as u64]))?);
            }
        }
        let (phys, error_scale) = match nb.mitigation.readout {
            ReadoutMitigation::None => (counts.to_distribution()?, vec![1.0; n]),
            ReadoutMitigation::TensoredInversion => {
                let mats = confusion_from_noise(&noise, k)?;
                let q = readout_mitigate(&counts, &mats)?;
                let scale = layout.iter().map(|&p| 1.0 / mats[p].determinant().abs()).collect();
                (q.raw, scale)
            }
        };
        let probs = marginalize(&phys, k, layout);
        levels.push((lambda, Sample { probs, width: n, shots: Some(shots), error_scale }));
    }
    Ok(StepMeasurement { levels, fit: nb.mitigation.zne.as_ref().map(|z| z.fit) })
}

/// Basis change that maps `p` onto Z for measurement.
pub fn measurement_basis(q: usize, p: crate::pauli::Pauli) -> Vec<Gate> {
    use crate::pauli::Pauli;
    match p {
        Pauli::Z => vec![],
        Pauli::X => vec![Gate::h(q)],
        Pauli::Y => vec![Gate::sdg(q), Gate::h(q)],
    }
}

/// Executes prep, `k` Trotter steps and post for every `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy)]
pub struct Executor<'a> {
    mode: EstimationMode,
    backend: &'a Backend,
}

impl<'a> Executor<'a> {
    pub fn new(mode: EstimationMode, backend: &'a Backend) -> Result<Self> {
        if let (Backend::Noisy(nb), mode) = (backend, mode) {
            if mode == EstimationMode::Exact {
                return Err(Error::InvalidParameter("the noisy backend requires shots mode".into()));
            }
            nb.mitigation.validate()?;
        }
        if let EstimationMode::Shots { shots: 0, .. } = mode {
            return Err(Error::InvalidParameter("shots must be positive".into()));
        }
        Ok(Self { mode, backend })
    }

    pub fn mode(&self) -> EstimationMode {
        self.mode
    }

    /// Step `k` draws from seeds derived from `(seed, tags..., k)`.
    pub fn measure_steps(
        &self,
        plan: &TrotterPlan,
        prep: &[Gate],
        input: &str,
        post: &[Gate],
        tags: &[u64],
    ) -> Result<Vec<StepMeasurement>> {
        let n = plan.n_qubits();
        if input.len() != n {
            return Err(Error::WidthMismatch { left: n, right: input.len() });
        }
        let mut prep_c = Circuit::new(n);
        prep_c.extend(prep.iter().cloned())?;
        let mut post_c = Circuit::new(n);
        post_c.extend(post.iter().cloned())?;
        let step_tags = |k: usize| {
            let mut t = tags.to_vec();
            t.push(k as u64);
            t
        };
        match self.backend {
            Backend::Noiseless => {
                let mut step = Circuit::new(n);
                step.extend(plan.step_gates()?)?;
                let mut state = StateVector::init_basis(input)?;
                state.run_circuit(&prep_c)?;
                let mut out = Vec::with_capacity(plan.n_steps() + 1);
                for k in 0..=plan.n_steps() {
                    if k > 0 {
                        state.run_circuit(&step)?;
                    }
                    let mut fin = state.clone();
                    fin.run_circuit(&post_c)?;
                    let sample = match self.mode {
                        EstimationMode::Exact => Sample::exact(fin.probabilities(), n),
                        EstimationMode::Shots { shots, seed } => {
                            let counts = fin.sample_with_rng(shots, &mut derived_rng(seed, &step_tags(k)));
                            Sample { probs: counts.to_distribution()?, width: n, shots: Some(shots), error_scale: vec![1.0; n] }
                        }
                    };
                    out.push(StepMeasurement { levels: vec![(1, sample)], fit: None });
                }
                Ok(out)
            }
            Backend::Noisy(nb) => {
                let EstimationMode::Shots { shots, seed } = self.mode else {
                    return Err(Error::InvalidParameter("the noisy backend requires shots mode".into()));
                };
                (0..=plan.n_steps())
                    .map(|k| {
                        let mut c = prep_c.clone();
                        c.append(&trotterize(&plan.with_steps(k))?)?;
                        c.append(&post_c)?;
                        measure_noisy(nb, &c, input, shots, derive_seed(seed, &step_tags(k)))
                    })
                    .collect()
            }
        }
    }
}
