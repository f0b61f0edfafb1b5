//! Experiment files: TOML, or JSON with the same schema.
//!
//! ```toml
//! [model.gross_neveu]
//! L = 2
//! N = 2
//! G2 = 1.0
//!
//! [trotter]
//! dt = 0.2
//! n_steps = 5
//!
//! [observable.return_probability]
//! psi0 = "0010"
//!
//! [execution]
//! mode = "shots"
//! shots = 4000
//! seed = 7
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use trotterlab::compiler::{Basis, CouplingGraph, InitialLayout, TrotterPlan};
use trotterlab::models::{
    build_gross_neveu, build_hyperbolic_ising, GrossNeveuParams, HyperbolicIsingParams, QubitLayout, SpinConvention,
};
use trotterlab::noise::{MitigationConfig, NoiseModel};
use trotterlab::observables::{Backend, EstimationMode, ExcitedState, NoisyBackend, OtocConfig, SitePauli, TranspileConfig};
use trotterlab::PauliSum;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", try_from = "RawModel")]
pub enum ModelConfig {
    GrossNeveu(GrossNeveuParams),
    HyperbolicIsing(HyperbolicIsingParams),
}

/// Unvalidated form; conversion runs the model invariants so parse errors
/// point at the model table.
#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawModel {
    GrossNeveu(GrossNeveuParams),
    HyperbolicIsing(HyperbolicIsingParams),
}

impl TryFrom<RawModel> for ModelConfig {
    type Error = String;

    fn try_from(raw: RawModel) -> Result<Self, String> {
        let m = match raw {
            RawModel::GrossNeveu(p) => ModelConfig::GrossNeveu(p),
            RawModel::HyperbolicIsing(p) => ModelConfig::HyperbolicIsing(p),
        };
        m.validate().map_err(|e| e.to_string())?;
        Ok(m)
    }
}

impl ModelConfig {
    pub fn build(&self) -> trotterlab::Result<(PauliSum, QubitLayout)> {
        match self {
            ModelConfig::GrossNeveu(p) => build_gross_neveu(p),
            ModelConfig::HyperbolicIsing(p) => build_hyperbolic_ising(p),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            ModelConfig::GrossNeveu(p) => p.n_qubits(),
            ModelConfig::HyperbolicIsing(p) => p.sites,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::GrossNeveu(_) => "gross_neveu",
            ModelConfig::HyperbolicIsing(_) => "hyperbolic_ising",
        }
    }

    fn validate(&self) -> trotterlab::Result<()> {
        match self {
            ModelConfig::GrossNeveu(p) => p.validate(),
            ModelConfig::HyperbolicIsing(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawTrotter")]
pub struct TrotterSection {
    pub dt: f64,
    pub n_steps: usize,
    /// Explicit term order (indices into the Hamiltonian's term list).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_order: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrotter {
    dt: f64,
    n_steps: usize,
    #[serde(default)]
    term_order: Option<Vec<usize>>,
}

impl TryFrom<RawTrotter> for TrotterSection {
    type Error = String;

    fn try_from(r: RawTrotter) -> Result<Self, String> {
        if !(r.dt.is_finite() && r.dt > 0.0) {
            return Err(format!("dt must be positive and finite, got {}", r.dt));
        }
        Ok(Self { dt: r.dt, n_steps: r.n_steps, term_order: r.term_order })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtocSection {
    #[serde(rename = "W")]
    pub w: SitePauli,
    #[serde(rename = "V")]
    pub v: SitePauli,
    #[serde(default)]
    pub order: usize,
    pub base_state: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excited_states: Vec<ExcitedState>,
    #[serde(default = "default_n_unitaries")]
    pub n_unitaries: usize,
    #[serde(default = "default_floor")]
    pub denominator_floor: f64,
}

fn default_n_unitaries() -> usize {
    100
}

fn default_floor() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    ReturnProbability {
        psi0: String,
    },
    Magnetization {
        psi0: String,
        /// Defaults to the model's spin convention.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        convention: Option<SpinConvention>,
    },
    Otoc(OtocSection),
}

impl ObservableConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ObservableConfig::ReturnProbability { .. } => "return_probability",
            ObservableConfig::Magnetization { .. } => "magnetization",
            ObservableConfig::Otoc(_) => "otoc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    Noiseless,
    Noisy(NoiseModel),
    /// `all_to_all` or `line16`; fixes both noise and transpilation.
    Preset(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranspileSection {
    #[serde(default = "default_basis")]
    pub basis: String,
    /// `line:N`, `ring:N`, `complete:N` or an edge-list file; absent means
    /// all-to-all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    #[serde(default)]
    pub initial_layout: InitialLayout,
}

fn default_basis() -> String {
    "cnot_rz".into()
}

impl Default for TranspileSection {
    fn default() -> Self {
        Self { basis: default_basis(), topology: None, initial_layout: InitialLayout::Trivial }
    }
}

impl TranspileSection {
    pub fn resolve(&self) -> trotterlab::Result<TranspileConfig> {
        Ok(TranspileConfig {
            basis: Basis::from_str(&self.basis)?,
            topology: self.topology.as_deref().map(CouplingGraph::from_spec).transpose()?,
            initial_layout: self.initial_layout,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Exact,
    Shots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawExecution")]
pub struct ExecutionSection {
    pub mode: ModeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExecution {
    mode: ModeKind,
    #[serde(default)]
    shots: Option<u64>,
    seed: u64,
}

impl TryFrom<RawExecution> for ExecutionSection {
    type Error = String;

    fn try_from(r: RawExecution) -> Result<Self, String> {
        match (r.mode, r.shots) {
            (ModeKind::Shots, None) => Err("mode = \"shots\" requires shots".into()),
            (ModeKind::Shots, Some(0)) => Err("shots must be positive".into()),
            (ModeKind::Exact, Some(_)) => Err("shots is only meaningful with mode = \"shots\"".into()),
            _ => Ok(Self { mode: r.mode, shots: r.shots, seed: r.seed }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub prefix: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { prefix: "trotterlab_run".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub trotter: TrotterSection,
    pub observable: ObservableConfig,
    #[serde(default = "default_backend")]
    pub backend: BackendConfig,
    #[serde(default)]
    pub mitigation: MitigationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transpile: Option<TranspileSection>,
    pub execution: ExecutionSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_backend() -> BackendConfig {
    BackendConfig::Noiseless
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    /// Checks every cross-section invariant; messages name the section.
    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.model.n_qubits();
        self.model.validate().map_err(|e| invalid(format!("[model.{}]: {e}", self.model.name())))?;
        self.plan().map_err(|e| invalid(format!("[trotter]: {e}")))?;

        let check_state = |what: &str, s: &str| -> Result<(), CliError> {
            trotterlab::statevec::basis_index(s).map_err(|e| invalid(format!("[observable]: {what}: {e}")))?;
            if s.len() != n {
                return Err(invalid(format!("[observable]: {what} {s:?} has {} bits, the model has {n} qubits", s.len())));
            }
            Ok(())
        };
        match &self.observable {
            ObservableConfig::ReturnProbability { psi0 } | ObservableConfig::Magnetization { psi0, .. } => {
                check_state("psi0", psi0)?;
            }
            ObservableConfig::Otoc(_) => {
                self.otoc_config()
                    .expect("otoc observable")
                    .validate(Some(n))
                    .map_err(|e| invalid(format!("[observable.otoc]: {e}")))?;
            }
        }

        let e = &self.execution;
        if let (BackendConfig::Preset(_), Some(_)) = (&self.backend, &self.transpile) {
            return Err(invalid("[transpile]: a backend preset fixes the transpilation; remove [transpile]"));
        }
        let backend = self.backend()?;
        if let Backend::Noisy(nb) = &backend {
            if e.mode == ModeKind::Exact {
                return Err(invalid("[execution]: the noisy backend requires mode = \"shots\""));
            }
            nb.noise.validate(Some(n)).map_err(|e| invalid(format!("[backend]: {e}")))?;
            if let Some(g) = &nb.transpile.topology {
                if g.n_physical() < n {
                    return Err(invalid(format!(
                        "[transpile]: topology has {} qubits, the model needs {n}",
                        g.n_physical()
                    )));
                }
            }
        }
        self.mitigation.validate().map_err(|e| invalid(format!("[mitigation]: {e}")))?;
        if backend == Backend::Noiseless && self.mitigation != MitigationConfig::none() {
            return Err(invalid("[mitigation]: mitigation needs a noisy backend"));
        }
        if self.output.prefix.is_empty() {
            return Err(invalid("[output]: prefix must not be empty"));
        }
        Ok(())
    }

    pub fn plan(&self) -> trotterlab::Result<TrotterPlan> {
        let (h, layout) = self.model.build()?;
        let t = &self.trotter;
        match &t.term_order {
            Some(order) => TrotterPlan::with_order(h, t.dt, t.n_steps, order.clone()),
            None => TrotterPlan::with_layout(h, t.dt, t.n_steps, &layout),
        }
    }

    pub fn mode(&self) -> EstimationMode {
        match (self.execution.mode, self.execution.shots) {
            (ModeKind::Shots, Some(shots)) => EstimationMode::Shots { shots, seed: self.execution.seed },
            _ => EstimationMode::Exact,
        }
    }

    pub fn transpile_config(&self) -> Result<TranspileConfig, CliError> {
        if let BackendConfig::Preset(name) = &self.backend {
            return Ok(NoisyBackend::preset(name).map_err(|e| invalid(format!("[backend]: {e}")))?.transpile);
        }
        self.transpile
            .clone()
            .unwrap_or_default()
            .resolve()
            .map_err(|e| invalid(format!("[transpile]: {e}")))
    }

    pub fn backend(&self) -> Result<Backend, CliError> {
        Ok(match &self.backend {
            BackendConfig::Noiseless => Backend::Noiseless,
            BackendConfig::Noisy(noise) => Backend::Noisy(NoisyBackend {
                noise: noise.clone(),
                mitigation: self.mitigation.clone(),
                transpile: self.transpile_config()?,
            }),
            BackendConfig::Preset(name) => {
                let mut nb = NoisyBackend::preset(name).map_err(|e| invalid(format!("[backend]: {e}")))?;
                nb.mitigation = self.mitigation.clone();
                Backend::Noisy(nb)
            }
        })
    }

    pub fn otoc_config(&self) -> Option<OtocConfig> {
        let ObservableConfig::Otoc(o) = &self.observable else {
            return None;
        };
        Some(OtocConfig {
            w: o.w,
            v: o.v,
            order: o.order,
            base_state: o.base_state.clone(),
            excited_states: o.excited_states.clone(),
            n_unitaries: o.n_unitaries,
            shots: self.execution.shots,
            seed: self.execution.seed,
            denominator_floor: o.denominator_floor,
        })
    }

    /// Single-line canonical JSON, used in CSV headers.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Parses and validates; JSON is detected from a leading `{`.
pub fn parse_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| invalid(format!("JSON: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))?
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses and validates a config file; also returns the raw bytes
/// for hashing.
pub fn parse_config(path: &Path) -> Result<(ExperimentConfig, Vec<u8>), CliError> {
    let raw = std::fs::read(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&raw).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let cfg = parse_str(text).map_err(|e| match e {
        CliError::Config(m) => invalid(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok((cfg, raw))
}
