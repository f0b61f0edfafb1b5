use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use trotterlab::compiler::trotterize;
use trotterlab::models::SpinConvention;
use trotterlab::observables::{
    magnetization_series, modified_otoc, return_probability, transpile, unitary_seed, GateCounts, TimeSeries,
};
use trotterlab::rng::derive_seed;

use crate::config::{ExperimentConfig, ModelConfig, ObservableConfig};
use crate::error::{CliError, StageExt};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageCounts {
    pub trotter: GateCounts,
    pub decomposed: GateCounts,
    pub routed: GateCounts,
    pub executable: GateCounts,
    pub routed_swaps: usize,
    pub routed_entangling: usize,
    pub layout_initial: Vec<usize>,
    pub layout_final: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub version: String,
    pub duration_seconds: f64,
    pub model: String,
    pub observable: String,
    pub n_qubits: usize,
    /// Counts for the full `n_steps` circuit at every compilation stage.
    pub gate_counts: StageCounts,
    pub seed: u64,
    pub derived_seeds: BTreeMap<String, Vec<u64>>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// `(file suffix, series)`; suffix is appended to the output prefix.
    pub series: Vec<(String, TimeSeries)>,
    pub manifest: RunManifest,
}

pub fn config_hash(raw: &[u8]) -> String {
    hex::encode(Sha256::digest(raw))
}

pub fn stage_counts(cfg: &ExperimentConfig) -> Result<StageCounts, CliError> {
    let plan = cfg.plan().stage("trotterize")?;
    let circuit = trotterize(&plan).stage("trotterize")?;
    let t = transpile(&circuit, &cfg.transpile_config()?).stage("transpile")?;
    Ok(StageCounts {
        trotter: GateCounts::of(&circuit),
        decomposed: GateCounts::of(&t.decomposed),
        routed: GateCounts::of(&t.routed.circuit),
        executable: GateCounts::of(&t.executable),
        routed_swaps: t.routed.swap_count,
        routed_entangling: t.routed.entangling_count,
        layout_initial: t.routed.layout_initial.clone(),
        layout_final: t.routed.layout_final.clone(),
    })
}

fn derived_seeds(cfg: &ExperimentConfig) -> BTreeMap<String, Vec<u64>> {
    let seed = cfg.execution.seed;
    let mut out = BTreeMap::new();
    match cfg.otoc_config() {
        Some(o) => {
            out.insert("otoc_unitaries".into(), (0..o.n_unitaries).map(|j| unitary_seed(seed, j)).collect());
            if o.shots.is_some() {
                out.insert("otoc_shots".into(), vec![o.shot_seed()]);
            }
        }
        None => {
            if cfg.execution.shots.is_some() {
                out.insert("steps".into(), (0..=cfg.trotter.n_steps as u64).map(|k| derive_seed(seed, &[k])).collect());
            }
        }
    }
    out
}

/// Executes the experiment in memory; nothing is written.
pub fn run(cfg: &ExperimentConfig, raw_config: &[u8]) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let plan = cfg.plan().stage("model")?;
    let backend = cfg.backend()?;
    let mode = cfg.mode();
    let gate_counts = stage_counts(cfg)?;
    let stamp = |ts: TimeSeries| {
        ts.with_meta("config", cfg.canonical_json())
            .with_meta("model", cfg.model.name())
            .with_meta("dt", cfg.trotter.dt)
            .with_meta("n_steps", cfg.trotter.n_steps)
    };
    let series: Vec<(String, TimeSeries)> = match &cfg.observable {
        ObservableConfig::ReturnProbability { psi0 } => {
            vec![(String::new(), stamp(return_probability(&plan, psi0, mode, &backend).stage("return_probability")?))]
        }
        ObservableConfig::Magnetization { psi0, convention } => {
            let conv = convention.unwrap_or(match &cfg.model {
                ModelConfig::HyperbolicIsing(p) => p.spin_convention,
                ModelConfig::GrossNeveu(_) => SpinConvention::Half,
            });
            magnetization_series(&plan, psi0, mode, &backend, conv)
                .stage("magnetization")?
                .into_iter()
                .enumerate()
                .map(|(i, ts)| (format!("_site{i}"), stamp(ts)))
                .collect()
        }
        ObservableConfig::Otoc(_) => {
            let o = cfg.otoc_config().expect("otoc observable");
            vec![(String::new(), stamp(modified_otoc(&o, &plan, &backend).stage("otoc")?))]
        }
    };
    let outputs = series.iter().map(|(s, _)| format!("{}{s}.csv", cfg.output.prefix)).collect();
    let manifest = RunManifest {
        config_sha256: config_hash(raw_config),
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        model: cfg.model.name().into(),
        observable: cfg.observable.name().into(),
        n_qubits: plan.n_qubits(),
        gate_counts,
        seed: cfg.execution.seed,
        derived_seeds: derived_seeds(cfg),
        outputs,
    };
    Ok(RunOutput { series, manifest })
}

/// Writes every CSV and `<prefix>.manifest.json`; returns the paths.
pub fn write_outputs(out: &RunOutput, prefix: &str) -> Result<Vec<PathBuf>, CliError> {
    if let Some(dir) = Path::new(prefix).parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut written = Vec::new();
    for (suffix, ts) in &out.series {
        let p = PathBuf::from(format!("{prefix}{suffix}.csv"));
        std::fs::write(&p, ts.to_csv())?;
        written.push(p);
    }
    let mut manifest = out.manifest.clone();
    manifest.outputs = written.iter().map(|p| p.display().to_string()).collect();
    let p = PathBuf::from(format!("{prefix}.manifest.json"));
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Input(e.to_string()))?;
    std::fs::write(&p, json + "\n")?;
    written.push(p);
    Ok(written)
}
