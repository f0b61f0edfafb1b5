//! Modified OTOCs from products of expectation values over random local
//! unitaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Gate;
use crate::compiler::TrotterPlan;
use crate::error::{Error, Result};
use crate::pauli::Pauli;
use crate::rng::derive_seed;
use crate::statevec::basis_index;

use super::backend::{measurement_basis, Backend, EstimationMode, Executor, StepMeasurement};
use super::cue::sample_cue_local;
use super::series::TimeSeries;

/// Tag for the unitary draws; keeps them apart from measurement seeds.
const OTOC_TAG: u64 = 0x07_0C;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SitePauli {
    /// Qubit index.
    pub site: usize,
    pub pauli: Pauli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitedState {
    pub state: String,
    pub coefficient: f64,
}

fn default_n_unitaries() -> usize {
    100
}

fn default_floor() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtocConfig {
    #[serde(rename = "W")]
    pub w: SitePauli,
    #[serde(rename = "V")]
    pub v: SitePauli,
    #[serde(default)]
    pub order: usize,
    pub base_state: String,
    /// `E_n` with coefficients; must be empty for order 0, where `{k0: 1}`
    /// is used.
    #[serde(default)]
    pub excited_states: Vec<ExcitedState>,
    #[serde(default = "default_n_unitaries")]
    pub n_unitaries: usize,
    /// Shots per expectation value; `None` evaluates them exactly.
    #[serde(default)]
    pub shots: Option<u64>,
    pub seed: u64,
    #[serde(default = "default_floor")]
    pub denominator_floor: f64,
}

impl OtocConfig {
    /// Order-0 configuration with the default number of unitaries.
    pub fn order_zero(w: SitePauli, v: SitePauli, base_state: &str, shots: Option<u64>, seed: u64) -> Self {
        Self {
            w,
            v,
            order: 0,
            base_state: base_state.to_string(),
            excited_states: Vec::new(),
            n_unitaries: default_n_unitaries(),
            shots,
            seed,
            denominator_floor: default_floor(),
        }
    }

    pub fn validate(&self, n_qubits: Option<usize>) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_unitaries < 2 {
            return bad(format!("n_unitaries must be at least 2, got {}", self.n_unitaries));
        }
        if self.shots == Some(0) {
            return bad("otoc shots must be positive".into());
        }
        if !(self.denominator_floor >= 0.0) {
            return bad("denominator_floor must be non-negative".into());
        }
        basis_index(&self.base_state)?;
        if self.order == 0 && !self.excited_states.is_empty() {
            return bad("order 0 uses {base_state: 1}; excited_states must be empty".into());
        }
        if self.order >= 1 && self.excited_states.is_empty() {
            return bad(format!("order {} requires explicit excited_states with coefficients", self.order));
        }
        for e in &self.excited_states {
            basis_index(&e.state)?;
            if e.state.len() != self.base_state.len() {
                return bad(format!("excited state {:?} has a different width from base_state", e.state));
            }
            if !e.coefficient.is_finite() {
                return bad("excited-state coefficients must be finite".into());
            }
        }
        if let Some(n) = n_qubits {
            if self.base_state.len() != n {
                return Err(Error::WidthMismatch { left: n, right: self.base_state.len() });
            }
            for sp in [self.w, self.v] {
                if sp.site >= n {
                    return Err(Error::QubitOutOfRange { index: sp.site, n_qubits: n });
                }
            }
        }
        Ok(())
    }

    fn terms(&self) -> Vec<(String, f64)> {
        if self.order == 0 {
            vec![(self.base_state.clone(), 1.0)]
        } else {
            self.excited_states.iter().map(|e| (e.state.clone(), e.coefficient)).collect()
        }
    }

    /// Master seed of all measurement draws.
    pub fn shot_seed(&self) -> u64 {
        derive_seed(self.seed, &[OTOC_TAG, u64::MAX])
    }

    fn mode(&self) -> EstimationMode {
        match self.shots {
            None => EstimationMode::Exact,
            Some(shots) => EstimationMode::Shots { shots, seed: self.shot_seed() },
        }
    }
}

/// Seed of the local unitaries for draw `j`.
pub fn unitary_seed(seed: u64, j: usize) -> u64 {
    derive_seed(seed, &[OTOC_TAG, j as u64])
}

/// Per-unitary products at every step: `(numerator, denominator)`.
fn unitary_products(cfg: &OtocConfig, plan: &TrotterPlan, ex: &Executor, j: usize) -> Result<Vec<(f64, f64)>> {
    let n = plan.n_qubits();
    let us = sample_cue_local(n, unitary_seed(cfg.seed, j));
    let prep: Vec<Gate> = us.iter().enumerate().map(|(q, u)| Gate::unitary_1q(q, *u)).collect::<Result<_>>()?;
    let mut prep_v = prep.clone();
    prep_v.push(Gate::pauli(cfg.v.site, cfg.v.pauli));
    let post = measurement_basis(cfg.w.site, cfg.w.pauli);
    let w_of = |ms: Vec<StepMeasurement>| -> Result<Vec<f64>> {
        ms.iter().map(|m| Ok(m.estimate(|s| vec![s.z_expectation(cfg.w.site)])?[0].0)).collect()
    };
    let jt = j as u64;
    let b = w_of(ex.measure_steps(plan, &prep_v, &cfg.base_state, &post, &[jt, 0])?)?;
    let terms = cfg.terms();
    let a: Vec<Vec<f64>> = terms
        .iter()
        .enumerate()
        .map(|(s, (state, _))| w_of(ex.measure_steps(plan, &prep, state, &post, &[jt, 2 + s as u64])?))
        .collect::<Result<_>>()?;
    // <W>_{u,k0}: exact mode reuses the identical value; shots mode draws an
    // independent estimate so the product is unbiased.
    let reuse = ex.mode() == EstimationMode::Exact;
    let d = match terms.iter().position(|(s, _)| *s == cfg.base_state) {
        Some(s) if reuse => a[s].clone(),
        _ => w_of(ex.measure_steps(plan, &prep, &cfg.base_state, &post, &[jt, 1])?)?,
    };
    Ok((0..b.len())
        .map(|k| {
            let (mut num, mut den) = (0.0, 0.0);
            for ((_, c), ak) in terms.iter().zip(&a) {
                num += c * ak[k] * b[k];
                den += c * ak[k] * d[k];
            }
            (num, den)
        })
        .collect())
}

/// `O_n(t) = sum_s c_s avg_u(<W(t)>_{u,k_s} <V W(t) V>_{u,k0}) /
/// sum_s c_s avg_u(<W(t)>_{u,k_s} <W(t)>_{u,k0})` at every Trotter step,
/// with jackknife errors over unitaries. Steps whose denominator falls below
/// the floor are omitted and listed under `omitted_times`.
pub fn modified_otoc(cfg: &OtocConfig, plan: &TrotterPlan, backend: &Backend) -> Result<TimeSeries> {
    cfg.validate(Some(plan.n_qubits()))?;
    let ex = Executor::new(cfg.mode(), backend)?;
    let per_u: Vec<Vec<(f64, f64)>> =
        (0..cfg.n_unitaries).into_par_iter().map(|j| unitary_products(cfg, plan, &ex, j)).collect::<Result<_>>()?;
    let nu = cfg.n_unitaries as f64;
    let (mut times, mut values, mut errors, mut omitted) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, t) in plan.times().into_iter().enumerate() {
        let sn: f64 = per_u.iter().map(|v| v[k].0).sum();
        let sd: f64 = per_u.iter().map(|v| v[k].1).sum();
        if (sd / nu).abs() < cfg.denominator_floor {
            omitted.push(t);
            continue;
        }
        let o = sn / sd;
        let loo: Vec<f64> = per_u.iter().map(|v| (sn - v[k].0) / (sd - v[k].1)).collect();
        let mean = loo.iter().sum::<f64>() / nu;
        let var = (nu - 1.0) / nu * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        times.push(t);
        values.push(o);
        errors.push(var.sqrt());
    }
    let omitted_s = omitted.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
    Ok(TimeSeries::new(times, values, errors)?
        .with_meta("observable", "otoc")
        .with_meta("W", format!("{:?}{}", cfg.w.pauli, cfg.w.site))
        .with_meta("V", format!("{:?}{}", cfg.v.pauli, cfg.v.site))
        .with_meta("order", cfg.order)
        .with_meta("base_state", &cfg.base_state)
        .with_meta("n_unitaries", cfg.n_unitaries)
        .with_meta("shots", cfg.shots.map_or("exact".to_string(), |s| s.to_string()))
        .with_meta("seed", cfg.seed)
        .with_meta("backend", backend.describe())
        .with_meta("omitted_times", if omitted_s.is_empty() { "none".into() } else { omitted_s }))
}
