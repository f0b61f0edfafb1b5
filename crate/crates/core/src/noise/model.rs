use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stochastic Pauli + readout noise parameters.
///
/// Readout arrays are per qubit; a single entry applies to every qubit and
/// an empty array means perfect readout.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Depolarizing probability after each single-qubit gate.
    #[serde(default)]
    pub p1: f64,
    /// Depolarizing probability after each multi-qubit gate.
    #[serde(default)]
    pub p2: f64,
    /// `P(read 1 | prepared 0)`.
    #[serde(default)]
    pub p_read_01: Vec<f64>,
    /// `P(read 0 | prepared 1)`.
    #[serde(default)]
    pub p_read_10: Vec<f64>,
    /// Probability of a Z error per idle layer slot.
    #[serde(default)]
    pub idle_dephase_rate: f64,
    /// Radians added to every ZZ rotation angle.
    #[serde(default)]
    pub coherent_zz_over_rotation: f64,
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name} = {p} is not a probability in [0, 1]")));
    }
    Ok(())
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn depolarizing(p1: f64, p2: f64) -> Self {
        Self { p1, p2, ..Self::default() }
    }

    pub fn with_readout(mut self, p01: f64, p10: f64) -> Self {
        self.p_read_01 = vec![p01];
        self.p_read_10 = vec![p10];
        self
    }

    /// Range checks, plus readout array lengths against `n_qubits` when given.
    pub fn validate(&self, n_qubits: Option<usize>) -> Result<()> {
        check_probability("p1", self.p1)?;
        check_probability("p2", self.p2)?;
        check_probability("idle_dephase_rate", self.idle_dephase_rate)?;
        for (name, v) in [("p_read_01", &self.p_read_01), ("p_read_10", &self.p_read_10)] {
            for &p in v {
                check_probability(name, p)?;
            }
            if let Some(n) = n_qubits {
                if v.len() > 1 && v.len() != n {
                    return Err(Error::InvalidParameter(format!(
                        "{name} has {} entries for a {n}-qubit register (use 0, 1 or {n})",
                        v.len()
                    )));
                }
            }
        }
        if !self.coherent_zz_over_rotation.is_finite() {
            return Err(Error::InvalidParameter("coherent_zz_over_rotation must be finite".into()));
        }
        Ok(())
    }

    fn per_qubit(v: &[f64], q: usize) -> f64 {
        match v.len() {
            0 => 0.0,
            1 => v[0],
            _ => v[q],
        }
    }

    pub fn read_01(&self, q: usize) -> f64 {
        Self::per_qubit(&self.p_read_01, q)
    }

    pub fn read_10(&self, q: usize) -> f64 {
        Self::per_qubit(&self.p_read_10, q)
    }

    pub fn has_readout_error(&self) -> bool {
        self.p_read_01.iter().chain(&self.p_read_10).any(|&p| p > 0.0)
    }

    /// True when no gate, idle or coherent error can occur (readout aside).
    pub fn is_gate_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.idle_dephase_rate == 0.0 && self.coherent_zz_over_rotation == 0.0
    }

    pub fn is_noiseless(&self) -> bool {
        self.is_gate_noiseless() && !self.has_readout_error()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutMitigation {
    #[default]
    None,
    TensoredInversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    #[default]
    Linear,
    Quadratic,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZneConfig {
    pub fold_factors: Vec<usize>,
    #[serde(default)]
    pub fit: FitKind,
}

impl ZneConfig {
    pub fn new(fold_factors: Vec<usize>, fit: FitKind) -> Self {
        Self { fold_factors, fit }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fold_factors.iter().any(|&l| l == 0 || l % 2 == 0) {
            return Err(Error::InvalidParameter(format!(
                "fold factors must be odd and >= 1, got {:?}",
                self.fold_factors
            )));
        }
        if !self.fold_factors.contains(&1) {
            return Err(Error::InvalidParameter("fold factors must include 1".into()));
        }
        let needed = match self.fit {
            FitKind::Linear | FitKind::Exponential => 2,
            FitKind::Quadratic => 3,
        };
        let mut distinct = self.fold_factors.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < needed {
            return Err(Error::InvalidParameter(format!(
                "{:?} fit needs {needed} distinct fold factors, got {:?}",
                self.fit, self.fold_factors
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwirlingConfig {
    pub n_twirls: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DdScheme {
    #[default]
    Off,
    XxPairs,
}

/// Which mitigation passes to apply around a noisy execution.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationConfig {
    #[serde(default)]
    pub readout: ReadoutMitigation,
    #[serde(default)]
    pub zne: Option<ZneConfig>,
    #[serde(default)]
    pub twirling: Option<TwirlingConfig>,
    #[serde(default)]
    pub dd: DdScheme,
}

impl MitigationConfig {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(z) = &self.zne {
            z.validate()?;
        }
        if let Some(t) = &self.twirling {
            if t.n_twirls == 0 {
                return Err(Error::InvalidParameter("twirling needs n_twirls >= 1".into()));
            }
        }
        Ok(())
    }
}
