//! Tensored readout-error inversion.

use std::collections::BTreeMap;

use super::model::NoiseModel;
use crate::error::{Error, Result};
use crate::pauli::qubit_bit;
use crate::statevec::{basis_label, Counts};

/// Smallest `|1 - p01 - p10|` accepted as invertible.
pub const SINGULAR_TOLERANCE: f64 = 1e-9;

/// Column-stochastic single-qubit readout matrix
/// `[[1 - p01, p10], [p01, 1 - p10]]` (column = prepared, row = read).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionMatrix {
    pub p01: f64,
    pub p10: f64,
}

impl ConfusionMatrix {
    pub fn new(p01: f64, p10: f64) -> Result<Self> {
        for p in [p01, p10] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("readout flip probability {p} outside [0, 1]")));
            }
        }
        Ok(Self { p01, p10 })
    }

    pub fn identity() -> Self {
        Self { p01: 0.0, p10: 0.0 }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.p01, self.p10], [self.p01, 1.0 - self.p10]]
    }

    pub fn determinant(&self) -> f64 {
        1.0 - self.p01 - self.p10
    }

    fn inverse(&self, qubit: usize) -> Result<[[f64; 2]; 2]> {
        let det = self.determinant();
        if det.abs() <= SINGULAR_TOLERANCE {
            return Err(Error::SingularConfusion { qubit, det: det.abs() });
        }
        let m = self.matrix();
        Ok([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
    }
}

/// Per-qubit confusion matrices implied by a noise model.
pub fn confusion_from_noise(noise: &NoiseModel, n_qubits: usize) -> Result<Vec<ConfusionMatrix>> {
    (0..n_qubits).map(|q| ConfusionMatrix::new(noise.read_01(q), noise.read_10(q))).collect()
}

fn apply_per_qubit(p: &[f64], mats: &[[[f64; 2]; 2]]) -> Result<Vec<f64>> {
    let n = mats.len();
    if p.len() != 1 << n {
        return Err(Error::WidthMismatch { left: n, right: p.len().trailing_zeros() as usize });
    }
    let mut v = p.to_vec();
    for (q, m) in mats.iter().enumerate() {
        let bit = qubit_bit(n, q);
        for i in 0..v.len() {
            if i & bit == 0 {
                let (a, b) = (v[i], v[i | bit]);
                v[i] = m[0][0] * a + m[0][1] * b;
                v[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
    Ok(v)
}

/// `(C_0 ⊗ ... ⊗ C_{n-1}) p`: the distribution a perfect `p` is read as.
pub fn apply_confusion(p: &[f64], mats: &[ConfusionMatrix]) -> Result<Vec<f64>> {
    let ms: Vec<_> = mats.iter().map(|m| m.matrix()).collect();
    apply_per_qubit(p, &ms)
}

/// `(C_0^-1 ⊗ ... ⊗ C_{n-1}^-1) p`, one qubit at a time.
pub fn invert_confusion(p: &[f64], mats: &[ConfusionMatrix]) -> Result<Vec<f64>> {
    let inv: Vec<_> = mats.iter().enumerate().map(|(q, m)| m.inverse(q)).collect::<Result<_>>()?;
    apply_per_qubit(p, &inv)
}

/// Readout-corrected distribution over `2^width` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDistribution {
    width: usize,
    /// Direct inversion; entries may be negative, sums to one.
    pub raw: Vec<f64>,
    /// Negatives clipped to zero and renormalized.
    pub clipped: Vec<f64>,
}

impl QuasiDistribution {
    pub fn from_raw(raw: Vec<f64>) -> Result<Self> {
        if raw.len() < 2 || !raw.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!("distribution length {} is not 2^n", raw.len())));
        }
        let width = raw.len().trailing_zeros() as usize;
        let mut clipped: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("quasi-distribution has no positive mass".into()));
        }
        clipped.iter_mut().for_each(|x| *x /= total);
        Ok(Self { width, raw, clipped })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn raw_probability(&self, bits: &str) -> Result<f64> {
        Ok(self.raw[crate::statevec::basis_index(bits)?])
    }

    pub fn clipped_probability(&self, bits: &str) -> Result<f64> {
        Ok(self.clipped[crate::statevec::basis_index(bits)?])
    }

    /// `<Z_q>` from the raw quasi-probabilities.
    pub fn z_expectation(&self, q: usize) -> f64 {
        let bit = qubit_bit(self.width, q);
        self.raw.iter().enumerate().map(|(i, &p)| if i & bit == 0 { p } else { -p }).sum()
    }

    /// Nonzero raw entries keyed by basis label.
    pub fn raw_map(&self) -> BTreeMap<String, f64> {
        self.raw
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(i, &p)| (basis_label(i, self.width), p))
            .collect()
    }
}

/// Applies the tensored inverse confusion matrix to the empirical
/// distribution of `raw`.
pub fn readout_mitigate(raw: &Counts, mats: &[ConfusionMatrix]) -> Result<QuasiDistribution> {
    if raw.width() != mats.len() {
        return Err(Error::WidthMismatch { left: raw.width(), right: mats.len() });
    }
    if raw.shots() == 0 {
        return Err(Error::InvalidParameter("cannot mitigate an empty histogram".into()));
    }
    QuasiDistribution::from_raw(invert_confusion(&raw.to_distribution()?, mats)?)
}
