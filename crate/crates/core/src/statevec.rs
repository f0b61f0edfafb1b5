//! Dense statevector simulation.
//!
//! Amplitude index bit `n - 1 - q` belongs to qubit `q` (qubit 0 most
//! significant), so basis labels read left to right from qubit 0.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{qubit_bit, PauliSum, PauliTerm};
use crate::rng::{rng_from_seed, Rng};

pub const DEFAULT_WIDTH_CAP: usize = 16;

/// Imaginary residue tolerated in `<psi|O|psi>` for Hermitian `O`.
pub const EXPECTATION_IMAG_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    n_qubits: usize,
}

/// Validates a computational-basis label and returns its amplitude index.
pub fn basis_index(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() > usize::BITS as usize - 1 {
        return Err(Error::MalformedBitstring(bits.to_string()));
    }
    bits.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::MalformedBitstring(bits.to_string())),
    })
}

/// Basis label of amplitude index `index`, qubit 0 first.
pub fn basis_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits).map(|q| if index & qubit_bit(n_qubits, q) != 0 { '1' } else { '0' }).collect()
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::init_basis(&"0".repeat(n_qubits))
    }

    pub fn init_basis(bits: &str) -> Result<Self> {
        Self::init_basis_capped(bits, DEFAULT_WIDTH_CAP)
    }

    /// `|bits>` with the leftmost character on qubit 0.
    pub fn init_basis_capped(bits: &str, cap: usize) -> Result<Self> {
        let index = basis_index(bits)?;
        let n_qubits = bits.len();
        if n_qubits > cap {
            return Err(Error::WidthCapExceeded { n_qubits, cap });
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[index] = ONE;
        Ok(Self { amplitudes, n_qubits })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("amplitude count {len} is not a power of two >= 2")));
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits: self.n_qubits });
        }
        Ok(())
    }

    fn bit(&self, q: usize) -> usize {
        qubit_bit(self.n_qubits, q)
    }

    /// `exp(-i angle/2 P) = cos(angle/2) I - i sin(angle/2) P`, applied pairwise
    /// over amplitudes connected by `P`'s flip mask.
    pub fn apply_pauli_rotation(&mut self, term: &PauliTerm, angle: f64) -> Result<()> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch { left: self.n_qubits, right: term.n_qubits() });
        }
        let (flip, phase_mask, n_y) = term.masks();
        let (s, c) = (angle / 2.0).sin_cos();
        // P|k> = i^{n_y} (-1)^{|k & phase_mask|} |k ^ flip>
        let base = Complex64::i().powu(n_y as u32);
        let phase = |k: usize| if (k & phase_mask).count_ones() % 2 == 0 { base } else { -base };
        let minus_i_s = Complex64::new(0.0, -s);
        let amps = &mut self.amplitudes;
        if flip == 0 {
            for (k, a) in amps.iter_mut().enumerate() {
                *a *= c + minus_i_s * phase(k);
            }
            return Ok(());
        }
        for j in 0..amps.len() {
            let jp = j ^ flip;
            if jp < j {
                continue;
            }
            let a = amps[j];
            let b = amps[jp];
            amps[j] = a * c + minus_i_s * phase(jp) * b;
            amps[jp] = b * c + minus_i_s * phase(j) * a;
        }
        Ok(())
    }

    pub fn apply_matrix_1q(&mut self, q: usize, m: &nalgebra::Matrix2<Complex64>) -> Result<()> {
        self.check_qubit(q)?;
        let stride = self.bit(q);
        for i in 0..self.amplitudes.len() {
            if i & stride != 0 {
                continue;
            }
            let a = self.amplitudes[i];
            let b = self.amplitudes[i | stride];
            self.amplitudes[i] = m[(0, 0)] * a + m[(0, 1)] * b;
            self.amplitudes[i | stride] = m[(1, 0)] * a + m[(1, 1)] * b;
        }
        Ok(())
    }

    pub fn apply_matrix_2q(&mut self, qa: usize, qb: usize, m: &nalgebra::Matrix4<Complex64>) -> Result<()> {
        self.check_qubit(qa)?;
        self.check_qubit(qb)?;
        let (sa, sb) = (self.bit(qa), self.bit(qb));
        for i in 0..self.amplitudes.len() {
            if i & (sa | sb) != 0 {
                continue;
            }
            let idx = [i, i | sb, i | sa, i | sa | sb];
            let v = idx.map(|k| self.amplitudes[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amplitudes[k] = (0..4).map(|c| m[(r, c)] * v[c]).sum();
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        let (sc, st) = (self.bit(control), self.bit(target));
        for i in 0..self.amplitudes.len() {
            if i & sc != 0 && i & st == 0 {
                self.amplitudes.swap(i, i | st);
            }
        }
        Ok(())
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        let (sa, sb) = (self.bit(a), self.bit(b));
        for i in 0..self.amplitudes.len() {
            if i & sa != 0 && i & sb == 0 {
                self.amplitudes.swap(i, i ^ sa ^ sb);
            }
        }
        Ok(())
    }

    /// Applies one gate in place. Barrier and Measure are no-ops.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::PauliRotation { term, angle } => self.apply_pauli_rotation(term, *angle),
            Gate::Unitary1Q { qubit, matrix, .. } => self.apply_matrix_1q(*qubit, matrix),
            Gate::Unitary2Q { qubits, matrix } => self.apply_matrix_2q(qubits[0], qubits[1], matrix),
            Gate::Cnot { control, target } => self.apply_cnot(*control, *target),
            Gate::Swap(a, b) => self.apply_swap(*a, *b),
            Gate::Barrier | Gate::Measure(_) => Ok(()),
        }
    }

    pub fn run_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch { left: self.n_qubits, right: circuit.n_qubits() });
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// `<psi| P |psi>` for a single term, coefficient included.
    pub fn term_expectation(&self, term: &PauliTerm) -> Result<Complex64> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch { left: self.n_qubits, right: term.n_qubits() });
        }
        let (flip, phase_mask, n_y) = term.masks();
        let base = Complex64::i().powu(n_y as u32);
        let mut acc = ZERO;
        for (k, a) in self.amplitudes.iter().enumerate() {
            let ph = if (k & phase_mask).count_ones() % 2 == 0 { base } else { -base };
            acc += self.amplitudes[k ^ flip].conj() * ph * a;
        }
        Ok(acc * term.coefficient())
    }

    /// Exact `<psi|O|psi>` for Hermitian `O`.
    pub fn expectation(&self, obs: &PauliSum) -> Result<f64> {
        if !obs.is_hermitian() {
            return Err(Error::NonHermitian);
        }
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::WidthMismatch { left: self.n_qubits, right: obs.n_qubits() });
        }
        let mut acc = obs.identity_offset() * self.norm().powi(2);
        for t in obs.terms() {
            acc += self.term_expectation(t)?;
        }
        let scale = 1.0 + acc.re.abs();
        assert!(
            acc.im.abs() < EXPECTATION_IMAG_TOLERANCE * scale,
            "Hermitian expectation has imaginary part {:e}",
            acc.im
        );
        Ok(acc.re)
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::WidthMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn sample(&self, shots: u64, seed: u64) -> Counts {
        self.sample_with_rng(shots, &mut rng_from_seed(seed))
    }

    /// Multinomial draw of `shots` basis outcomes from `|amplitude|^2`.
    pub fn sample_with_rng(&self, shots: u64, rng: &mut Rng) -> Counts {
        let mut cdf = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let mut hits: BTreeMap<usize, u64> = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            let mut k = cdf.partition_point(|&c| c <= u);
            if k >= cdf.len() {
                // Rounding at the top of the cdf: last outcome with weight.
                k = self.amplitudes.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0);
            }
            *hits.entry(k).or_default() += 1;
        }
        let mut counts = Counts::new(self.n_qubits);
        for (k, n) in hits {
            counts.add(basis_label(k, self.n_qubits), n);
        }
        counts
    }

    /// Draws a single outcome index.
    pub fn sample_index(&self, rng: &mut Rng) -> usize {
        let u: f64 = rng.random::<f64>() * self.norm().powi(2);
        let mut acc = 0.0;
        for (k, a) in self.amplitudes.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                return k;
            }
        }
        self.amplitudes.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0)
    }
}

/// Measurement histogram keyed by basis label (qubit 0 first).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "BTreeMap<String, u64>", into = "BTreeMap<String, u64>")]
pub struct Counts {
    counts: BTreeMap<String, u64>,
    shots: u64,
    width: usize,
}

impl From<BTreeMap<String, u64>> for Counts {
    fn from(counts: BTreeMap<String, u64>) -> Self {
        let shots = counts.values().sum();
        let width = counts.keys().next().map_or(0, |k| k.len());
        Counts { counts, shots, width }
    }
}

impl From<Counts> for BTreeMap<String, u64> {
    fn from(c: Counts) -> Self {
        c.counts
    }
}

impl Counts {
    pub fn new(width: usize) -> Self {
        Counts { counts: BTreeMap::new(), shots: 0, width }
    }

    pub fn add(&mut self, bitstring: String, n: u64) {
        if n == 0 {
            return;
        }
        if self.width == 0 {
            self.width = bitstring.len();
        }
        *self.counts.entry(bitstring).or_default() += n;
        self.shots += n;
    }

    /// Associative merge.
    pub fn merge(&mut self, other: &Counts) {
        for (k, &n) in &other.counts {
            self.add(k.clone(), n);
        }
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    /// Register width (label length); 0 when empty and unset.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, bitstring: &str) -> u64 {
        self.counts.get(bitstring).copied().unwrap_or(0)
    }

    pub fn frequency(&self, bitstring: &str) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.get(bitstring) as f64 / self.shots as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &u64)> {
        self.counts.iter()
    }

    /// Estimate of `<Z_q>` from bit frequencies: `(n0 - n1) / shots`.
    pub fn z_expectation(&self, q: usize) -> f64 {
        let mut diff: i64 = 0;
        for (k, &n) in &self.counts {
            if k.as_bytes()[q] == b'0' {
                diff += n as i64;
            } else {
                diff -= n as i64;
            }
        }
        diff as f64 / self.shots as f64
    }

    /// Empirical distribution as a dense `2^width` probability vector.
    pub fn to_distribution(&self) -> Result<Vec<f64>> {
        let mut p = vec![0.0; 1usize << self.width];
        for (k, &n) in &self.counts {
            p[basis_index(k)?] = n as f64 / self.shots as f64;
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Counts> {
        Ok(serde_json::from_str(s)?)
    }
}
