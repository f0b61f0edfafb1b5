//! Qubitized lattice Hamiltonians.
//!
//! * N-flavor Gross-Neveu with staggered fermions, open boundaries, flavor
//!   `f` on site `n` stored on qubit `f * L + n`.
//! * Transverse-field Ising chain on a discretized hyperbolic line, with
//!   site weights `eta_i = cosh((i - (L-1)/2) / ell_c)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliSum, PauliTerm};

/// Which site parity gets the `+m` staggered mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaggerOrigin {
    /// `(-1)^n` on the 0-based site index.
    #[default]
    Even,
    /// `(-1)^(n+1)`, i.e. the 1-based convention.
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrossNeveuParams {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "N")]
    pub flavors: usize,
    #[serde(default)]
    pub m: f64,
    #[serde(rename = "G2", default)]
    pub g2: f64,
    #[serde(default)]
    pub stagger_origin: StaggerOrigin,
}

impl GrossNeveuParams {
    pub fn new(sites: usize, flavors: usize, m: f64, g2: f64) -> Self {
        Self { sites, flavors, m, g2, stagger_origin: StaggerOrigin::Even }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidParameter(format!("Gross-Neveu needs L >= 2 sites, got {}", self.sites)));
        }
        if self.flavors < 1 {
            return Err(Error::InvalidParameter("Gross-Neveu needs N >= 1 flavors".into()));
        }
        if !(self.g2 >= 0.0) || !self.g2.is_finite() {
            return Err(Error::InvalidParameter(format!("G2 must be finite and >= 0, got {}", self.g2)));
        }
        if !self.m.is_finite() {
            return Err(Error::InvalidParameter("mass must be finite".into()));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.sites * self.flavors
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinConvention {
    /// `S = sigma / 2`.
    #[default]
    Half,
    /// `S = sigma`.
    Pauli,
}

impl SpinConvention {
    pub fn scale(self) -> f64 {
        match self {
            SpinConvention::Half => 0.5,
            SpinConvention::Pauli => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicIsingParams {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
    #[serde(default)]
    pub m_z: f64,
    /// Curvature length; `f64::INFINITY` is the planar chain.
    pub ell_c: f64,
    #[serde(default)]
    pub spin_convention: SpinConvention,
}

impl HyperbolicIsingParams {
    pub fn new(sites: usize, j: f64, h: f64, m_z: f64, ell_c: f64) -> Self {
        Self { sites, j, h, m_z, ell_c, spin_convention: SpinConvention::Half }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "hyperbolic Ising chain needs an odd number of sites L, got {}",
                self.sites
            )));
        }
        if !(self.ell_c > 0.0) {
            return Err(Error::InvalidParameter(format!("ell_c must be positive or infinite, got {}", self.ell_c)));
        }
        for (name, v) in [("J", self.j), ("h", self.h), ("m_z", self.m_z)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// `(flavor, site) -> qubit = flavor * L + site`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub sites: usize,
    pub flavors: usize,
}

impl QubitLayout {
    pub fn new(sites: usize, flavors: usize) -> Self {
        Self { sites, flavors }
    }

    pub fn n_qubits(&self) -> usize {
        self.sites * self.flavors
    }

    pub fn qubit(&self, flavor: usize, site: usize) -> usize {
        debug_assert!(flavor < self.flavors && site < self.sites);
        flavor * self.sites + site
    }

    /// Inverse map `qubit -> (flavor, site)`.
    pub fn locate(&self, qubit: usize) -> (usize, usize) {
        (qubit / self.sites, qubit % self.sites)
    }

    /// JSON-friendly listing: `"f,n" -> qubit`.
    pub fn to_map(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for f in 0..self.flavors {
            for n in 0..self.sites {
                m.insert(format!("{f},{n}"), self.qubit(f, n));
            }
        }
        m
    }
}

fn real(n: usize, c: f64, paulis: &[(usize, Pauli)]) -> Result<PauliTerm> {
    PauliTerm::real(n, c, paulis.iter().copied())
}

/// Gross-Neveu Hamiltonian as a canonical Pauli sum.
///
/// Per flavor and adjacent pair `(n, n+1)`: `-X_n Y_{n+1} + Y_n X_{n+1}`.
/// Per flavor and site: `s_n m (1 - Z_n)` with `s_n = (-1)^n` (flipped by
/// [`StaggerOrigin::Odd`]). Per site and flavor pair `f < g`:
/// `(G2/2)(I - Z_f)(I - Z_g)`.
pub fn build_gross_neveu(p: &GrossNeveuParams) -> Result<(PauliSum, QubitLayout)> {
    p.validate()?;
    let layout = QubitLayout::new(p.sites, p.flavors);
    let nq = layout.n_qubits();
    let mut h = PauliSum::new(nq);
    // Hopping, ordered by site then flavor.
    for n in 0..p.sites - 1 {
        for f in 0..p.flavors {
            let (a, b) = (layout.qubit(f, n), layout.qubit(f, n + 1));
            h.push(real(nq, -1.0, &[(a, Pauli::X), (b, Pauli::Y)])?)?;
            h.push(real(nq, 1.0, &[(a, Pauli::Y), (b, Pauli::X)])?)?;
        }
    }
    if p.m != 0.0 {
        for n in 0..p.sites {
            let parity = match p.stagger_origin {
                StaggerOrigin::Even => n % 2,
                StaggerOrigin::Odd => (n + 1) % 2,
            };
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            for f in 0..p.flavors {
                h.add_identity(Complex64::new(sign * p.m, 0.0));
                h.push(real(nq, -sign * p.m, &[(layout.qubit(f, n), Pauli::Z)])?)?;
            }
        }
    }
    if p.g2 != 0.0 {
        let half = p.g2 / 2.0;
        for n in 0..p.sites {
            for f in 0..p.flavors {
                for g in f + 1..p.flavors {
                    let (a, b) = (layout.qubit(f, n), layout.qubit(g, n));
                    h.add_identity(Complex64::new(half, 0.0));
                    h.push(real(nq, -half, &[(a, Pauli::Z)])?)?;
                    h.push(real(nq, -half, &[(b, Pauli::Z)])?)?;
                    h.push(real(nq, half, &[(a, Pauli::Z), (b, Pauli::Z)])?)?;
                }
            }
        }
    }
    Ok((h.canonicalize(), layout))
}

/// `eta_i = cosh((i - (L-1)/2) / ell_c)`; all ones for infinite `ell_c`.
pub fn deformation_profile(sites: usize, ell_c: f64) -> Vec<f64> {
    let center = (sites as f64 - 1.0) / 2.0;
    (0..sites)
        .map(|i| {
            if ell_c.is_infinite() {
                1.0
            } else {
                ((i as f64 - center) / ell_c).cosh()
            }
        })
        .collect()
}

/// Deformed transverse Ising chain with open boundaries:
/// `H = -J sum_i (eta_i + eta_{i+1})/2 S^z_i S^z_{i+1} - h sum_i eta_i S^x_i - m_z sum_i eta_i S^z_i`.
pub fn build_hyperbolic_ising(p: &HyperbolicIsingParams) -> Result<(PauliSum, QubitLayout)> {
    p.validate()?;
    let n = p.sites;
    let eta = deformation_profile(n, p.ell_c);
    let s = p.spin_convention.scale();
    let mut h = PauliSum::new(n);
    for i in 0..n - 1 {
        let c = -p.j * (eta[i] + eta[i + 1]) / 2.0 * s * s;
        h.push(real(n, c, &[(i, Pauli::Z), (i + 1, Pauli::Z)])?)?;
    }
    for (i, e) in eta.iter().enumerate() {
        h.push(real(n, -p.h * e * s, &[(i, Pauli::X)])?)?;
    }
    if p.m_z != 0.0 {
        for (i, e) in eta.iter().enumerate() {
            h.push(real(n, -p.m_z * e * s, &[(i, Pauli::Z)])?)?;
        }
    }
    Ok((h.canonicalize(), QubitLayout::new(n, 1)))
}
