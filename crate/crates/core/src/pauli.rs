//! Sparse Pauli-string algebra.
//!
//! A [`PauliTerm`] is a complex coefficient times a tensor product of
//! single-qubit Paulis, stored sparsely (identity on every absent index).
//! A [`PauliSum`] is a list of terms plus an identity offset.
//!
//! Tensor ordering: qubit 0 is the most significant factor everywhere. In a
//! `2^n` amplitude index, qubit `q` owns bit `n - 1 - q`, so the basis label
//! `"0010"` on four qubits is index 2.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default magnitude below which canonicalization drops a coefficient.
pub const DEFAULT_PRUNE_TOLERANCE: f64 = 1e-12;

/// Default width cap for dense rendering.
pub const DEFAULT_DENSE_CAP: usize = 14;

/// Imaginary parts at or below this magnitude count as real.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// Single-qubit product `self * other` as `(phase, result)`; `None` is identity.
    pub fn mul(self, other: Pauli) -> (Complex64, Option<Pauli>) {
        use Pauli::*;
        match (self, other) {
            (a, b) if a == b => (ONE, None),
            (X, Y) => (I, Some(Z)),
            (Y, Z) => (I, Some(X)),
            (Z, X) => (I, Some(Y)),
            (Y, X) => (-I, Some(Z)),
            (Z, Y) => (-I, Some(X)),
            (X, Z) => (-I, Some(Y)),
            _ => unreachable!(),
        }
    }

    /// Row-major 2x2 matrix.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I], [I, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c {
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Amplitude-index bit owned by qubit `q` in an `n`-qubit register.
#[inline]
pub fn qubit_bit(n_qubits: usize, q: usize) -> usize {
    1usize << (n_qubits - 1 - q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    coefficient: Complex64,
    paulis: BTreeMap<usize, Pauli>,
    n_qubits: usize,
}

impl PauliTerm {
    /// Builds a term; rejects out-of-range and repeated qubit indices.
    pub fn new(
        n_qubits: usize,
        coefficient: Complex64,
        paulis: impl IntoIterator<Item = (usize, Pauli)>,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("register width must be positive".into()));
        }
        let mut map = BTreeMap::new();
        for (q, p) in paulis {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if map.insert(q, p).is_some() {
                return Err(Error::InvalidParameter(format!("qubit {q} listed twice in one Pauli string")));
            }
        }
        Ok(Self { coefficient, paulis: map, n_qubits })
    }

    pub fn real(n_qubits: usize, coefficient: f64, paulis: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        Self::new(n_qubits, Complex64::new(coefficient, 0.0), paulis)
    }

    pub fn identity(n_qubits: usize, coefficient: Complex64) -> Self {
        Self { coefficient, paulis: BTreeMap::new(), n_qubits }
    }

    /// Parses a label such as `"X0 Y1"` or `"Z3"`; `"I"` or `""` is identity.
    pub fn from_label(n_qubits: usize, coefficient: Complex64, label: &str) -> Result<Self> {
        let mut paulis = Vec::new();
        for tok in label.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let axis = chars
                .next()
                .and_then(Pauli::from_symbol)
                .ok_or_else(|| Error::InvalidParameter(format!("bad Pauli token {tok:?}")))?;
            let q: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad qubit index in {tok:?}")))?;
            paulis.push((q, axis));
        }
        Self::new(n_qubits, coefficient, paulis)
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn paulis(&self) -> &BTreeMap<usize, Pauli> {
        &self.paulis
    }

    pub fn get(&self, q: usize) -> Option<Pauli> {
        self.paulis.get(&q).copied()
    }

    pub fn support(&self) -> Vec<usize> {
        self.paulis.keys().copied().collect()
    }

    pub fn weight(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_identity(&self) -> bool {
        self.paulis.is_empty()
    }

    /// True when the string contains only Z factors.
    pub fn is_diagonal(&self) -> bool {
        self.paulis.values().all(|p| *p == Pauli::Z)
    }

    pub fn with_coefficient(&self, coefficient: Complex64) -> Self {
        Self { coefficient, ..self.clone() }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.with_coefficient(self.coefficient * factor)
    }

    /// Same Pauli string, ignoring coefficients.
    pub fn same_string(&self, other: &PauliTerm) -> bool {
        self.n_qubits == other.n_qubits && self.paulis == other.paulis
    }

    /// Bitmasks over amplitude indices: `flip` has a bit for every X or Y,
    /// `phase` for every Z or Y. Also returns the Y count.
    pub fn masks(&self) -> (usize, usize, usize) {
        let mut flip = 0;
        let mut phase = 0;
        let mut n_y = 0;
        for (&q, &p) in &self.paulis {
            let b = qubit_bit(self.n_qubits, q);
            match p {
                Pauli::X => flip |= b,
                Pauli::Z => phase |= b,
                Pauli::Y => {
                    flip |= b;
                    phase |= b;
                    n_y += 1;
                }
            }
        }
        (flip, phase, n_y)
    }

    fn check_width(&self, other: &PauliTerm) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::WidthMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        Ok(())
    }

    /// Operator product `self * other`, with the accumulated phase folded
    /// into the coefficient.
    pub fn multiply(&self, other: &PauliTerm) -> Result<PauliTerm> {
        self.check_width(other)?;
        let mut coefficient = self.coefficient * other.coefficient;
        let mut paulis = self.paulis.clone();
        for (&q, &b) in &other.paulis {
            match paulis.get(&q).copied() {
                None => {
                    paulis.insert(q, b);
                }
                Some(a) => {
                    let (phase, r) = a.mul(b);
                    coefficient *= phase;
                    match r {
                        Some(p) => {
                            paulis.insert(q, p);
                        }
                        None => {
                            paulis.remove(&q);
                        }
                    }
                }
            }
        }
        Ok(PauliTerm { coefficient, paulis, n_qubits: self.n_qubits })
    }

    /// Whether the two strings commute: even number of positions where both
    /// act with different axes.
    pub fn commutes(&self, other: &PauliTerm) -> Result<bool> {
        self.check_width(other)?;
        let clashes = self
            .paulis
            .iter()
            .filter(|(q, a)| other.paulis.get(q).is_some_and(|b| b != *a))
            .count();
        Ok(clashes % 2 == 0)
    }

    /// `P^dagger` for this term: conjugated coefficient, same string.
    pub fn adjoint(&self) -> PauliTerm {
        self.with_coefficient(self.coefficient.conj())
    }

    /// String part as a label, e.g. `"X0 Y1"`, or `"I"` for identity.
    pub fn label(&self) -> String {
        if self.paulis.is_empty() {
            return "I".to_string();
        }
        self.paulis
            .iter()
            .map(|(q, p)| format!("{}{}", p.symbol(), q))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Dense `2^n x 2^n` matrix of this single term.
    pub fn to_dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        let mut s = PauliSum::new(self.n_qubits);
        s.push(self.clone())?;
        s.to_dense_matrix()
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?},{:?} {}", self.coefficient.re, self.coefficient.im, self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    terms: Vec<PauliTerm>,
    n_qubits: usize,
    identity_offset: Complex64,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self { terms: Vec::new(), n_qubits, identity_offset: ZERO }
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        let mut s = Self::new(n_qubits);
        for t in terms {
            s.push(t)?;
        }
        Ok(s)
    }

    /// Appends a term verbatim (identity strings included); no merging.
    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        if term.n_qubits != self.n_qubits {
            return Err(Error::WidthMismatch { left: self.n_qubits, right: term.n_qubits });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn add_identity(&mut self, c: Complex64) {
        self.identity_offset += c;
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn identity_offset(&self) -> Complex64 {
        self.identity_offset
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_hermitian(&self) -> bool {
        self.identity_offset.im.abs() <= HERMITIAN_TOLERANCE
            && self.terms.iter().all(|t| t.coefficient.im.abs() <= HERMITIAN_TOLERANCE)
    }

    pub fn canonicalize(&self) -> PauliSum {
        self.canonicalize_with_tolerance(DEFAULT_PRUNE_TOLERANCE)
    }

    /// Merges duplicate strings (first occurrence fixes the position), moves
    /// identity strings into the offset, and drops terms with
    /// `|c| < tolerance`.
    pub fn canonicalize_with_tolerance(&self, tolerance: f64) -> PauliSum {
        let mut offset = self.identity_offset;
        let mut merged: Vec<PauliTerm> = Vec::new();
        let mut index: HashMap<&BTreeMap<usize, Pauli>, usize> = HashMap::new();
        for t in &self.terms {
            if t.is_identity() {
                offset += t.coefficient;
                continue;
            }
            match index.get(&t.paulis) {
                Some(&i) => merged[i].coefficient += t.coefficient,
                None => {
                    index.insert(&t.paulis, merged.len());
                    merged.push(t.clone());
                }
            }
        }
        merged.retain(|t| t.coefficient.norm() >= tolerance);
        if offset.norm() < tolerance {
            offset = ZERO;
        }
        PauliSum { terms: merged, n_qubits: self.n_qubits, identity_offset: offset }
    }

    pub fn to_dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_matrix_capped(DEFAULT_DENSE_CAP)
    }

    /// Kronecker expansion with qubit 0 as the leftmost factor. Each Pauli
    /// string has one nonzero per row, so entries are filled row by row as
    /// products of the per-qubit 2x2 factors.
    pub fn to_dense_matrix_capped(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        let n = self.n_qubits;
        if n > cap {
            return Err(Error::WidthCapExceeded { n_qubits: n, cap });
        }
        let dim = 1usize << n;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for r in 0..dim {
            m[(r, r)] += self.identity_offset;
        }
        for t in &self.terms {
            let factors: Vec<[[Complex64; 2]; 2]> = (0..n)
                .map(|q| match t.paulis.get(&q) {
                    Some(p) => p.matrix(),
                    None => [[ONE, ZERO], [ZERO, ONE]],
                })
                .collect();
            let (flip, _, _) = t.masks();
            for r in 0..dim {
                let c = r ^ flip;
                let mut v = t.coefficient;
                for (q, f) in factors.iter().enumerate() {
                    let shift = n - 1 - q;
                    v *= f[(r >> shift) & 1][(c >> shift) & 1];
                }
                m[(r, c)] += v;
            }
        }
        Ok(m)
    }

    /// One term per line, `<re>,<im> <axis><index>...`; identity as `<re>,<im> I`.
    /// The identity offset line is emitted only when nonzero.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.identity_offset != ZERO {
            out.push_str(&format!("{:?},{:?} I\n", self.identity_offset.re, self.identity_offset.im));
        }
        for t in &self.terms {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses [`PauliSum::to_text`] output. Blank lines and `#` comments are
    /// skipped. Identity lines accumulate into the offset.
    pub fn from_text(text: &str, n_qubits: usize) -> Result<PauliSum> {
        let mut s = PauliSum::new(n_qubits);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let (coef, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let (re, im) = coef
                .split_once(',')
                .ok_or_else(|| err(format!("expected <re>,<im>, got {coef:?}")))?;
            let re: f64 = re.parse().map_err(|_| err(format!("bad real part {re:?}")))?;
            let im: f64 = im.parse().map_err(|_| err(format!("bad imaginary part {im:?}")))?;
            let c = Complex64::new(re, im);
            let rest = rest.trim();
            if rest.is_empty() {
                return Err(err("missing Pauli string (use I for identity)".into()));
            }
            let term = PauliTerm::from_label(n_qubits, c, rest).map_err(|e| err(e.to_string()))?;
            if term.is_identity() {
                s.add_identity(c);
            } else {
                s.push(term)?;
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn term(n: usize, coef: Complex64, label: &str) -> PauliTerm {
        PauliTerm::from_label(n, coef, label).unwrap()
    }

    #[test]
    fn multiply_examples() {
        let x = term(1, ONE, "X0");
        let y = term(1, ONE, "Y0");
        let p = x.multiply(&y).unwrap();
        assert_eq!(p.label(), "Z0");
        assert_eq!(p.coefficient(), I);

        let xx = x.multiply(&x).unwrap();
        assert!(xx.is_identity());
        assert_eq!(xx.coefficient(), ONE);

        // (2 X0 Z1)(3 Y0 Z1): X*Y = iZ on qubit 0, Z*Z = I on qubit 1.
        let a = term(2, c(2.0, 0.0), "X0 Z1");
        let b = term(2, c(3.0, 0.0), "Y0 Z1");
        let p = a.multiply(&b).unwrap();
        assert_eq!(p.label(), "Z0");
        assert_eq!(p.coefficient(), c(0.0, 6.0));
    }

    #[test]
    fn multiply_width_mismatch() {
        let a = term(1, ONE, "X0");
        let b = term(2, ONE, "X0");
        assert!(matches!(a.multiply(&b), Err(Error::WidthMismatch { .. })));
        assert!(a.commutes(&b).is_err());
    }

    #[test]
    fn commutes_examples() {
        assert!(term(2, ONE, "X0").commutes(&term(2, ONE, "Z1")).unwrap());
        assert!(!term(2, ONE, "X0").commutes(&term(2, ONE, "Z0")).unwrap());
        assert!(term(2, ONE, "X0 Z1").commutes(&term(2, ONE, "Z0 X1")).unwrap());
    }

    #[test]
    fn term_rejects_bad_indices() {
        assert!(matches!(
            PauliTerm::real(2, 1.0, [(2, Pauli::X)]),
            Err(Error::QubitOutOfRange { index: 2, n_qubits: 2 })
        ));
        assert!(PauliTerm::real(2, 1.0, [(0, Pauli::X), (0, Pauli::Z)]).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let s = PauliSum::from_terms(1, [term(1, c(1.0, 0.0), "Z0"), term(1, c(2.0, 0.0), "Z0")]).unwrap();
        let s = s.canonicalize();
        assert_eq!(s.len(), 1);
        assert_eq!(s.terms()[0].coefficient(), c(3.0, 0.0));

        let s = PauliSum::from_terms(1, [term(1, c(1.0, 0.0), "Z0"), term(1, c(-1.0, 0.0), "Z0")]).unwrap();
        let s = s.canonicalize();
        assert!(s.is_empty());
        assert_eq!(s.identity_offset(), ZERO);

        let s = PauliSum::from_terms(1, [term(1, c(0.5, 0.0), "I")]).unwrap().canonicalize();
        assert!(s.is_empty());
        assert_eq!(s.identity_offset(), c(0.5, 0.0));
    }

    #[test]
    fn canonicalize_prunes_below_tolerance() {
        let s = PauliSum::from_terms(2, [term(2, c(1e-13, 0.0), "X0"), term(2, c(1e-3, 0.0), "Z1")]).unwrap();
        assert_eq!(s.canonicalize().len(), 1);
        assert_eq!(s.canonicalize_with_tolerance(1e-2).len(), 0);
    }

    #[test]
    fn hermitian_predicate() {
        let mut s = PauliSum::from_terms(1, [term(1, c(1.0, 0.0), "X0")]).unwrap();
        assert!(s.is_hermitian());
        s.add_identity(c(0.0, 0.5));
        assert!(!s.is_hermitian());
    }

    #[test]
    fn dense_examples() {
        let z = term(1, ONE, "Z0").to_dense_matrix().unwrap();
        assert_eq!(z, DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]));
        let x = term(1, ONE, "X0").to_dense_matrix().unwrap();
        assert_eq!(x, DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));
        let zz = term(2, ONE, "Z0 Z1").to_dense_matrix().unwrap();
        let diag: Vec<Complex64> = (0..4).map(|i| zz[(i, i)]).collect();
        assert_eq!(diag, vec![ONE, -ONE, -ONE, ONE]);
        assert_eq!(zz.iter().filter(|v| **v != ZERO).count(), 4);
    }

    #[test]
    fn dense_qubit_zero_is_most_significant() {
        // X on qubit 0 of 2 flips the high bit: |00> (index 0) -> |10> (index 2).
        let x0 = term(2, ONE, "X0").to_dense_matrix().unwrap();
        assert_eq!(x0[(2, 0)], ONE);
        let x1 = term(2, ONE, "X1").to_dense_matrix().unwrap();
        assert_eq!(x1[(1, 0)], ONE);
    }

    #[test]
    fn dense_cap() {
        let s = PauliSum::new(15);
        assert!(matches!(s.to_dense_matrix(), Err(Error::WidthCapExceeded { n_qubits: 15, cap: 14 })));
        assert!(PauliSum::new(3).to_dense_matrix_capped(2).is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut s = PauliSum::from_terms(
            3,
            [term(3, c(1.0, 0.0), "X0 Y1"), term(3, c(-0.25, 1e-3), "Z2"), term(3, c(0.1, 0.0), "X0 Z1 Y2")],
        )
        .unwrap();
        s.add_identity(c(0.5, 0.0));
        let text = s.to_text();
        assert!(text.contains("1.0,0.0 X0 Y1"));
        assert!(text.starts_with("0.5,0.0 I"));
        let back = PauliSum::from_text(&text, 3).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn text_parse_errors_carry_line() {
        let err = PauliSum::from_text("1.0,0.0 X0\n\nfoo X1\n", 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = PauliSum::from_text("1.0,0.0 X5\n", 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    fn arb_term(n: usize) -> impl Strategy<Value = PauliTerm> {
        (
            proptest::collection::vec(0u8..4, n),
            -2.0f64..2.0,
            -2.0f64..2.0,
        )
            .prop_map(move |(axes, re, im)| {
                let paulis = axes.iter().enumerate().filter_map(|(q, a)| match a {
                    1 => Some((q, Pauli::X)),
                    2 => Some((q, Pauli::Y)),
                    3 => Some((q, Pauli::Z)),
                    _ => None,
                });
                PauliTerm::new(n, Complex64::new(re, im), paulis).unwrap()
            })
    }

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
        (a - b).iter().all(|v| v.norm() <= tol)
    }

    proptest! {
        #[test]
        fn multiply_is_associative((a, b, c3) in (arb_term(4), arb_term(4), arb_term(4))) {
            let l = a.multiply(&b).unwrap().multiply(&c3).unwrap();
            let r = a.multiply(&b.multiply(&c3).unwrap()).unwrap();
            prop_assert!(l.same_string(&r));
            prop_assert!((l.coefficient() - r.coefficient()).norm() < 1e-14 * (1.0 + l.coefficient().norm()));
        }

        #[test]
        fn commutation_matches_products((a, b) in (arb_term(4), arb_term(4))) {
            let ab = a.multiply(&b).unwrap();
            let ba = b.multiply(&a).unwrap();
            prop_assert!(ab.same_string(&ba));
            let scale = 1e-14 * (1.0 + ab.coefficient().norm());
            if a.commutes(&b).unwrap() {
                prop_assert!((ab.coefficient() - ba.coefficient()).norm() <= scale);
            } else {
                prop_assert!((ab.coefficient() + ba.coefficient()).norm() <= scale);
            }
        }

        #[test]
        fn dense_is_homomorphism((a, b) in (arb_term(3), arb_term(3))) {
            let lhs = a.multiply(&b).unwrap().to_dense_matrix().unwrap();
            let rhs = a.to_dense_matrix().unwrap() * b.to_dense_matrix().unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }

        #[test]
        fn canonicalize_is_idempotent(terms in proptest::collection::vec(arb_term(2), 0..8)) {
            let s = PauliSum::from_terms(2, terms).unwrap();
            let once = s.canonicalize();
            prop_assert_eq!(once.canonicalize(), once);
        }
    }
}
