//! Exact n-qubit Pauli arithmetic in the symplectic representation.
//!
//! A [`PauliString`] stores one X bit and one Z bit per qubit together with a
//! phase in {+1, +i, -1, -i}. The bit pair `(1, 1)` denotes the Hermitian `Y`,
//! so a string is Hermitian exactly when its phase is real. Qubit 0 is the
//! leftmost character of a label and the most significant tensor factor of the
//! dense realization.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_qubits, Error, Result};

/// Largest register that [`PauliString::to_dense`] will realize by default.
pub const DEFAULT_MAX_DENSE_QUBITS: usize = 12;

/// Largest register a symbolic string can describe.
pub const MAX_QUBITS: usize = 64;

const COEFF_EPS: f64 = 1e-14;

/// A power of `i`, stored as its exponent mod 4.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(e: i64) -> Phase {
        Phase(e.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) & 3)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) & 3)
    }

    pub fn neg(self) -> Phase {
        Phase((self.0 + 2) & 3)
    }

    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Recognizes coefficients that are exactly a unit power of `i`.
    pub fn from_complex(c: Complex64) -> Option<Phase> {
        [Phase::ONE, Phase::I, Phase::MINUS_ONE, Phase::MINUS_I]
            .into_iter()
            .find(|p| (p.to_complex() - c).norm() < 1e-12)
    }
}

/// Single-qubit Pauli factor.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// How a Pauli string acts on computational basis states:
/// `P|j> = coefficient(j) |j ^ flip>`.
#[derive(Copy, Clone, Debug)]
pub struct BasisAction {
    pub flip: usize,
    pub sign_mask: usize,
    pub base: Complex64,
}

impl BasisAction {
    #[inline]
    pub fn coefficient(&self, j: usize) -> Complex64 {
        if (j & self.sign_mask).count_ones() & 1 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    // bit q <-> qubit q
    x: u64,
    z: u64,
    phase: Phase,
}

fn qubit_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        PauliString {
            n_qubits,
            x: 0,
            z: 0,
            phase: Phase::ONE,
        }
    }

    /// Builds a string from raw bit masks (bit `q` addresses qubit `q`).
    pub fn from_bits(n_qubits: usize, x: u64, z: u64, phase: Phase) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                requested: n_qubits,
                limit: MAX_QUBITS,
            });
        }
        let mask = qubit_mask(n_qubits);
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::Argument(format!(
                "bit masks exceed {n_qubits} qubits"
            )));
        }
        Ok(PauliString {
            n_qubits,
            x,
            z,
            phase,
        })
    }

    /// `pauli` acting on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::Argument(format!(
                "qubit {qubit} out of range for {n_qubits} qubits"
            )));
        }
        let mut p = PauliString::identity(n_qubits);
        p.set(qubit, pauli);
        Ok(p)
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut p = PauliString::identity(paulis.len());
        for (q, &f) in paulis.iter().enumerate() {
            p.set(q, f);
        }
        p
    }

    fn set(&mut self, qubit: usize, pauli: Pauli) {
        let (xb, zb) = pauli.bits();
        let bit = 1u64 << qubit;
        self.x = if xb { self.x | bit } else { self.x & !bit };
        self.z = if zb { self.z | bit } else { self.z & !bit };
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(&self, phase: Phase) -> Self {
        PauliString {
            phase,
            ..self.clone()
        }
    }

    /// The same operator with phase reset to +1.
    pub fn unsigned(&self) -> Self {
        self.with_phase(Phase::ONE)
    }

    pub fn negated(&self) -> Self {
        self.with_phase(self.phase.neg())
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let bit = 1u64 << qubit;
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// True when the operator part is the identity (phase ignored).
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// Same operator up to phase.
    pub fn same_support(&self, other: &PauliString) -> bool {
        self.n_qubits == other.n_qubits && self.x == other.x && self.z == other.z
    }

    pub fn adjoint(&self) -> Self {
        self.with_phase(self.phase.conj())
    }

    /// Exact operator product `self * other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        // sigma(a) sigma(b) = i^g sigma(a ^ b), summed per qubit
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let y1 = x1 & z1;
        let only_x1 = x1 & !z1;
        let only_z1 = z1 & !x1;
        let mut g: i64 = 0;
        // Y * (x2, z2): z2 - x2
        g += (y1 & z2).count_ones() as i64 - (y1 & x2).count_ones() as i64;
        // X * (x2, z2): z2 (2 x2 - 1)
        g += (only_x1 & z2 & x2).count_ones() as i64 - (only_x1 & z2 & !x2).count_ones() as i64;
        // Z * (x2, z2): x2 (1 - 2 z2)
        g += (only_z1 & x2 & !z2).count_ones() as i64 - (only_z1 & x2 & z2).count_ones() as i64;
        let phase = self
            .phase
            .mul(other.phase)
            .mul(Phase::from_exponent(g));
        Ok(PauliString {
            n_qubits: self.n_qubits,
            x: x1 ^ x2,
            z: z1 ^ z2,
            phase,
        })
    }

    /// True iff the symplectic form between the two strings vanishes mod 2.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        Ok(self.anticommuting_bits(other).count_ones().is_multiple_of(2))
    }

    fn anticommuting_bits(&self, other: &PauliString) -> u64 {
        (self.x & other.z) ^ (self.z & other.x)
    }

    /// `P|j> = coefficient(j)|j ^ flip>` in the dense basis, qubit 0 most significant.
    pub fn basis_action(&self) -> BasisAction {
        let n = self.n_qubits;
        let mut flip = 0usize;
        let mut sign_mask = 0usize;
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            if self.x >> q & 1 == 1 {
                flip |= bit;
            }
            if self.z >> q & 1 == 1 {
                sign_mask |= bit;
            }
        }
        let n_y = (self.x & self.z).count_ones() as i64;
        let base = self.phase.mul(Phase::from_exponent(n_y)).to_complex();
        BasisAction {
            flip,
            sign_mask,
            base,
        }
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_with_limit(DEFAULT_MAX_DENSE_QUBITS)
    }

    pub fn to_dense_with_limit(&self, max_qubits: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > max_qubits {
            return Err(Error::TooManyQubits {
                requested: self.n_qubits,
                limit: max_qubits,
            });
        }
        let dim = 1usize << self.n_qubits;
        let action = self.basis_action();
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            m[(j ^ action.flip, j)] = action.coefficient(j);
        }
        Ok(m)
    }

    /// Label without the phase prefix.
    pub fn operator_label(&self) -> String {
        (0..self.n_qubits).map(|q| self.get(q).symbol()).collect()
    }

    /// Lexicographic key over qubits 0..n of (x bits, z bits).
    fn sort_key(&self) -> (u64, u64) {
        let shift = 64 - self.n_qubits.max(1) as u32;
        let rev = |b: u64| {
            if self.n_qubits == 0 {
                0
            } else {
                b.reverse_bits() >> shift
            }
        };
        (rev(self.x), rev(self.z))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            Phase::ONE => "",
            Phase::I => "+i",
            Phase::MINUS_ONE => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.operator_label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(label: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Label {
            label: label.to_string(),
            reason: reason.to_string(),
        };
        let s = label.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        if body.is_empty() {
            return Err(bad("empty operator"));
        }
        let paulis = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(bad(&format!("unexpected character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if paulis.len() > MAX_QUBITS {
            return Err(bad("too many qubits"));
        }
        Ok(PauliString::from_paulis(&paulis).with_phase(phase))
    }
}

impl PauliString {
    /// Parses either a full label of length `n_qubits` or a sparse label
    /// such as `Z0Z2` or `X0X1X2X3` listing each non-identity factor with its
    /// qubit index.
    pub fn parse_on(n_qubits: usize, label: &str) -> Result<PauliString> {
        let s = label.trim();
        if !s.chars().any(|c| c.is_ascii_digit()) {
            let p: PauliString = s.parse()?;
            check_qubits(n_qubits, p.n_qubits())?;
            return Ok(p);
        }
        let bad = |reason: String| Error::Label {
            label: label.to_string(),
            reason,
        };
        let mut out = PauliString::identity(n_qubits);
        let mut chars = s.chars().peekable();
        while let Some(c) = chars.next() {
            let pauli = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(bad(format!("unexpected character {c:?}"))),
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let q: usize = digits
                .parse()
                .map_err(|_| bad(format!("missing qubit index after {c}")))?;
            if q >= n_qubits {
                return Err(bad(format!("qubit {q} out of range for {n_qubits} qubits")));
            }
            if out.get(q) != Pauli::I {
                return Err(bad(format!("qubit {q} listed twice")));
            }
            out = out.multiply(&PauliString::single(n_qubits, q, pauli)?)?;
        }
        Ok(out)
    }
}

/// Complex-weighted sum of Pauli strings on a common register.
///
/// Term operators are stored with phase +1; any string phase is folded into
/// the coefficient on insertion.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliSum::from_pauli(&PauliString::identity(n_qubits))
    }

    pub fn from_pauli(p: &PauliString) -> Self {
        let mut s = PauliSum::zero(p.n_qubits());
        s.terms.push((p.phase().to_complex(), p.unsigned()));
        s
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, PauliString)>,
    {
        let mut s = PauliSum::zero(n_qubits);
        for (c, p) in terms {
            s.push(c, p)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, coefficient: Complex64, op: PauliString) -> Result<()> {
        check_qubits(self.n_qubits, op.n_qubits())?;
        let c = coefficient * op.phase().to_complex();
        self.terms.push((c, op.unsigned()));
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges duplicate operators, drops zero coefficients, and sorts terms.
    pub fn canonical(&self) -> PauliSum {
        let mut sorted = self.terms.clone();
        sorted.sort_by_key(|t| t.1.sort_key());
        let mut merged: Vec<(Complex64, PauliString)> = Vec::with_capacity(sorted.len());
        for (c, p) in sorted {
            match merged.last_mut() {
                Some((acc, q)) if q.sort_key().cmp(&p.sort_key()) == Ordering::Equal => *acc += c,
                _ => merged.push((c, p)),
            }
        }
        merged.retain(|(c, _)| c.norm() > COEFF_EPS);
        PauliSum {
            n_qubits: self.n_qubits,
            terms: merged,
        }
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, p)| (c.conj(), p.clone())).collect(),
        }
    }

    /// Term operators are Hermitian, so the sum is Hermitian iff every
    /// canonical coefficient is real.
    pub fn is_hermitian(&self) -> bool {
        self.canonical()
            .terms
            .iter()
            .all(|(c, _)| c.im.abs() <= 1e-12 * c.norm().max(1.0))
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, p)| (c * factor, p.clone())).collect(),
        }
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(PauliSum {
            n_qubits: self.n_qubits,
            terms,
        }
        .canonical())
    }

    pub fn multiply(&self, other: &PauliSum) -> Result<PauliSum> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        let mut out = PauliSum::zero(self.n_qubits);
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                out.push(a * b, p.multiply(q)?)?;
            }
        }
        Ok(out.canonical())
    }

    pub fn mul_pauli(&self, p: &PauliString) -> Result<PauliSum> {
        self.multiply(&PauliSum::from_pauli(p))
    }

    /// Every term commutes with `p`.
    pub fn commutes_with(&self, p: &PauliString) -> Result<bool> {
        for (_, q) in &self.terms {
            if !q.commutes(p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_with_limit(DEFAULT_MAX_DENSE_QUBITS)
    }

    pub fn to_dense_with_limit(&self, max_qubits: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > max_qubits {
            return Err(Error::TooManyQubits {
                requested: self.n_qubits,
                limit: max_qubits,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, p) in &self.terms {
            let action = p.basis_action();
            for j in 0..dim {
                m[(j ^ action.flip, j)] += c * action.coefficient(j);
            }
        }
        Ok(m)
    }

    /// Parses the plain-text Hamiltonian format: `#` comments, then one
    /// `<label> <real-coefficient>` term per line.
    pub fn parse_hamiltonian(text: &str) -> Result<PauliSum> {
        let mut sum: Option<PauliSum> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let invalid = |message: String| Error::Validation {
                line: line_no,
                message,
            };
            let mut fields = line.split_whitespace();
            let (Some(label), Some(coeff), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(invalid(format!("expected `<label> <coefficient>`, got {line:?}")));
            };
            let op: PauliString = label.parse().map_err(|e| invalid(format!("{e}")))?;
            let c: f64 = coeff
                .parse()
                .map_err(|_| invalid(format!("bad coefficient {coeff:?}")))?;
            let s = sum.get_or_insert_with(|| PauliSum::zero(op.n_qubits()));
            if op.n_qubits() != s.n_qubits() {
                return Err(invalid(format!(
                    "label {label} has {} qubits, expected {}",
                    op.n_qubits(),
                    s.n_qubits()
                )));
            }
            s.push(Complex64::new(c, 0.0), op)?;
        }
        sum.map(|s| s.canonical())
            .ok_or_else(|| Error::Argument("Hamiltonian file has no terms".into()))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, p)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}*{}", c.re, p)?;
            } else {
                write!(f, "({}{:+}i)*{}", c.re, c.im, p)?;
            }
        }
        Ok(())
    }
}
