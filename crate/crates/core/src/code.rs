//! Stabilizer codes, their generator hierarchies, syndromes, and recovery tables.

use std::fmt;

use crate::error::{check_qubits, Error, Result};
use crate::pauli::{Pauli, PauliString, Phase};

/// Text of the bundled perfect `[[5,1,3]]` code file.
pub const FIVE_ONE_THREE: &str = include_str!("../codes/five_one_three.code");
/// Text of the bundled single-qubit code with no checks.
pub const TRIVIAL_1Q: &str = include_str!("../codes/trivial_1q.code");

/// A correctable error declared in a code file, with optional prior probability.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectableError {
    pub op: PauliString,
    pub prior: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct StabilizerCode {
    n: usize,
    k: usize,
    d: Option<usize>,
    generators: Vec<PauliString>,
    logical_x: Vec<PauliString>,
    logical_z: Vec<PauliString>,
    declared_errors: Vec<CorrectableError>,
}

/// Source line of each item, for error messages. Zero when built in code.
#[derive(Default)]
struct Origins {
    generators: Vec<usize>,
    logical_x: Vec<usize>,
    logical_z: Vec<usize>,
}

impl StabilizerCode {
    /// Builds and validates a code from operators.
    pub fn new(
        n: usize,
        generators: Vec<PauliString>,
        logical_x: Vec<PauliString>,
        logical_z: Vec<PauliString>,
    ) -> Result<Self> {
        let code = StabilizerCode {
            n,
            k: logical_x.len(),
            d: None,
            generators,
            logical_x,
            logical_z,
            declared_errors: Vec::new(),
        };
        code.validate(&Origins::default())?;
        Ok(code)
    }

    pub fn five_one_three() -> Self {
        load_code(FIVE_ONE_THREE).expect("bundled code file is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> Option<usize> {
        self.d
    }

    /// Number of generators.
    pub fn m(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn logical_x(&self) -> &[PauliString] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliString] {
        &self.logical_z
    }

    pub fn declared_errors(&self) -> &[CorrectableError] {
        &self.declared_errors
    }

    /// `i X̄_q Z̄_q`, the logical Y of logical qubit `q`.
    pub fn logical_y(&self, q: usize) -> PauliString {
        let xz = self.logical_x[q]
            .multiply(&self.logical_z[q])
            .expect("logical operators share the register");
        xz.with_phase(xz.phase().mul(Phase::I))
    }

    /// The declared error list, or the identity plus every weight-1 Pauli.
    pub fn correctable_errors(&self) -> Vec<CorrectableError> {
        if !self.declared_errors.is_empty() {
            return self.declared_errors.clone();
        }
        let mut errors = vec![CorrectableError {
            op: PauliString::identity(self.n),
            prior: None,
        }];
        errors.extend(single_qubit_paulis(self.n).into_iter().map(|op| CorrectableError {
            op,
            prior: None,
        }));
        errors
    }

    fn validate(&self, origins: &Origins) -> Result<()> {
        let at = |v: &[usize], i: usize| v.get(i).copied().unwrap_or(0);
        let fail = |line: usize, message: String| Err(Error::Validation { line, message });
        if self.k == 0 {
            return fail(0, "k must be at least 1".into());
        }
        if self.logical_x.len() != self.k || self.logical_z.len() != self.k {
            return fail(
                0,
                format!(
                    "expected {} logical_x and logical_z operators, found {} and {}",
                    self.k,
                    self.logical_x.len(),
                    self.logical_z.len()
                ),
            );
        }
        let all = self
            .generators
            .iter()
            .zip(origins_or_zero(&origins.generators, self.generators.len()))
            .chain(self.logical_x.iter().zip(origins_or_zero(&origins.logical_x, self.k)))
            .chain(self.logical_z.iter().zip(origins_or_zero(&origins.logical_z, self.k)));
        for (op, line) in all {
            if op.n_qubits() != self.n {
                return fail(line, format!("{op} acts on {} qubits, expected {}", op.n_qubits(), self.n));
            }
            if !op.is_hermitian() {
                return fail(line, format!("{op} is not Hermitian"));
            }
        }
        for (i, a) in self.generators.iter().enumerate() {
            if a.is_identity() {
                return fail(at(&origins.generators, i), format!("generator {a} is trivial"));
            }
            for b in &self.generators[..i] {
                if !a.commutes(b)? {
                    return fail(
                        at(&origins.generators, i),
                        format!("generator {a} does not commute with {b}"),
                    );
                }
            }
        }
        if gf2_rank(&self.generators) != self.generators.len() {
            let line = origins.generators.last().copied().unwrap_or(0);
            return fail(line, "generators are not independent over GF(2)".into());
        }
        for q in 0..self.k {
            for (op, line) in [
                (&self.logical_x[q], at(&origins.logical_x, q)),
                (&self.logical_z[q], at(&origins.logical_z, q)),
            ] {
                if let Some(g) = self.generators.iter().find(|g| !op.commutes(g).unwrap_or(false)) {
                    return fail(line, format!("logical {op} anticommutes with generator {g}"));
                }
            }
            for r in 0..self.k {
                let expect_commute = q != r;
                let xz = self.logical_x[q].commutes(&self.logical_z[r])?;
                if xz != expect_commute {
                    return fail(
                        at(&origins.logical_x, q),
                        format!(
                            "logical_x {} and logical_z {} must {}",
                            self.logical_x[q],
                            self.logical_z[r],
                            if expect_commute { "commute" } else { "anticommute" }
                        ),
                    );
                }
                if q != r
                    && (!self.logical_x[q].commutes(&self.logical_x[r])?
                        || !self.logical_z[q].commutes(&self.logical_z[r])?)
                {
                    return fail(
                        at(&origins.logical_x, q),
                        format!("logical operators of qubits {q} and {r} do not commute"),
                    );
                }
            }
        }
        Ok(())
    }

    /// The `2^l` elements of the group generated by the first `l` generators,
    /// indexed by the bit string `chi` (bit `j` selects generator `j`).
    pub fn hierarchy_group(&self, l: usize) -> Result<Vec<PauliString>> {
        hierarchy_from_generators(self.n, &self.generators, l)
    }

    /// Bit `j` is set iff `e` anticommutes with generator `j`.
    pub fn syndrome(&self, e: &PauliString) -> Result<Syndrome> {
        check_qubits(self.n, e.n_qubits())?;
        let mut bits = 0u64;
        for (j, g) in self.generators.iter().enumerate() {
            if !g.commutes(e)? {
                bits |= 1 << j;
            }
        }
        Ok(Syndrome {
            bits,
            len: self.m(),
        })
    }
}

fn origins_or_zero(v: &[usize], len: usize) -> Vec<usize> {
    (0..len).map(|i| v.get(i).copied().unwrap_or(0)).collect()
}

/// Products of the first `l` generators over every bit string `chi`.
pub fn hierarchy_from_generators(
    n_qubits: usize,
    generators: &[PauliString],
    l: usize,
) -> Result<Vec<PauliString>> {
    if l > generators.len() {
        return Err(Error::Argument(format!(
            "hierarchy level {l} exceeds the {} available generators",
            generators.len()
        )));
    }
    if l >= 32 {
        return Err(Error::Argument(format!("hierarchy level {l} is too large")));
    }
    let mut group = vec![PauliString::identity(n_qubits); 1 << l];
    for chi in 1usize..(1 << l) {
        let low = chi.trailing_zeros() as usize;
        let rest = chi & (chi - 1);
        group[chi] = group[rest].multiply(&generators[low])?;
    }
    Ok(group)
}

/// Every non-identity single-qubit Pauli on `n` qubits, qubit-major.
pub fn single_qubit_paulis(n: usize) -> Vec<PauliString> {
    let mut out = Vec::with_capacity(3 * n);
    for q in 0..n {
        for f in [Pauli::X, Pauli::Y, Pauli::Z] {
            out.push(PauliString::single(n, q, f).expect("qubit in range"));
        }
    }
    out
}

fn gf2_rank(ops: &[PauliString]) -> usize {
    let mut rows: Vec<u128> = ops
        .iter()
        .map(|p| (p.x_bits() as u128) << 64 | p.z_bits() as u128)
        .collect();
    let mut rank = 0;
    for bit in (0..128).rev() {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pr = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row >> bit & 1 == 1 {
                *row ^= pr;
            }
        }
        rank += 1;
    }
    rank
}

/// Syndrome bit vector; bit `j` belongs to generator `j`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome {
    bits: u64,
    len: usize,
}

impl Syndrome {
    pub fn zero(len: usize) -> Self {
        Syndrome { bits: 0, len }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut b = 0u64;
        for (j, &set) in bits.iter().enumerate() {
            if set {
                b |= 1 << j;
            }
        }
        Syndrome {
            bits: b,
            len: bits.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, j: usize) -> bool {
        self.bits >> j & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn raw(&self) -> u64 {
        self.bits
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|j| self.bit(j)).collect()
    }

    pub fn xor(&self, other: &Syndrome) -> Syndrome {
        Syndrome {
            bits: self.bits ^ other.bits,
            len: self.len.max(other.len),
        }
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            write!(f, "{}", u8::from(self.bit(j)))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TableEntry {
    pub syndrome: Syndrome,
    pub error: PauliString,
    pub recovery: PauliString,
    pub prior: Option<f64>,
}

/// Map from syndrome to recovery operator. The identity entry is always first.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    entries: Vec<TableEntry>,
}

impl SyndromeTable {
    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn recovery_for(&self, s: &Syndrome) -> Option<&PauliString> {
        self.entries.iter().find(|e| e.syndrome == *s).map(|e| &e.recovery)
    }

    /// Replaces each recovery `R` by `R * f(index)`; used to show that
    /// stabilizer-equivalent recoveries give identical corrections.
    pub fn map_recoveries<F>(&self, mut f: F) -> Result<SyndromeTable>
    where
        F: FnMut(usize, &PauliString) -> PauliString,
    {
        let mut entries = self.entries.clone();
        for (i, e) in entries.iter_mut().enumerate() {
            e.recovery = f(i, &e.recovery);
        }
        Ok(SyndromeTable { entries })
    }

    /// Sampling weights over entries: proportional to priors when every
    /// entry has one, otherwise uniform.
    pub fn default_weights(&self) -> Vec<f64> {
        let priors: Option<Vec<f64>> = self.entries.iter().map(|e| e.prior).collect();
        match priors {
            Some(p) if p.iter().all(|&x| x > 0.0) => {
                let total: f64 = p.iter().sum();
                p.iter().map(|x| x / total).collect()
            }
            _ => vec![1.0 / self.entries.len() as f64; self.entries.len()],
        }
    }
}

/// Builds a table where each error is its own recovery.
pub fn build_syndrome_table(code: &StabilizerCode, errors: &[PauliString]) -> Result<SyndromeTable> {
    let declared: Vec<CorrectableError> = errors
        .iter()
        .map(|op| CorrectableError {
            op: op.clone(),
            prior: None,
        })
        .collect();
    build_syndrome_table_with_priors(code, &declared)
}

pub fn build_syndrome_table_with_priors(
    code: &StabilizerCode,
    errors: &[CorrectableError],
) -> Result<SyndromeTable> {
    let identity_prior = errors
        .iter()
        .find(|e| e.op.is_identity())
        .and_then(|e| e.prior);
    let mut entries = vec![TableEntry {
        syndrome: Syndrome::zero(code.m()),
        error: PauliString::identity(code.n()),
        recovery: PauliString::identity(code.n()),
        prior: identity_prior,
    }];
    for e in errors.iter().filter(|e| !e.op.is_identity()) {
        let op = e.op.unsigned();
        let syndrome = code.syndrome(&op)?;
        if let Some(prev) = entries.iter().find(|t| t.syndrome == syndrome) {
            return Err(Error::Ambiguous {
                first: prev.error.to_string(),
                second: op.to_string(),
            });
        }
        entries.push(TableEntry {
            syndrome,
            error: op.clone(),
            recovery: op,
            prior: e.prior,
        });
    }
    Ok(SyndromeTable { entries })
}

/// Parses and validates a code file.
///
/// Directives, one per line: `n`, `k`, `d` (optional), `stabilizer <label>`
/// (ordered), `logical_x <label>`, `logical_z <label>`, and
/// `error <label> [prior]`. `#` starts a comment.
pub fn load_code(text: &str) -> Result<StabilizerCode> {
    let mut n = None;
    let mut k = None;
    let mut d = None;
    let mut generators = Vec::new();
    let mut logical_x = Vec::new();
    let mut logical_z = Vec::new();
    let mut errors = Vec::new();
    let mut origins = Origins::default();
    let mut error_lines = Vec::new();

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
        let fields: Vec<&str> = line.split_whitespace().collect();
        let int = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| invalid(format!("expected an integer, got {s:?}")))
        };
        let label = |s: &str| -> Result<PauliString> {
            s.parse().map_err(|e: Error| invalid(e.to_string()))
        };
        match (fields[0], &fields[1..]) {
            ("n", [v]) => n = Some(int(v)?),
            ("k", [v]) => k = Some(int(v)?),
            ("d", [v]) => d = Some(int(v)?),
            ("stabilizer", [v]) => {
                generators.push(label(v)?);
                origins.generators.push(line_no);
            }
            ("logical_x", [v]) => {
                logical_x.push(label(v)?);
                origins.logical_x.push(line_no);
            }
            ("logical_z", [v]) => {
                logical_z.push(label(v)?);
                origins.logical_z.push(line_no);
            }
            ("error", [v]) => {
                errors.push(CorrectableError {
                    op: label(v)?,
                    prior: None,
                });
                error_lines.push(line_no);
            }
            ("error", [v, p]) => {
                let prior: f64 = p
                    .parse()
                    .map_err(|_| invalid(format!("bad prior {p:?}")))?;
                if !(0.0..=1.0).contains(&prior) {
                    return Err(invalid(format!("prior {prior} outside [0, 1]")));
                }
                errors.push(CorrectableError {
                    op: label(v)?,
                    prior: Some(prior),
                });
                error_lines.push(line_no);
            }
            _ => return Err(invalid(format!("unrecognized directive {line:?}"))),
        }
    }

    let n = n.ok_or(Error::Validation {
        line: 0,
        message: "missing `n` directive".into(),
    })?;
    let k = k.ok_or(Error::Validation {
        line: 0,
        message: "missing `k` directive".into(),
    })?;
    if k == 0 {
        return Err(Error::Validation {
            line: 0,
            message: "k must be at least 1".into(),
        });
    }
    for (e, line) in errors.iter().zip(&error_lines) {
        if e.op.n_qubits() != n {
            return Err(Error::Validation {
                line: *line,
                message: format!("error {} acts on {} qubits, expected {n}", e.op, e.op.n_qubits()),
            });
        }
    }
    let code = StabilizerCode {
        n,
        k,
        d,
        generators,
        logical_x,
        logical_z,
        declared_errors: errors,
    };
    code.validate(&origins)?;
    Ok(code)
}
