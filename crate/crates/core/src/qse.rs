//! Quantum subspace expansion.
//!
//! A corrected state is `P ρ P† / Tr[P ρ P†]` with `P = Σ_i c_i M_i` a
//! combination of expansion operators. Minimizing `Tr[P ρ P† T]` under the
//! normalization is the generalized eigenproblem `H c = E S c` with
//! `H_ij = Tr[M_i† T M_j ρ]` and `S_ij = Tr[M_i† M_j ρ]`.

use std::collections::HashMap;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::code::{hierarchy_from_generators, StabilizerCode};
use crate::error::{check_qubits, Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::sim::{fidelity, pauli_expectation_action, CMatrix, CVector, DensityMatrix, StateVector};

/// Relative cut on overlap eigenvalues.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Relative gap below which two eigenvalues count as degenerate.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct QseProblem {
    pub expansion_ops: Vec<PauliString>,
    pub target: PauliSum,
    pub state: DensityMatrix,
}

impl QseProblem {
    pub fn new(expansion_ops: Vec<PauliString>, target: PauliSum, state: DensityMatrix) -> Result<Self> {
        let n = state.n_qubits();
        check_qubits(n, target.n_qubits())?;
        for m in &expansion_ops {
            check_qubits(n, m.n_qubits())?;
        }
        if expansion_ops.is_empty() {
            return Err(Error::Argument("no expansion operators".into()));
        }
        if !target.is_hermitian() {
            return Err(Error::Contract("QSE target is not Hermitian".into()));
        }
        Ok(QseProblem {
            expansion_ops,
            target,
            state,
        })
    }
}

#[derive(Clone, Debug)]
pub struct QseSolution {
    pub h_matrix: CMatrix,
    pub s_matrix: CMatrix,
    pub retained_rank: usize,
    /// Ascending eigenvalues of the retained problem.
    pub eigenvalues: Vec<f64>,
    /// Column `k` holds the S-normalized coefficients of eigenvalue `k`.
    pub eigenvectors: CMatrix,
    /// Ground coefficients; equal to column 0 unless the ground level is degenerate.
    pub coefficients: CVector,
    /// `c† S c`, one up to roundoff.
    pub c_norm: f64,
}

impl QseSolution {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn key(p: &PauliString) -> (u64, u64) {
    (p.x_bits(), p.z_bits())
}

/// `(H, S)` for the problem. When every expansion operator commutes with every
/// target term, `M_i† T M_j = T M_i† M_j` and each distinct product is
/// evaluated once; otherwise the two-sided traces are summed term by term.
pub fn build_qse_matrices(problem: &QseProblem) -> Result<(CMatrix, CMatrix)> {
    let ops = &problem.expansion_ops;
    let rho = problem.state.data();
    let n = ops.len();
    let mut reduced = true;
    'outer: for m in ops {
        for (_, t) in problem.target.terms() {
            if !m.commutes(t)? {
                reduced = false;
                break 'outer;
            }
        }
    }

    let mut s = CMatrix::zeros(n, n);
    let mut h = CMatrix::zeros(n, n);
    // products are cached up to phase, keyed on the bare string
    let mut s_cache: HashMap<(u64, u64), Complex64> = HashMap::new();
    let mut h_cache: HashMap<(u64, u64), Complex64> = HashMap::new();
    for i in 0..n {
        let mi = ops[i].adjoint();
        for j in 0..n {
            let k = mi.multiply(&ops[j])?;
            let phase = k.phase().to_complex();
            let bare = k.unsigned();
            let sv = *s_cache
                .entry(key(&bare))
                .or_insert_with(|| pauli_expectation_action(rho, &bare.basis_action()));
            s[(i, j)] = phase * sv;
            if reduced {
                let hv = match h_cache.get(&key(&bare)) {
                    Some(v) => *v,
                    None => {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (coef, t) in problem.target.terms() {
                            let tk = t.multiply(&bare)?;
                            acc += coef * pauli_expectation_action(rho, &tk.basis_action());
                        }
                        h_cache.insert(key(&bare), acc);
                        acc
                    }
                };
                h[(i, j)] = phase * hv;
            } else {
                let mut acc = Complex64::new(0.0, 0.0);
                for (coef, t) in problem.target.terms() {
                    let op = mi.multiply(t)?.multiply(&ops[j])?;
                    acc += coef * pauli_expectation_action(rho, &op.basis_action());
                }
                h[(i, j)] = acc;
            }
        }
    }
    Ok((h, s))
}

/// Canonical diagonalization of `H c = E S c`.
///
/// Overlap eigenvectors with eigenvalue below `epsilon` times the largest are
/// dropped; `H` is diagonalized in the whitened remainder. If the ground level
/// is degenerate the ground vector is the projection of the uniform vector
/// onto that level. Its global phase makes `c† S u` real and positive, with
/// `u` the all-ones vector.
pub fn canonical_solve(h: &CMatrix, s: &CMatrix, epsilon: f64) -> Result<QseSolution> {
    let n = h.nrows();
    if h.ncols() != n || s.nrows() != n || s.ncols() != n {
        return Err(Error::Argument("H and S must be square and of equal size".into()));
    }
    if n == 0 {
        return Err(Error::EmptySubspace);
    }
    let se = SymmetricEigen::new(hermitize(s));
    let smax = se.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(smax > 0.0) {
        return Err(Error::EmptySubspace);
    }
    let keep: Vec<usize> = (0..n).filter(|&k| se.eigenvalues[k] > epsilon * smax).collect();
    if keep.is_empty() {
        return Err(Error::EmptySubspace);
    }
    let r = keep.len();
    let mut g = CMatrix::zeros(n, r);
    for (col, &k) in keep.iter().enumerate() {
        let scale = 1.0 / se.eigenvalues[k].sqrt();
        g.set_column(col, &(se.eigenvectors.column(k) * Complex64::new(scale, 0.0)));
    }
    let hw = hermitize(&(g.adjoint() * h * &g));
    let he = SymmetricEigen::new(hw);
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| he.eigenvalues[a].total_cmp(&he.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| he.eigenvalues[k]).collect();
    let mut w = CMatrix::zeros(r, r);
    for (col, &k) in order.iter().enumerate() {
        w.set_column(col, &he.eigenvectors.column(k));
    }

    // whitened image of the uniform vector
    let u = CVector::from_element(n, Complex64::new(1.0, 0.0));
    let yu = g.adjoint() * s * &u;
    let e0 = eigenvalues[0];
    let tol = DEGENERACY_TOL * e0.abs().max(1.0);
    let degenerate = eigenvalues.iter().take_while(|&&e| e - e0 <= tol).count();
    let mut y = w.column(0).into_owned();
    if degenerate > 1 {
        let mut proj = CVector::zeros(r);
        for k in 0..degenerate {
            let wk = w.column(k);
            proj += wk * wk.dotc(&yu);
        }
        if proj.norm() > 1e-12 * yu.norm().max(1e-300) {
            y = proj.normalize();
        }
    }
    let overlap = y.dotc(&yu);
    if overlap.norm() > 1e-14 {
        y *= overlap / overlap.norm();
    }
    let coefficients = &g * &y;
    let eigenvectors = &g * &w;
    let c_norm = coefficients.dotc(&(s * &coefficients)).re;
    Ok(QseSolution {
        h_matrix: h.clone(),
        s_matrix: s.clone(),
        retained_rank: r,
        eigenvalues,
        eigenvectors,
        coefficients,
        c_norm,
    })
}

/// Dense `Σ_i c_i M_i`.
pub fn expansion_operator(ops: &[PauliString], coefficients: &CVector) -> Result<CMatrix> {
    if ops.is_empty() || ops.len() != coefficients.len() {
        return Err(Error::Argument("coefficient count does not match operators".into()));
    }
    let n = ops[0].n_qubits();
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for (m, c) in ops.iter().zip(coefficients.iter()) {
        check_qubits(n, m.n_qubits())?;
        let action = m.basis_action();
        for j in 0..dim {
            out[(j ^ action.flip, j)] += action.coefficient(j) * c;
        }
    }
    Ok(out)
}

/// `P ρ P† / Tr[P ρ P†]` for `P = Σ c_i M_i`.
pub fn apply_expansion(rho: &DensityMatrix, ops: &[PauliString], coefficients: &CVector) -> Result<DensityMatrix> {
    let p = expansion_operator(ops, coefficients)?;
    let out = &p * rho.data() * p.adjoint();
    let norm = out.trace().re;
    if norm <= 0.0 {
        return Err(Error::EmptySubspace);
    }
    DensityMatrix::from_matrix_unchecked(rho.n_qubits(), out / Complex64::new(norm, 0.0))
}

/// Solves the problem and returns the corrected state of the ground solution.
pub fn qse_correct(problem: &QseProblem) -> Result<(QseSolution, DensityMatrix)> {
    qse_correct_with(problem, DEFAULT_EPSILON)
}

pub fn qse_correct_with(problem: &QseProblem, epsilon: f64) -> Result<(QseSolution, DensityMatrix)> {
    let (h, s) = build_qse_matrices(problem)?;
    let sol = canonical_solve(&h, &s, epsilon)?;
    let state = apply_expansion(&problem.state, &problem.expansion_ops, &sol.coefficients)?;
    Ok((sol, state))
}

/// `-Σ_{M ∈ S^(l)} M`; its ground space is the level-`l` code space.
pub fn code_hamiltonian(code: &StabilizerCode, l: usize) -> Result<PauliSum> {
    let group = code.hierarchy_group(l)?;
    let mut h = PauliSum::zero(code.n());
    for m in &group {
        h.push(Complex64::new(-1.0, 0.0), m.clone())?;
    }
    Ok(h.canonical())
}

/// Rewrites a `k`-qubit operator in terms of the code's logical operators.
pub fn encode_logical(op: &PauliSum, code: &StabilizerCode) -> Result<PauliSum> {
    check_qubits(code.k(), op.n_qubits())?;
    let mut out = PauliSum::zero(code.n());
    for (coef, term) in op.terms() {
        let mut enc = PauliString::identity(code.n()).with_phase(term.phase());
        for q in 0..code.k() {
            let factor = match term.get(q) {
                Pauli::I => continue,
                Pauli::X => code.logical_x()[q].clone(),
                Pauli::Z => code.logical_z()[q].clone(),
                Pauli::Y => code.logical_y(q),
            };
            enc = enc.multiply(&factor)?;
        }
        out.push(*coef, enc)?;
    }
    Ok(out.canonical())
}

/// The identity followed by `X̄_q, Ȳ_q, Z̄_q` for each logical qubit.
pub fn logical_basis(code: &StabilizerCode) -> Vec<PauliString> {
    let mut basis = vec![PauliString::identity(code.n())];
    for q in 0..code.k() {
        basis.push(code.logical_x()[q].clone());
        basis.push(code.logical_y(q));
        basis.push(code.logical_z()[q].clone());
    }
    basis
}

#[derive(Clone, Debug)]
pub struct TwoStageResult {
    pub energy: f64,
    pub corrected_state: DensityMatrix,
    /// Every retained eigenvalue of the logical problem, ascending.
    pub spectrum: Vec<f64>,
    pub stage_one: QseSolution,
    pub stage_two: QseSolution,
}

/// Removes code-space leakage with the full stabilizer group and the code
/// Hamiltonian, then diagonalizes the encoded problem Hamiltonian over the
/// corrected state. With `logical_ops` the second expansion is
/// [`logical_basis`], otherwise only the identity.
pub fn two_stage_logical_qse(
    rho: &DensityMatrix,
    code: &StabilizerCode,
    h_logical: &PauliSum,
    logical_ops: bool,
) -> Result<TwoStageResult> {
    let group = code.hierarchy_group(code.m())?;
    let stage1 = QseProblem::new(group, code_hamiltonian(code, code.m())?, rho.clone())?;
    let (sol1, corrected) = qse_correct(&stage1)?;
    for m in code.generators() {
        if !h_logical.commutes_with(m)? {
            return Err(Error::Contract(format!(
                "encoded Hamiltonian does not commute with stabilizer {m}"
            )));
        }
    }
    let basis = if logical_ops {
        logical_basis(code)
    } else {
        vec![PauliString::identity(code.n())]
    };
    let stage2 = QseProblem::new(basis, h_logical.clone(), corrected)?;
    let (sol2, state) = qse_correct(&stage2)?;
    Ok(TwoStageResult {
        energy: sol2.ground_energy(),
        corrected_state: state,
        spectrum: sol2.eigenvalues.clone(),
        stage_one: sol1,
        stage_two: sol2,
    })
}

#[derive(Clone, Debug)]
pub struct SymmetryResult {
    pub energy: f64,
    pub corrected_state: DensityMatrix,
    pub fidelity: Option<f64>,
    pub solution: QseSolution,
    pub expansion_ops: Vec<PauliString>,
}

/// QSE over the group generated by the first `l` symmetry generators with the
/// problem Hamiltonian as target. Generators need not commute with it.
pub fn symmetry_qse(
    rho: &DensityMatrix,
    generators: &[PauliString],
    problem_h: &PauliSum,
    l: usize,
    reference: Option<&StateVector>,
) -> Result<SymmetryResult> {
    let ops = hierarchy_from_generators(rho.n_qubits(), generators, l)?;
    let problem = QseProblem::new(ops, problem_h.clone(), rho.clone())?;
    let (solution, state) = qse_correct(&problem)?;
    let fid = match reference {
        Some(psi) => Some(fidelity(&state, psi)?),
        None => None,
    };
    Ok(SymmetryResult {
        energy: solution.ground_energy(),
        corrected_state: state,
        fidelity: fid,
        solution,
        expansion_ops: problem.expansion_ops,
    })
}

/// Lowest eigenvalue and a normalized eigenvector of a Hermitian operator.
pub fn ground_state(h: &PauliSum) -> Result<(f64, StateVector)> {
    let dense = hermitize(&h.to_dense()?);
    let eig = SymmetricEigen::new(dense);
    let k = (0..eig.eigenvalues.len())
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .ok_or(Error::EmptySubspace)?;
    let v = eig.eigenvectors.column(k).into_owned();
    Ok((eig.eigenvalues[k], StateVector::new(h.n_qubits(), v)?))
}
