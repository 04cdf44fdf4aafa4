//! Dense density-matrix simulation.
//!
//! Pauli operators act on the computational basis as signed permutations, so
//! Pauli conjugation and Pauli expectations are applied directly from
//! [`BasisAction`] without materializing the operator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::code::StabilizerCode;
use crate::error::{check_qubits, Error, Result};
use crate::pauli::{BasisAction, Pauli, PauliString, PauliSum, DEFAULT_MAX_DENSE_QUBITS};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn dim_for(n_qubits: usize) -> Result<usize> {
    if n_qubits > DEFAULT_MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            requested: n_qubits,
            limit: DEFAULT_MAX_DENSE_QUBITS,
        });
    }
    Ok(1 << n_qubits)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: CVector,
}

impl StateVector {
    /// Normalizes `amplitudes`; fails on a zero vector.
    pub fn new(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        let dim = dim_for(n_qubits)?;
        if amplitudes.len() != dim {
            return Err(Error::Argument(format!(
                "expected {dim} amplitudes, found {}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::Argument("zero state vector".into()));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes: amplitudes / c(norm),
        })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = dim_for(n_qubits)?;
        if index >= dim {
            return Err(Error::Argument(format!("basis index {index} out of range")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0);
        Ok(StateVector {
            n_qubits,
            amplitudes: v,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            data: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector> {
        check_qubits(self.n_qubits, p.n_qubits())?;
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amplitudes: pauli_times_vector(&p.basis_action(), &self.amplitudes),
        })
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

pub(crate) fn pauli_times_vector(action: &BasisAction, v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len());
    for j in 0..v.len() {
        out[j ^ action.flip] = action.coefficient(j) * v[j];
    }
    out
}

/// Dense operator on `n_qubits`. Channel outputs keep Hermiticity, unit trace,
/// and positivity within [`HERMITIAN_TOL`], [`TRACE_TOL`], [`PSD_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix and checks the density-matrix invariants.
    pub fn from_matrix(n_qubits: usize, data: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(n_qubits, data)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix checking only its shape.
    pub fn from_matrix_unchecked(n_qubits: usize, data: CMatrix) -> Result<Self> {
        let dim = dim_for(n_qubits)?;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::Argument(format!(
                "expected a {dim}x{dim} matrix, found {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(DensityMatrix { n_qubits, data })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = dim_for(n_qubits)?;
        Ok(DensityMatrix {
            n_qubits,
            data: CMatrix::identity(dim, dim) / c(dim as f64),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// Largest element-wise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()) * c(0.5);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > HERMITIAN_TOL {
            return Err(Error::Contract(format!("density matrix not Hermitian (deviation {h:e})")));
        }
        let t = self.trace();
        if (t - c(1.0)).norm() > TRACE_TOL {
            return Err(Error::Contract(format!("density matrix trace {t} != 1")));
        }
        let lo = self.min_eigenvalue();
        if lo < -PSD_TOL {
            return Err(Error::Contract(format!("density matrix has eigenvalue {lo:e}")));
        }
        Ok(())
    }

    /// `(1 - weight) * self + weight * other`.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> Result<DensityMatrix> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        Ok(DensityMatrix {
            n_qubits: self.n_qubits,
            data: &self.data * c(1.0 - weight) + &other.data * c(weight),
        })
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.data - &other.data).norm()
    }
}

/// `P rho P^dagger`; independent of the phase of `p`.
pub fn apply_pauli(rho: &DensityMatrix, p: &PauliString) -> Result<DensityMatrix> {
    check_qubits(rho.n_qubits, p.n_qubits())?;
    let action = p.basis_action();
    Ok(DensityMatrix {
        n_qubits: rho.n_qubits,
        data: conjugate_by_pauli(&rho.data, &action),
    })
}

fn conjugate_by_pauli(m: &CMatrix, action: &BasisAction) -> CMatrix {
    let d = m.nrows();
    let coeff: Vec<Complex64> = (0..d).map(|j| action.coefficient(j)).collect();
    let mut out = CMatrix::zeros(d, d);
    for k in 0..d {
        let ck = coeff[k].conj();
        for j in 0..d {
            out[(j ^ action.flip, k ^ action.flip)] = coeff[j] * m[(j, k)] * ck;
        }
    }
    out
}

/// `U rho U^dagger`.
pub fn apply_unitary(rho: &DensityMatrix, u: &CMatrix) -> Result<DensityMatrix> {
    if u.nrows() != rho.dim() || u.ncols() != rho.dim() {
        return Err(Error::Argument("unitary dimension does not match state".into()));
    }
    Ok(DensityMatrix {
        n_qubits: rho.n_qubits,
        data: u * &rho.data * u.adjoint(),
    })
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} = {p} outside [0, 1]")))
    }
}

/// Kraus operators `sqrt(1-p) I, sqrt(p/3) X, sqrt(p/3) Y, sqrt(p/3) Z`.
pub fn depolarizing_kraus(p: f64) -> Result<[CMatrix; 4]> {
    check_probability("p", p)?;
    let a = (1.0 - p).sqrt();
    let b = (p / 3.0).sqrt();
    let single = |f: Pauli| PauliString::from_paulis(&[f]).to_dense().expect("one qubit");
    Ok([
        single(Pauli::I) * c(a),
        single(Pauli::X) * c(b),
        single(Pauli::Y) * c(b),
        single(Pauli::Z) * c(b),
    ])
}

/// Applies `(1-p) rho + (p/3)(X rho X + Y rho Y + Z rho Z)` to each listed
/// qubit in index order. Totally mixed at `p = 3/4`.
pub fn depolarize_each(rho: &DensityMatrix, p: f64, qubits: &[usize]) -> Result<DensityMatrix> {
    check_probability("p", p)?;
    let n = rho.n_qubits;
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return Err(Error::Argument(format!("qubit {q} out of range for {n} qubits")));
    }
    let mut order = qubits.to_vec();
    order.sort_unstable();
    let mut data = rho.data.clone();
    for q in order {
        let mut acc = &data * c(1.0 - p);
        for f in [Pauli::X, Pauli::Y, Pauli::Z] {
            let action = PauliString::single(n, q, f)?.basis_action();
            acc += conjugate_by_pauli(&data, &action) * c(p / 3.0);
        }
        data = acc;
    }
    Ok(DensityMatrix { n_qubits: n, data })
}

/// Per-qubit depolarizing on every qubit.
pub fn depolarize_all(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    let qubits: Vec<usize> = (0..rho.n_qubits).collect();
    depolarize_each(rho, p, &qubits)
}

/// `(1 - w) rho + w I / 2^n`.
pub fn global_depolarize(rho: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
    check_probability("w", w)?;
    let mixed = DensityMatrix::maximally_mixed(rho.n_qubits)?;
    rho.mix(&mixed, w)
}

/// `Tr[rho P]` for a single Pauli string, phase included.
pub fn pauli_expectation(rho: &DensityMatrix, p: &PauliString) -> Result<Complex64> {
    check_qubits(rho.n_qubits, p.n_qubits())?;
    Ok(pauli_expectation_action(&rho.data, &p.basis_action()))
}

#[inline]
pub(crate) fn pauli_expectation_action(m: &CMatrix, action: &BasisAction) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m.nrows() {
        acc += action.coefficient(j) * m[(j, j ^ action.flip)];
    }
    acc
}

/// `Tr[rho obs]`.
pub fn expectation(rho: &DensityMatrix, obs: &PauliSum) -> Result<Complex64> {
    check_qubits(rho.n_qubits, obs.n_qubits())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (coef, p) in obs.terms() {
        acc += coef * pauli_expectation_action(&rho.data, &p.basis_action());
    }
    Ok(acc)
}

/// `<psi| rho |psi>`.
pub fn fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    check_qubits(rho.n_qubits, psi.n_qubits)?;
    let v = &psi.amplitudes;
    Ok(v.dotc(&(&rho.data * v)).re)
}

/// `cos(theta/2)|0̄> + e^{i phi} sin(theta/2)|1̄>` for a single-logical-qubit code.
///
/// `|0̄>` is the normalized image of `|0...0>` under the code projector and
/// `(I + Z̄)/2`; `|1̄> = X̄|0̄>`.
pub fn prepare_logical_state(code: &StabilizerCode, theta: f64, phi: f64) -> Result<StateVector> {
    prepare_logical_state_from_seed(code, theta, phi, 0)
}

/// As [`prepare_logical_state`] but projecting the basis state `seed`.
pub fn prepare_logical_state_from_seed(
    code: &StabilizerCode,
    theta: f64,
    phi: f64,
    seed: usize,
) -> Result<StateVector> {
    if code.k() != 1 {
        return Err(Error::Preparation(format!(
            "logical state preparation needs k = 1, code has k = {}",
            code.k()
        )));
    }
    let n = code.n();
    let start = StateVector::basis(n, seed)?;
    let group = code.hierarchy_group(code.m())?;
    let mut projected = CVector::zeros(start.amplitudes.len());
    for m in &group {
        projected += pauli_times_vector(&m.basis_action(), &start.amplitudes);
    }
    let zbar = &code.logical_z()[0];
    projected += pauli_times_vector(&zbar.basis_action(), &projected.clone());
    if projected.norm() < 1e-10 {
        return Err(Error::Preparation(format!(
            "basis state {seed} has no overlap with logical |0>; choose a different seed"
        )));
    }
    let zero = StateVector::new(n, projected)?;
    let one = zero.apply_pauli(&code.logical_x()[0])?;
    let amps = &zero.amplitudes * c((theta / 2.0).cos())
        + &one.amplitudes * (Complex64::from_polar(1.0, phi) * (theta / 2.0).sin());
    StateVector::new(n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn one_qubit(amps: [f64; 2]) -> StateVector {
        StateVector::new(1, CVector::from_vec(vec![c(amps[0]), c(amps[1])])).unwrap()
    }

    #[test]
    fn logical_zero_is_code_state() {
        let code = StabilizerCode::five_one_three();
        let psi = prepare_logical_state(&code, 0.0, 0.0).unwrap();
        let rho = psi.to_density();
        for g in code.generators() {
            assert!((pauli_expectation(&rho, g).unwrap() - c(1.0)).norm() < 1e-10);
        }
        let z = pauli_expectation(&rho, &code.logical_z()[0]).unwrap();
        assert!((z - c(1.0)).norm() < 1e-10);
        let flipped = prepare_logical_state(&code, PI, 1.234).unwrap().to_density();
        let z = pauli_expectation(&flipped, &code.logical_z()[0]).unwrap();
        assert!((z + c(1.0)).norm() < 1e-10);
    }

    #[test]
    fn logical_bloch_vector() {
        let code = StabilizerCode::five_one_three();
        let (theta, phi) = (2.0 * PI / 5.0, PI / 3.0);
        let rho = prepare_logical_state(&code, theta, phi).unwrap().to_density();
        let x = pauli_expectation(&rho, &code.logical_x()[0]).unwrap();
        let y = pauli_expectation(&rho, &code.logical_y(0)).unwrap();
        let z = pauli_expectation(&rho, &code.logical_z()[0]).unwrap();
        assert!((x.re - theta.sin() * phi.cos()).abs() < 1e-10);
        assert!((y.re - theta.sin() * phi.sin()).abs() < 1e-10);
        assert!((z.re - theta.cos()).abs() < 1e-10);
        for g in code.generators() {
            assert!((pauli_expectation(&rho, g).unwrap().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn preparation_requires_single_logical_qubit() {
        let two = StabilizerCode::new(2, vec![], vec![p("XI"), p("IX")], vec![p("ZI"), p("IZ")])
            .unwrap();
        assert!(matches!(
            prepare_logical_state(&two, 0.0, 0.0),
            Err(Error::Preparation(_))
        ));
    }

    #[test]
    fn zero_overlap_seed_is_reported() {
        // |1> has no overlap with logical |0> of the trivial code
        let code = crate::code::load_code(crate::code::TRIVIAL_1Q).unwrap();
        assert!(matches!(
            prepare_logical_state_from_seed(&code, 0.0, 0.0, 1),
            Err(Error::Preparation(_))
        ));
    }

    #[test]
    fn pauli_conjugation() {
        let zero = one_qubit([1.0, 0.0]).to_density();
        assert_eq!(apply_pauli(&zero, &p("I")).unwrap(), zero);
        let flipped = apply_pauli(&zero, &p("X")).unwrap();
        assert!((flipped.data()[(1, 1)] - c(1.0)).norm() < 1e-15);
        let phased = apply_pauli(&zero, &p("-iX")).unwrap();
        assert_eq!(phased, flipped);

        let code = StabilizerCode::five_one_three();
        let zbar = prepare_logical_state(&code, 0.0, 0.0).unwrap();
        let onebar = prepare_logical_state(&code, PI, 0.0).unwrap();
        let moved = apply_pauli(&zbar.to_density(), &code.logical_x()[0]).unwrap();
        assert!((fidelity(&moved, &onebar).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_single_qubit() {
        let zero = one_qubit([1.0, 0.0]).to_density();
        assert_eq!(depolarize_each(&zero, 0.0, &[0]).unwrap(), zero);
        for &pr in &[0.1, 0.3, 0.6] {
            let out = depolarize_each(&zero, pr, &[0]).unwrap();
            assert!((out.data()[(0, 0)].re - (1.0 - 2.0 * pr / 3.0)).abs() < 1e-15);
            assert!((out.data()[(1, 1)].re - 2.0 * pr / 3.0).abs() < 1e-15);
        }
        let plus = one_qubit([1.0, 1.0]);
        let mixed = depolarize_each(&plus.to_density(), 0.75, &[0]).unwrap();
        let half = DensityMatrix::maximally_mixed(1).unwrap();
        assert!(mixed.frobenius_distance(&half) < 1e-15);
        assert!(depolarize_each(&zero, 1.5, &[0]).is_err());
        assert!(depolarize_each(&zero, 0.1, &[3]).is_err());
    }

    #[test]
    fn kraus_completeness() {
        for i in 0..=20 {
            let pr = i as f64 / 20.0;
            let ks = depolarizing_kraus(pr).unwrap();
            let sum = ks.iter().fold(CMatrix::zeros(2, 2), |acc, k| acc + k.adjoint() * k);
            assert!((sum - CMatrix::identity(2, 2)).norm() < 1e-12);
        }
    }

    #[test]
    fn kraus_sum_matches_channel() {
        let psi = StateVector::new(
            2,
            CVector::from_vec(vec![c(0.3), Complex64::new(0.1, 0.4), c(-0.5), Complex64::new(0.2, -0.6)]),
        )
        .unwrap();
        let rho = psi.to_density();
        let pr = 0.37;
        let ks = depolarizing_kraus(pr).unwrap();
        let id = CMatrix::identity(2, 2);
        let mut expect = CMatrix::zeros(4, 4);
        for k in &ks {
            let full = k.kronecker(&id);
            expect += &full * rho.data() * full.adjoint();
        }
        let got = depolarize_each(&rho, pr, &[0]).unwrap();
        assert!((got.data() - expect).norm() < 1e-14);
    }

    #[test]
    fn disjoint_qubits_commute() {
        let psi = StateVector::new(
            2,
            CVector::from_vec(vec![c(0.3), Complex64::new(0.1, 0.4), c(-0.5), Complex64::new(0.2, -0.6)]),
        )
        .unwrap();
        let rho = psi.to_density();
        let a = depolarize_each(&depolarize_each(&rho, 0.2, &[0]).unwrap(), 0.2, &[1]).unwrap();
        let b = depolarize_each(&depolarize_each(&rho, 0.2, &[1]).unwrap(), 0.2, &[0]).unwrap();
        assert!(a.frobenius_distance(&b) < 1e-15);
        a.validate().unwrap();
    }

    #[test]
    fn global_channel() {
        let zero = one_qubit([1.0, 0.0]).to_density();
        assert_eq!(global_depolarize(&zero, 0.0).unwrap(), zero);
        let full = global_depolarize(&zero, 1.0).unwrap();
        assert!(full.frobenius_distance(&DensityMatrix::maximally_mixed(1).unwrap()) < 1e-15);
        for w in [0.1, 0.5, 0.9] {
            let out = global_depolarize(&zero, w).unwrap();
            assert!((out.trace() - c(1.0)).norm() < 1e-15);
        }
        assert!(global_depolarize(&zero, -0.1).is_err());
    }

    #[test]
    fn expectations() {
        let zero = one_qubit([1.0, 0.0]).to_density();
        let z = PauliSum::from_pauli(&p("Z"));
        assert!((expectation(&zero, &z).unwrap() - c(1.0)).norm() < 1e-15);
        let half = DensityMatrix::maximally_mixed(1).unwrap();
        let x = PauliSum::from_pauli(&p("X"));
        assert!(expectation(&half, &x).unwrap().norm() < 1e-15);
        assert!(expectation(&half, &PauliSum::from_pauli(&p("XX"))).is_err());
    }

    #[test]
    fn fidelities() {
        let zero = one_qubit([1.0, 0.0]);
        let one = one_qubit([0.0, 1.0]);
        assert!((fidelity(&zero.to_density(), &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&zero.to_density(), &one).unwrap().abs() < 1e-15);
        let psi = one_qubit([0.6, 0.8]);
        for pr in [0.05, 0.2, 0.5] {
            let noisy = depolarize_each(&psi.to_density(), pr, &[0]).unwrap();
            assert!((fidelity(&noisy, &psi).unwrap() - (1.0 - 2.0 * pr / 3.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn invariant_checks() {
        let bad = CMatrix::identity(2, 2);
        assert!(DensityMatrix::from_matrix(1, bad).is_err());
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(DensityMatrix::from_matrix(1, neg).is_err());
        assert!(DensityMatrix::from_matrix(2, CMatrix::identity(2, 2)).is_err());
        assert!(DensityMatrix::maximally_mixed(13).is_err());
    }
}
